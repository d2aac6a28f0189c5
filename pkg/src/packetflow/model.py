"""Network, commodity and discretization data model.

Every time, rate and volume is a :class:`fractions.Fraction`.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from .piecewise import ZERO, PiecewiseLinear, StepFunction, as_fraction


def floor_to_grid(x, step) -> Fraction:
    """Largest multiple ``k * step`` (``k >= 0``) that is ``<= x``."""
    x, step = as_fraction(x), as_fraction(step)
    if x < 0 or step <= 0:
        raise ValueError("floor_to_grid needs x >= 0 and step > 0")
    return (x // step) * step


def ceil_to_grid(x, step) -> Fraction:
    """Smallest multiple ``k * step`` (``k >= 0``) that is ``>= x``."""
    x, step = as_fraction(x), as_fraction(step)
    if x < 0 or step <= 0:
        raise ValueError("ceil_to_grid needs x >= 0 and step > 0")
    return -((-x) // step) * step


@dataclass(frozen=True)
class Arc:
    id: str
    tail: str
    head: str
    transit_time: Fraction
    capacity: Fraction
    merge_priority: int = 0

    def __post_init__(self):
        object.__setattr__(self, "transit_time", as_fraction(self.transit_time))
        object.__setattr__(self, "capacity", as_fraction(self.capacity))
        if self.transit_time <= 0:
            raise ValueError(f"arc {self.id}: transit time must be positive")
        if self.capacity <= 0:
            raise ValueError(f"arc {self.id}: capacity must be positive")


@dataclass(frozen=True)
class Network:
    nodes: tuple[str, ...]
    arcs: tuple[Arc, ...]
    _by_id: dict = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "nodes", tuple(self.nodes))
        object.__setattr__(self, "arcs", tuple(self.arcs))
        by_id = {}
        for arc in self.arcs:
            if arc.id in by_id:
                raise ValueError(f"duplicate arc id {arc.id!r}")
            if arc.tail not in self.nodes or arc.head not in self.nodes:
                raise ValueError(f"arc {arc.id}: endpoint not in node set")
            by_id[arc.id] = arc
        object.__setattr__(self, "_by_id", by_id)

    def arc(self, arc_id: str) -> Arc:
        return self._by_id[arc_id]

    def has_arc(self, arc_id: str) -> bool:
        return arc_id in self._by_id

    def incoming(self, node: str) -> list[Arc]:
        return [a for a in self.arcs if a.head == node]

    def outgoing(self, node: str) -> list[Arc]:
        return [a for a in self.arcs if a.tail == node]

    def path_nodes(self, path) -> list[str]:
        arcs = [self.arc(a) for a in path]
        return [arcs[0].tail] + [a.head for a in arcs]

    @property
    def min_transit_time(self) -> Fraction:
        return min(a.transit_time for a in self.arcs)


@dataclass(frozen=True)
class SupplyRate:
    """Piecewise-constant network inflow rate of one commodity."""

    pieces: tuple[tuple[Fraction, Fraction, Fraction], ...]

    def __post_init__(self):
        pieces = tuple(
            sorted((as_fraction(a), as_fraction(b), as_fraction(r)) for a, b, r in self.pieces)
        )
        for a, b, r in pieces:
            if a < 0 or b <= a:
                raise ValueError("supply pieces need 0 <= start < end")
            if r < 0:
                raise ValueError("supply rates must be non-negative")
        for (_, b, _), (a, _, _) in zip(pieces, pieces[1:]):
            if a < b:
                raise ValueError("supply pieces overlap")
        object.__setattr__(self, "pieces", pieces)

    @property
    def rate(self) -> StepFunction:
        return StepFunction.from_pieces(self.pieces)

    @property
    def cumulative(self) -> PiecewiseLinear:
        return self.rate.integral()

    @property
    def mass(self) -> Fraction:
        return sum((r * (b - a) for a, b, r in self.pieces), ZERO)

    @property
    def max_rate(self) -> Fraction:
        return max((r for _, _, r in self.pieces), default=ZERO)

    @property
    def support_start(self) -> Fraction | None:
        return self.rate.start

    @property
    def support_end(self) -> Fraction | None:
        return self.rate.end


@dataclass(frozen=True)
class Commodity:
    id: str
    origin: str
    destination: str
    path: tuple[str, ...]
    supply: SupplyRate

    def __post_init__(self):
        object.__setattr__(self, "path", tuple(self.path))


@dataclass(frozen=True)
class Discretization:
    alpha: Fraction
    beta: Fraction

    def __post_init__(self):
        object.__setattr__(self, "alpha", as_fraction(self.alpha))
        object.__setattr__(self, "beta", as_fraction(self.beta))
        if self.alpha <= 0 or self.beta <= 0:
            raise ValueError("alpha and beta must be positive")

    def warnings(self, net: Network, commodities=(), min_capacity=2) -> list[str]:
        """Soft preconditions of the convergence results that are not met."""
        out = []
        if self.beta / self.alpha >= 1:
            out.append(f"beta/alpha = {self.beta / self.alpha} >= 1")
        for arc in net.arcs:
            nu_hat = arc.capacity * self.alpha / self.beta
            if nu_hat < min_capacity:
                out.append(f"arc {arc.id}: packet capacity {nu_hat} < {min_capacity}")
        for c in commodities:
            grant = c.supply.max_rate * self.alpha / self.beta
            if c.supply.max_rate and grant < min_capacity:
                out.append(f"commodity {c.id}: release capacity {grant} < {min_capacity}")
        return out


@dataclass(frozen=True)
class DiscretizedArc:
    arc_id: str
    steps: int  # transit time in time steps
    capacity: Fraction  # packets per time step, possibly fractional


def discretize(net: Network, d: Discretization) -> list[DiscretizedArc]:
    out = []
    for arc in net.arcs:
        steps = ceil_to_grid(arc.transit_time, d.alpha) / d.alpha
        assert steps.denominator == 1 and steps >= 1
        out.append(DiscretizedArc(arc.id, int(steps), arc.capacity * d.alpha / d.beta))
    return out


def rate_bound(net: Network, commodities, arc_id: str) -> Fraction:
    """Instance constant bounding in- and outflow rates of ``arc_id`` in both models.

    Commodities released at the arc's tail count as an extra incoming arc whose
    capacity is their peak supply rate.
    """
    arc = net.arc(arc_id)
    into_tail = sum((a.capacity + 1 for a in net.incoming(arc.tail)), ZERO)
    into_tail += sum((c.supply.max_rate + 1 for c in commodities if c.origin == arc.tail), ZERO)
    return max(into_tail, arc.capacity + 1)
