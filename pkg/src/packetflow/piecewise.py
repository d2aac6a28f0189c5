"""Exact piecewise-constant and piecewise-linear functions over Fractions.

Both classes keep a canonical representation, so ``==`` compares the
functions themselves rather than the way they were built.
"""

from __future__ import annotations

from bisect import bisect_left, bisect_right
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable

ZERO = Fraction(0)


def as_fraction(x) -> Fraction:
    """Convert ints, Fractions and numeric strings ("3", "2.5", "7/3") exactly."""
    if isinstance(x, bool):
        raise TypeError("booleans are not numbers here")
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, str):
        return Fraction(x.strip())
    raise TypeError(f"expected an exact number, got {type(x).__name__} {x!r}")


@dataclass(frozen=True)
class StepFunction:
    """Rate function: ``values[k]`` on ``[times[k], times[k+1])``, zero elsewhere.

    ``__call__`` is right-continuous; ``left_value`` reads the same pieces as
    left-continuous, i.e. on ``(times[k], times[k+1]]``.
    """

    times: tuple[Fraction, ...] = ()
    values: tuple[Fraction, ...] = ()

    def __post_init__(self):
        times = tuple(as_fraction(t) for t in self.times)
        values = tuple(as_fraction(v) for v in self.values)
        if times and len(values) != len(times) - 1:
            raise ValueError("need exactly one value per interval")
        if not times and values:
            raise ValueError("values without breakpoints")
        if any(b <= a for a, b in zip(times, times[1:])):
            raise ValueError("breakpoints must be strictly increasing")
        times, values = _canonical_steps(times, values)
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "values", values)

    @classmethod
    def from_pieces(cls, pieces: Iterable[tuple]) -> StepFunction:
        """Build from disjoint ``(start, end, rate)`` pieces; gaps are zero."""
        items = sorted(
            (as_fraction(a), as_fraction(b), as_fraction(r)) for a, b, r in pieces
        )
        items = [p for p in items if p[1] > p[0]]
        if not items:
            return cls()
        times = [items[0][0]]
        values: list[Fraction] = []
        for a, b, r in items:
            if a < times[-1]:
                raise ValueError("pieces overlap")
            if a > times[-1]:
                values.append(ZERO)
                times.append(a)
            values.append(r)
            times.append(b)
        return cls(tuple(times), tuple(values))

    @classmethod
    def constant(cls, rate, start, end) -> StepFunction:
        return cls.from_pieces([(start, end, rate)])

    def pieces(self) -> list[tuple[Fraction, Fraction, Fraction]]:
        return list(zip(self.times, self.times[1:], self.values))

    def __bool__(self) -> bool:
        return bool(self.values)

    def __call__(self, x) -> Fraction:
        k = bisect_right(self.times, x) - 1
        if 0 <= k < len(self.values):
            return self.values[k]
        return ZERO

    def left_value(self, x) -> Fraction:
        k = bisect_left(self.times, x) - 1
        if 0 <= k < len(self.values):
            return self.values[k]
        return ZERO

    @property
    def start(self) -> Fraction | None:
        return self.times[0] if self.times else None

    @property
    def end(self) -> Fraction | None:
        return self.times[-1] if self.times else None

    def shift(self, delta) -> StepFunction:
        """Return ``x -> self(x - delta)``."""
        d = as_fraction(delta)
        return StepFunction(tuple(t + d for t in self.times), self.values)

    def scale(self, factor) -> StepFunction:
        c = as_fraction(factor)
        return StepFunction(self.times, tuple(v * c for v in self.values))

    def __add__(self, other: StepFunction) -> StepFunction:
        if not other:
            return self
        if not self:
            return other
        grid = sorted(set(self.times) | set(other.times))
        values = tuple(self(t) + other(t) for t in grid[:-1])
        return StepFunction(tuple(grid), values)

    def __neg__(self) -> StepFunction:
        return self.scale(-1)

    def __sub__(self, other: StepFunction) -> StepFunction:
        return self + (-other)

    def restrict(self, lo=None, hi=None) -> StepFunction:
        """Zero outside ``[lo, hi)``."""
        out = []
        for a, b, r in self.pieces():
            if lo is not None:
                a = max(a, lo)
            if hi is not None:
                b = min(b, hi)
            if b > a:
                out.append((a, b, r))
        return StepFunction.from_pieces(out)

    def total(self) -> Fraction:
        return sum((r * (b - a) for a, b, r in self.pieces()), ZERO)

    def maximum(self) -> Fraction:
        return max(self.values, default=ZERO)

    def minimum(self) -> Fraction:
        return min(self.values, default=ZERO)

    def integral(self) -> PiecewiseLinear:
        """Cumulative function ``x -> integral of self over (-inf, x]``."""
        if not self:
            return PiecewiseLinear.constant(ZERO)
        ys = [ZERO]
        for a, b, r in self.pieces():
            ys.append(ys[-1] + r * (b - a))
        return PiecewiseLinear(self.times, tuple(ys))


def _canonical_steps(times, values):
    if not values:
        return (), ()
    ts = [times[0]]
    vs: list[Fraction] = []
    for t, v in zip(times[1:], values):
        if vs and vs[-1] == v:
            ts[-1] = t
        else:
            vs.append(v)
            ts.append(t)
    while vs and vs[0] == 0:
        vs.pop(0)
        ts.pop(0)
    while vs and vs[-1] == 0:
        vs.pop()
        ts.pop()
    if not vs:
        return (), ()
    return tuple(ts), tuple(vs)


@dataclass(frozen=True)
class PiecewiseLinear:
    """Continuous piecewise-linear function through ``(xs[k], ys[k])``.

    Left of ``xs[0]`` it continues with ``head_slope``, right of ``xs[-1]``
    with ``tail_slope``.
    """

    xs: tuple[Fraction, ...]
    ys: tuple[Fraction, ...]
    head_slope: Fraction = ZERO
    tail_slope: Fraction = ZERO

    def __post_init__(self):
        xs = tuple(as_fraction(x) for x in self.xs)
        ys = tuple(as_fraction(y) for y in self.ys)
        if not xs or len(xs) != len(ys):
            raise ValueError("need matching, non-empty breakpoint lists")
        if any(b <= a for a, b in zip(xs, xs[1:])):
            raise ValueError("breakpoints must be strictly increasing")
        head = as_fraction(self.head_slope)
        tail = as_fraction(self.tail_slope)
        xs, ys = _canonical_points(xs, ys, head, tail)
        object.__setattr__(self, "xs", xs)
        object.__setattr__(self, "ys", ys)
        object.__setattr__(self, "head_slope", head)
        object.__setattr__(self, "tail_slope", tail)

    @classmethod
    def constant(cls, value) -> PiecewiseLinear:
        return cls((ZERO,), (as_fraction(value),))

    @classmethod
    def identity(cls) -> PiecewiseLinear:
        return cls((ZERO,), (ZERO,), Fraction(1), Fraction(1))

    def __call__(self, x) -> Fraction:
        xs, ys = self.xs, self.ys
        if x <= xs[0]:
            return ys[0] + self.head_slope * (x - xs[0])
        if x >= xs[-1]:
            return ys[-1] + self.tail_slope * (x - xs[-1])
        k = bisect_right(xs, x) - 1
        x0, x1, y0, y1 = xs[k], xs[k + 1], ys[k], ys[k + 1]
        return y0 + (y1 - y0) * (x - x0) / (x1 - x0)

    def slopes(self) -> list[Fraction]:
        xs, ys = self.xs, self.ys
        return [(ys[k + 1] - ys[k]) / (xs[k + 1] - xs[k]) for k in range(len(xs) - 1)]

    def _combine(self, other: PiecewiseLinear, sign: int) -> PiecewiseLinear:
        grid = tuple(sorted(set(self.xs) | set(other.xs)))
        return PiecewiseLinear(
            grid,
            tuple(self(x) + sign * other(x) for x in grid),
            self.head_slope + sign * other.head_slope,
            self.tail_slope + sign * other.tail_slope,
        )

    def __add__(self, other: PiecewiseLinear) -> PiecewiseLinear:
        return self._combine(other, 1)

    def __sub__(self, other: PiecewiseLinear) -> PiecewiseLinear:
        return self._combine(other, -1)

    def scale(self, factor) -> PiecewiseLinear:
        c = as_fraction(factor)
        return PiecewiseLinear(
            self.xs, tuple(y * c for y in self.ys), self.head_slope * c, self.tail_slope * c
        )

    def offset(self, value) -> PiecewiseLinear:
        c = as_fraction(value)
        return PiecewiseLinear(self.xs, tuple(y + c for y in self.ys), self.head_slope, self.tail_slope)

    def shift(self, delta) -> PiecewiseLinear:
        """Return ``x -> self(x - delta)``."""
        d = as_fraction(delta)
        return PiecewiseLinear(tuple(x + d for x in self.xs), self.ys, self.head_slope, self.tail_slope)

    def is_nondecreasing(self) -> bool:
        return (
            self.head_slope >= 0
            and self.tail_slope >= 0
            and all(b >= a for a, b in zip(self.ys, self.ys[1:]))
        )

    def inverse_min(self, y, lower=None) -> Fraction:
        """Smallest ``x >= lower`` with ``self(x) >= y``; ``self`` must be non-decreasing."""
        y = as_fraction(y)
        lo = self.xs[0] if lower is None else as_fraction(lower)
        if self(lo) >= y:
            return lo
        xs, ys = self.xs, self.ys
        idx = bisect_left(ys, y)
        if idx == len(ys):
            if self.tail_slope <= 0:
                raise ValueError(f"level {y} is never reached")
            x = xs[-1] + (y - ys[-1]) / self.tail_slope
        elif idx == 0:
            # only reachable when lo < xs[0] and the head is rising
            x = xs[0] - (ys[0] - y) / self.head_slope
        else:
            x0, x1, y0, y1 = xs[idx - 1], xs[idx], ys[idx - 1], ys[idx]
            x = x0 + (y - y0) * (x1 - x0) / (y1 - y0)
        return max(x, lo)

    def derivative(self) -> StepFunction:
        if self.head_slope or self.tail_slope:
            raise ValueError("derivative has unbounded support")
        return StepFunction(self.xs, tuple(self.slopes()))

    def sup_abs(self) -> Fraction:
        if self.head_slope or self.tail_slope:
            raise ValueError("unbounded function")
        return max(abs(y) for y in self.ys)

    def minimum(self) -> Fraction:
        if self.head_slope > 0 or self.tail_slope < 0:
            raise ValueError("unbounded below")
        return min(self.ys)

    @property
    def final_value(self) -> Fraction:
        if self.tail_slope:
            raise ValueError("no limit at infinity")
        return self.ys[-1]


def _canonical_points(xs, ys, head, tail):
    if len(xs) == 1:
        if head == tail:
            # a straight line: anchor it at 0 so equal lines compare equal
            return (ZERO,), (ys[0] - head * xs[0],)
        return xs, ys
    slopes = [(ys[k + 1] - ys[k]) / (xs[k + 1] - xs[k]) for k in range(len(xs) - 1)]
    # slope to the left and right of each point
    left = [head] + slopes
    right = slopes + [tail]
    keep = [k for k in range(len(xs)) if left[k] != right[k]]
    if not keep:
        return _canonical_points(xs[:1], ys[:1], head, tail)
    return tuple(xs[k] for k in keep), tuple(ys[k] for k in keep)


def sup_distance(f: PiecewiseLinear, g: PiecewiseLinear) -> Fraction:
    """Exact ``sup |f - g|`` over the real line (attained at a breakpoint)."""
    return (f - g).sup_abs()
