"""Flows over time with deterministic point queues on fixed paths.

Supplies are piecewise constant, so every rate is a :class:`StepFunction`
and every cumulative flow, queue and exit-time function is an exact
:class:`PiecewiseLinear`.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from fractions import Fraction
from typing import Hashable, Mapping, Sequence

from .model import Commodity, Network
from .piecewise import ZERO, PiecewiseLinear, StepFunction, as_fraction


class HorizonExceeded(RuntimeError):
    pass


@dataclass(frozen=True)
class ArcDynamics:
    transit_time: Fraction
    capacity: Fraction
    inflow: StepFunction
    outflow: StepFunction
    queue: PiecewiseLinear  # z_e(theta): volume waiting at the bottleneck at time theta
    exit_time: PiecewiseLinear  # T_e(theta) for flow entering at theta

    def waiting_time(self, theta) -> Fraction:
        return self.queue(theta + self.transit_time) / self.capacity

    def entrance_for_exit(self, theta) -> Fraction:
        """Earliest entrance time whose exit time is ``theta``."""
        return self.exit_time.inverse_min(theta, lower=ZERO)


def _queue_outflow(arriving: StepFunction, nu: Fraction) -> StepFunction:
    """Outflow of a point queue served at rate ``nu`` fed at rate ``arriving``."""
    out = []
    z = ZERO
    for a, b, r in arriving.pieces():
        if z == 0 and r <= nu:
            out.append((a, b, r))
        elif r >= nu:
            out.append((a, b, nu))
            z += (r - nu) * (b - a)
        else:
            empty_at = a + z / (nu - r)
            if empty_at >= b:
                out.append((a, b, nu))
                z -= (nu - r) * (b - a)
            else:
                out.append((a, empty_at, nu))
                out.append((empty_at, b, r))
                z = ZERO
    if z > 0:
        end = arriving.end
        out.append((end, end + z / nu, nu))
    return StepFunction.from_pieces(out)


def arc_outflow(inflow: StepFunction, transit_time, capacity) -> ArcDynamics:
    """Push ``inflow`` through one arc: fixed transit delay, then a FIFO point queue."""
    tau, nu = as_fraction(transit_time), as_fraction(capacity)
    outflow = _queue_outflow(inflow.shift(tau), nu)
    queue = inflow.integral().shift(tau) - outflow.integral()
    exit_time = queue.shift(-tau).scale(1 / nu) + PiecewiseLinear.identity().offset(tau)
    return ArcDynamics(tau, nu, inflow, outflow, queue, exit_time)


def commodity_split(dyn: ArcDynamics, inflows: Mapping[Hashable, StepFunction]) -> dict[Hashable, StepFunction]:
    """Per-commodity outflow rates that keep each commodity's share of the entering flow.

    Uses the FIFO mass identity: the cumulative outflow of a commodity at
    ``T_e(x)`` equals its cumulative inflow at ``x``.  On plateaus of ``T_e``
    no flow enters, so the choice of preimage does not matter there.
    """
    T = dyn.exit_time
    out = {}
    for key, f in inflows.items():
        F = f.integral()
        xs = sorted(set(T.xs) | set(F.xs))
        pts: dict[Fraction, Fraction] = {}
        for x in xs:
            theta, value = T(x), F(x)
            if theta in pts and pts[theta] != value:
                raise AssertionError("cumulative inflow changes on an exit-time plateau")
            pts[theta] = value
        thetas = sorted(pts)
        cumulative = PiecewiseLinear(tuple(thetas), tuple(pts[t] for t in thetas))
        out[key] = cumulative.derivative()
    return out


@dataclass
class FlowOverTime:
    network: Network
    commodities: tuple[Commodity, ...]
    arcs: dict[str, ArcDynamics]
    inflow: dict[tuple[str, str], StepFunction]  # (commodity, arc) -> f+_{j,e}
    outflow: dict[tuple[str, str], StepFunction]  # (commodity, arc) -> f-_{j,e}

    def commodity(self, cid: str) -> Commodity:
        return next(c for c in self.commodities if c.id == cid)

    def cumulative_inflow(self, cid: str, arc_id: str) -> PiecewiseLinear:
        return self.inflow[(cid, arc_id)].integral()

    def cumulative_outflow(self, cid: str, arc_id: str) -> PiecewiseLinear:
        return self.outflow[(cid, arc_id)].integral()

    def arrival_time(self, cid: str, phi, node: str) -> Fraction:
        """Time at which particle ``phi`` of commodity ``cid`` reaches ``node`` on its path."""
        c = self.commodity(cid)
        phi = as_fraction(phi)
        if phi < 0 or phi > c.supply.mass:
            raise ValueError(f"particle {phi} outside [0, {c.supply.mass}]")
        theta = c.supply.cumulative.inverse_min(phi, lower=ZERO)
        v = c.origin
        for arc_id in c.path:
            if v == node:
                return theta
            theta = self.arcs[arc_id].exit_time(theta)
            v = self.network.arc(arc_id).head
        if v == node:
            return theta
        raise ValueError(f"node {node!r} is not on the path of commodity {cid!r}")

    def breakpoint_rows(self) -> list[tuple]:
        """Rows ``(arc, commodity|total, kind, time, value)`` for the breakpoint dump."""
        rows = []
        kinds = {"inflow": 0, "outflow": 1, "queue": 2}
        for k, arc in enumerate(self.network.arcs):
            dyn = self.arcs[arc.id]
            series = [("total", "inflow", dyn.inflow), ("total", "outflow", dyn.outflow)]
            for c in self.commodities:
                if arc.id in c.path:
                    series.append((c.id, "inflow", self.inflow[(c.id, arc.id)]))
                    series.append((c.id, "outflow", self.outflow[(c.id, arc.id)]))
            for who, kind, f in series:
                for t, v in zip(f.times, f.values + (ZERO,)):
                    rows.append((k, arc.id, who, kind, t, v))
            for t, v in zip(dyn.queue.xs, dyn.queue.ys):
                rows.append((k, arc.id, "total", "queue", t, v))
        rows.sort(key=lambda r: (r[0], r[2] != "total", r[2], kinds[r[3]], r[4]))
        return [r[1:] for r in rows]

    def write_breakpoints_csv(self, fh, decimal: bool = False) -> None:
        w = csv.writer(fh, lineterminator="\n")
        header = ["arc", "commodity", "kind", "time", "value_or_slope"]
        if decimal:
            header += ["time_decimal", "value_decimal"]
        w.writerow(header)
        for arc_id, who, kind, t, v in self.breakpoint_rows():
            row = [arc_id, who, kind, str(t), str(v)]
            if decimal:
                row += [f"{float(t):.12g}", f"{float(v):.12g}"]
            w.writerow(row)


def default_horizon_cap(net: Network, commodities: Sequence[Commodity]) -> Fraction:
    last = max((c.supply.support_end or ZERO for c in commodities), default=ZERO)
    mass = sum((c.supply.mass for c in commodities), ZERO)
    min_nu = min(a.capacity for a in net.arcs)
    return 2 * (last + mass / min_nu + sum(a.transit_time for a in net.arcs))


def load_network(net: Network, commodities: Sequence[Commodity], *, horizon_cap=None) -> FlowOverTime:
    """Compute the feasible flow over time induced by the supplies on their fixed paths.

    Time advances in slabs of the shortest transit time: inflow known on
    ``[0, frontier)`` fixes every arc's outflow on ``[0, frontier + tau_e)``,
    which extends all successor inflows by at least one slab.
    """
    commodities = tuple(commodities)
    cap = default_horizon_cap(net, commodities) if horizon_cap is None else as_fraction(horizon_cap)
    step = net.min_transit_time
    users: dict[str, list[Commodity]] = {a.id: [] for a in net.arcs}
    for c in commodities:
        for arc_id in c.path:
            users[arc_id].append(c)

    def sweep(known: dict, frontier):
        dyn, out = {}, {}
        for arc in net.arcs:
            ins = {c.id: known[(c.id, arc.id)] for c in users[arc.id]}
            if frontier is not None:
                ins = {k: f.restrict(ZERO, frontier) for k, f in ins.items()}
            total = sum(ins.values(), StepFunction())
            dyn[arc.id] = arc_outflow(total, arc.transit_time, arc.capacity)
            for cid, f in commodity_split(dyn[arc.id], ins).items():
                out[(cid, arc.id)] = f
        return dyn, out

    known = {}
    for c in commodities:
        for k, arc_id in enumerate(c.path):
            known[(c.id, arc_id)] = c.supply.rate if k == 0 else StepFunction()
    frontier = ZERO
    while True:
        _, out = sweep(known, frontier)
        frontier += step
        for c in commodities:
            for a, b in zip(c.path, c.path[1:]):
                known[(c.id, b)] = out[(c.id, a)].restrict(ZERO, frontier)
        done = all(out[(c.id, c.path[-1])].total() == c.supply.mass for c in commodities)
        if done:
            break
        if frontier > cap:
            raise HorizonExceeded(f"flow still in the network at time {frontier} > cap {cap}")
    dyn, out = sweep(known, None)
    inflow = {k: v for k, v in known.items()}
    return FlowOverTime(net, commodities, dyn, inflow, out)


def check_feasibility(flow: FlowOverTime) -> list[str]:
    """Violations of the flow-over-time conditions, checked exactly on every interval."""
    problems = []
    net = flow.network
    for arc in net.arcs:
        dyn = flow.arcs[arc.id]
        keys = [c.id for c in flow.commodities if arc.id in c.path]
        total_in = sum((flow.inflow[(k, arc.id)] for k in keys), StepFunction())
        total_out = sum((flow.outflow[(k, arc.id)] for k in keys), StepFunction())
        if total_in != dyn.inflow:
            problems.append(f"{arc.id}: commodity inflows do not sum to the total")
        if total_out != dyn.outflow:
            problems.append(f"{arc.id}: commodity outflows do not sum to the total")
        if dyn.inflow.total() != dyn.outflow.total():
            problems.append(f"{arc.id}: mass not conserved over the arc")
        if dyn.queue.minimum() < 0:
            problems.append(f"{arc.id}: negative queue")
        if not dyn.exit_time.is_nondecreasing():
            problems.append(f"{arc.id}: exit time decreases")
        tau, nu = arc.transit_time, arc.capacity
        # outflow rule on every interval of the common refinement
        grid = sorted(
            {ZERO}
            | set(dyn.outflow.times)
            | {t + tau for t in dyn.inflow.times}
            | set(dyn.queue.xs)
        )
        for a, b in zip(grid, grid[1:]):
            mid = (a + b) / 2
            z = dyn.queue(mid)
            want = nu if z > 0 else min(dyn.inflow(mid - tau), nu)
            if dyn.outflow(mid) != want:
                problems.append(f"{arc.id}: outflow {dyn.outflow(mid)} != {want} at {mid}")
        # proportional split, evaluated at the earliest entrance time
        T = dyn.exit_time
        thetas = sorted(
            {ZERO}
            | set(dyn.outflow.times)
            | {T(x) for x in T.xs if x >= 0}
            | {T(t) for t in dyn.inflow.times}
            | {t for k in keys for t in flow.outflow[(k, arc.id)].times}
        )
        for a, b in zip(thetas, thetas[1:]):
            mid = (a + b) / 2
            total = dyn.outflow(mid)
            src = dyn.entrance_for_exit(mid) if mid >= tau else None
            for k in keys:
                got = flow.outflow[(k, arc.id)](mid)
                if src is None or dyn.inflow(src) == 0:
                    want = ZERO
                else:
                    want = total * flow.inflow[(k, arc.id)](src) / dyn.inflow(src)
                if got != want:
                    problems.append(f"{arc.id}/{k}: split {got} != {want} at {mid}")
        for k in keys:
            Fin = flow.cumulative_inflow(k, arc.id)
            Fout = flow.cumulative_outflow(k, arc.id)
            for x in sorted({ZERO} | {x for x in Fin.xs if x >= 0} | {x for x in T.xs if x >= 0}):
                if Fout(T(x)) != Fin(x):
                    problems.append(f"{arc.id}/{k}: FIFO mass identity fails at {x}")
    # commodity-wise conservation at every node
    for c in flow.commodities:
        for v in net.nodes:
            net_out = StepFunction()
            for arc in net.outgoing(v):
                if arc.id in c.path:
                    net_out = net_out + flow.inflow[(c.id, arc.id)]
            for arc in net.incoming(v):
                if arc.id in c.path:
                    net_out = net_out - flow.outflow[(c.id, arc.id)]
            if v == c.origin:
                if net_out != c.supply.rate:
                    problems.append(f"{c.id}@{v}: origin balance differs from supply")
            elif v == c.destination:
                if net_out.maximum() > 0:
                    problems.append(f"{c.id}@{v}: destination creates flow")
            elif net_out:
                problems.append(f"{c.id}@{v}: flow not conserved")
    return problems
