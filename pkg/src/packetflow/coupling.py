"""Bridge from packet runs to flow-like objects.

Packets are cut from the supply rates, and a finished event log is turned into
piecewise-constant in/outflow rates.  From those we get refined (sub-step)
arrival times plus queue, waiting and exit-time functions that can be set
against the continuous model.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .discrete import EventLog, Packet, PacketId, network_loading
from .model import Commodity, Discretization, Network, ceil_to_grid, discretize
from .piecewise import ZERO, PiecewiseLinear, StepFunction, as_fraction
from .scenario import Scenario


def _ceil_step(x: Fraction, alpha: Fraction) -> Fraction:
    # grid ceiling that also accepts negative times (refined times of step-0 entrants)
    return -((-x) // alpha) * alpha


@dataclass(frozen=True)
class PacketSet:
    commodity: str
    release_times: tuple[Fraction, ...]  # r_i for i = 1..n, on the alpha grid

    @property
    def count(self) -> int:
        return len(self.release_times)


def build_packets(commodity: Commodity, alpha, beta) -> PacketSet:
    """Cut the supply into ``floor(m / beta)`` packets released on the alpha grid.

    Packet ``i`` is released at the first grid time by which ``i * beta``
    volume has been supplied.
    """
    alpha, beta = as_fraction(alpha), as_fraction(beta)
    count = int(commodity.supply.mass // beta)
    cumulative = commodity.supply.cumulative
    times = tuple(
        ceil_to_grid(cumulative.inverse_min(i * beta, lower=ZERO), alpha) for i in range(1, count + 1)
    )
    return PacketSet(commodity.id, times)


def packets_for(commodities: Sequence[Commodity], d: Discretization) -> list[Packet]:
    out = []
    for c in commodities:
        ps = build_packets(c, d.alpha, d.beta)
        for i, r in enumerate(ps.release_times, start=1):
            step = r / d.alpha
            assert step.denominator == 1
            out.append(Packet(PacketId(c.id, i), c.path, int(step), (c.id, i)))
    return out


def _step_rates(per_step: dict[int, int], alpha: Fraction, beta: Fraction) -> StepFunction:
    # counts in step t are spread over ((t-1) alpha, t alpha]
    return StepFunction.from_pieces(
        ((t - 1) * alpha, t * alpha, beta / alpha * n) for t, n in per_step.items() if n
    )


@dataclass
class DiscreteFlowFunctions:
    """Per (commodity, arc) packet in/outflow rates of a finished run.

    The rates are constant on each ``((t-1) alpha, t alpha]``; read them with
    ``left_value``.  Integrals are the same either way.
    """

    network: Network
    commodities: tuple[Commodity, ...]
    alpha: Fraction
    beta: Fraction
    inflow: dict[tuple[str, str], StepFunction]
    outflow: dict[tuple[str, str], StepFunction]

    def commodity(self, cid: str) -> Commodity:
        return next(c for c in self.commodities if c.id == cid)

    def cumulative_inflow(self, cid: str, arc_id: str) -> PiecewiseLinear:
        return self.inflow[(cid, arc_id)].integral()

    def cumulative_outflow(self, cid: str, arc_id: str) -> PiecewiseLinear:
        return self.outflow[(cid, arc_id)].integral()

    def total_inflow(self, arc_id: str) -> StepFunction:
        return sum((f for (_, e), f in self.inflow.items() if e == arc_id), StepFunction())

    def total_outflow(self, arc_id: str) -> StepFunction:
        return sum((f for (_, e), f in self.outflow.items() if e == arc_id), StepFunction())

    def node_rate(self, cid: str, node: str) -> StepFunction:
        """Rate at which commodity ``cid`` passes ``node``: outflow into it, or inflow at the origin."""
        c = self.commodity(cid)
        if node == c.origin:
            return self.inflow[(cid, c.path[0])]
        for arc_id in c.path:
            if self.network.arc(arc_id).head == node:
                return self.outflow[(cid, arc_id)]
        raise ValueError(f"node {node!r} is not on the path of commodity {cid!r}")

    def packet_count(self, cid: str) -> int:
        c = self.commodity(cid)
        return int(self.inflow[(cid, c.path[0])].total() / self.beta)


def extract_rates(log: EventLog, net: Network, commodities: Sequence[Commodity], alpha, beta) -> DiscreteFlowFunctions:
    alpha, beta = as_fraction(alpha), as_fraction(beta)
    inflow, outflow = {}, {}
    for c in commodities:
        for arc_id in c.path:
            for table, target in ((log.entered, inflow), (log.left, outflow)):
                counts = {
                    t: sum(1 for p in ps if p.commodity == c.id) for t, ps in table.get(arc_id, {}).items()
                }
                target[(c.id, arc_id)] = _step_rates(counts, alpha, beta)
    return DiscreteFlowFunctions(net, tuple(commodities), alpha, beta, inflow, outflow)


def refined_arrival(flows: DiscreteFlowFunctions, cid: str, index: int, node: str) -> Fraction:
    """Refined time at which packet ``index`` of ``cid`` passes ``node``."""
    n = flows.packet_count(cid)
    if not 1 <= index <= n:
        raise ValueError(f"packet index {index} outside 1..{n}")
    return flows.node_rate(cid, node).integral().inverse_min(index * flows.beta)


def position_in_step(refined_time, rate: StepFunction, alpha, beta) -> int:
    """Rank of a packet among the same commodity's packets handled in its time step."""
    t, alpha, beta = as_fraction(refined_time), as_fraction(alpha), as_fraction(beta)
    step_start = _ceil_step(t, alpha) - alpha
    k = (t - step_start) / alpha * rate.left_value(t) * alpha / beta
    if k.denominator != 1 or k < 1:
        raise AssertionError(f"position {k} is not a positive integer")
    return int(k)


class DiscreteQueueStats:
    """Queue sizes, waiting and exit times of one arc in the packet model."""

    def __init__(self, flows: DiscreteFlowFunctions, arc_id: str):
        self.flows = flows
        self.arc = flows.network.arc(arc_id)
        self.delay = ceil_to_grid(self.arc.transit_time, flows.alpha)
        self.users = [c.id for c in flows.commodities if arc_id in c.path]
        self._in = {j: flows.cumulative_inflow(j, arc_id) for j in self.users}
        self._out = {j: flows.cumulative_outflow(j, arc_id) for j in self.users}

    def commodity_queue(self, cid: str) -> PiecewiseLinear:
        """``theta -> G+_j(theta - delay) - G-_j(theta)``."""
        return self._in[cid].shift(self.delay) - self._out[cid]

    def total_queue(self) -> PiecewiseLinear:
        return sum((self.commodity_queue(j) for j in self.users[1:]), self.commodity_queue(self.users[0]))

    def waiting_time(self, cid: str, theta) -> Fraction:
        """Smallest ``q >= 0`` such that the commodity's outflow over
        ``(theta + delay, theta + delay + q]`` covers its queue at ``theta + delay``."""
        theta = as_fraction(theta)
        start = theta + self.delay
        need = self.commodity_queue(cid)(start)
        if need <= 0:
            return ZERO
        for a, b, r in self.flows.outflow[(cid, self.arc.id)].pieces():
            if b <= start or r == 0:
                continue
            a = max(a, start)
            if r * (b - a) >= need:
                return a + need / r - start
            need -= r * (b - a)
        raise AssertionError(f"queue of {cid} on {self.arc.id} never drains")

    def exit_time(self, cid: str, theta) -> Fraction:
        theta = as_fraction(theta)
        return theta + self.delay + self.waiting_time(cid, theta)


def exit_identity_violations(flows: DiscreteFlowFunctions) -> list[str]:
    """Packets whose refined time at an arc's head differs from the exit time of its refined entrance."""
    problems = []
    net = flows.network
    for c in flows.commodities:
        n = flows.packet_count(c.id)
        for arc_id in c.path:
            stats = DiscreteQueueStats(flows, arc_id)
            arc = net.arc(arc_id)
            for i in range(1, n + 1):
                enter = refined_arrival(flows, c.id, i, arc.tail)
                leave = refined_arrival(flows, c.id, i, arc.head)
                predicted = stats.exit_time(c.id, enter)
                if predicted != leave:
                    problems.append(f"{c.id}#{i} on {arc_id}: exit {predicted} != refined {leave}")
    return problems


@dataclass
class CoupledRun:
    scenario: Scenario
    packets: list[Packet]
    log: EventLog
    flows: DiscreteFlowFunctions

    def refined_rows(self) -> list[tuple]:
        """Rows ``(commodity, packet, node, refined_time, step, position)``."""
        rows = []
        d = self.scenario.discretization
        net = self.scenario.network
        for c in self.scenario.commodities:
            nodes = net.path_nodes(c.path)
            for i in range(1, self.flows.packet_count(c.id) + 1):
                for v in nodes:
                    t = refined_arrival(self.flows, c.id, i, v)
                    step = _ceil_step(t, d.alpha) / d.alpha
                    k = position_in_step(t, self.flows.node_rate(c.id, v), d.alpha, d.beta)
                    rows.append((c.id, i, v, t, int(step), k))
        return rows

    def write_refined_csv(self, fh, decimal: bool = False) -> None:
        w = csv.writer(fh, lineterminator="\n")
        header = ["commodity", "packet", "node", "refined_time", "step", "position"]
        w.writerow(header + (["refined_time_decimal"] if decimal else []))
        for cid, i, v, t, step, k in self.refined_rows():
            row = [cid, i, v, str(t), step, k]
            if decimal:
                row.append(f"{float(t):.12g}")
            w.writerow(row)


def couple(scenario: Scenario, *, origin_priority: int | None = None, max_steps: int | None = None) -> CoupledRun:
    """Cut packets from the scenario's supplies, run the packet model and extract its rates."""
    d = scenario.discretization
    packets = packets_for(scenario.commodities, d)
    log = network_loading(
        scenario.network,
        discretize(scenario.network, d),
        packets,
        origin_priority=origin_priority,
        max_steps=max_steps,
    )
    flows = extract_rates(log, scenario.network, scenario.commodities, d.alpha, d.beta)
    return CoupledRun(scenario, packets, log, flows)
