"""Discretization sweeps: packet model versus flow over time.

Every error is an exact Fraction.  The only floating-point step is the
log-log slope fit in :func:`fit_rate`.
"""

from __future__ import annotations

import csv
import logging
import math
import statistics
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Callable, Sequence

from .continuous import ArcDynamics, FlowOverTime, arc_outflow, commodity_split, load_network
from .coupling import CoupledRun, DiscreteFlowFunctions, DiscreteQueueStats, couple, refined_arrival
from .model import Discretization, rate_bound
from .piecewise import ZERO, PiecewiseLinear, StepFunction, as_fraction, sup_distance
from .scenario import Scenario

log = logging.getLogger(__name__)


def unit_fraction_beta(alpha: Fraction) -> Fraction:
    """Packet size close to ``alpha ** 1.5``, snapped to a unit fraction."""
    return Fraction(1, max(1, round(float(alpha) ** -1.5)))


@dataclass(frozen=True)
class SweepConfig:
    alpha0: Fraction = Fraction(1, 2)
    levels: int = 5
    ratio: Fraction = Fraction(1, 2)
    beta_rule: Callable[[Fraction], Fraction] = unit_fraction_beta
    min_packet_capacity: Fraction = Fraction(2)

    def __post_init__(self):
        object.__setattr__(self, "alpha0", as_fraction(self.alpha0))
        object.__setattr__(self, "ratio", as_fraction(self.ratio))
        if self.alpha0 <= 0 or not 0 < self.ratio < 1:
            raise ValueError("need alpha0 > 0 and 0 < ratio < 1")
        if self.levels < 1:
            raise ValueError("need at least one level")

    def discretizations(self) -> list[Discretization]:
        out = []
        for k in range(self.levels):
            alpha = self.alpha0 * self.ratio**k
            out.append(Discretization(alpha, as_fraction(self.beta_rule(alpha))))
        return out


@dataclass(frozen=True)
class ErrorRecord:
    level: int
    commodity: str
    node: str
    packet: int
    discrete_time: Fraction
    continuous_time: Fraction

    @property
    def error(self) -> Fraction:
        return abs(self.discrete_time - self.continuous_time)


@dataclass
class LevelResult:
    level: int
    discretization: Discretization
    records: list[ErrorRecord]
    flow_errors: dict[tuple[str, str, str], Fraction]  # (commodity, arc, "in"/"out") -> sup norm
    warnings: list[str] = field(default_factory=list)

    @property
    def max_arrival_error(self) -> Fraction:
        return max((r.error for r in self.records), default=ZERO)

    @property
    def max_cumflow_error(self) -> Fraction:
        return max(self.flow_errors.values(), default=ZERO)


@dataclass
class ConvergenceReport:
    levels: list[LevelResult]
    fitted_rate: float | None
    fit_status: str = "fitted"  # or "exact" (all errors zero) or "insufficient" (< 3 positive errors)

    def write_records_csv(self, fh, decimal: bool = False) -> None:
        w = csv.writer(fh, lineterminator="\n")
        header = ["level", "alpha", "beta", "commodity", "node", "packet", "discrete_time", "continuous_time", "abs_error"]
        w.writerow(header + (["abs_error_decimal"] if decimal else []))
        for lv in self.levels:
            d = lv.discretization
            for r in sorted(lv.records, key=lambda r: (r.commodity, r.packet, r.continuous_time, r.node)):
                row = [lv.level, d.alpha, d.beta, r.commodity, r.node, r.packet, r.discrete_time, r.continuous_time, r.error]
                row = [str(x) for x in row]
                if decimal:
                    row.append(f"{float(r.error):.12g}")
                w.writerow(row)

    def write_summary_csv(self, fh, decimal: bool = False) -> None:
        w = csv.writer(fh, lineterminator="\n")
        header = ["level", "alpha", "beta", "max_arrival_error", "max_cumflow_error", "fitted_rate"]
        if decimal:
            header += ["max_arrival_error_decimal", "max_cumflow_error_decimal"]
        w.writerow(header)
        for k, lv in enumerate(self.levels):
            d = lv.discretization
            last = k == len(self.levels) - 1
            rate = "" if not last else (self.fit_status if self.fitted_rate is None else f"{self.fitted_rate:.6f}")
            row = [lv.level, d.alpha, d.beta, lv.max_arrival_error, lv.max_cumflow_error]
            row = [str(x) for x in row] + [rate]
            if decimal:
                row += [f"{float(lv.max_arrival_error):.12g}", f"{float(lv.max_cumflow_error):.12g}"]
            w.writerow(row)


def uniform_flow_error(G: PiecewiseLinear, F: PiecewiseLinear) -> Fraction:
    """Exact sup-norm distance of two bounded cumulative functions."""
    return sup_distance(G, F)


def fit_rate(alphas: Sequence, errors: Sequence) -> float | None:
    """Least-squares slope of log(error) against log(alpha); None if every error is zero."""
    pairs = [(float(a), float(e)) for a, e in zip(alphas, errors) if e > 0]
    if not pairs:
        if any(e < 0 for e in errors):
            raise ValueError("errors must be non-negative")
        return None
    if len(pairs) < 3:
        raise ValueError("need at least three levels with positive error")
    xs = [math.log(a) for a, _ in pairs]
    ys = [math.log(e) for _, e in pairs]
    return statistics.linear_regression(xs, ys).slope


def arrival_records(level: int, run: CoupledRun, flow: FlowOverTime) -> list[ErrorRecord]:
    sc = run.scenario
    beta = sc.discretization.beta
    out = []
    for c in sc.commodities:
        nodes = sc.network.path_nodes(c.path)
        for i in range(1, run.flows.packet_count(c.id) + 1):
            for v in nodes:
                out.append(
                    ErrorRecord(
                        level, c.id, v, i,
                        refined_arrival(run.flows, c.id, i, v),
                        flow.arrival_time(c.id, i * beta, v),
                    )
                )
    return out


def flow_errors(run: CoupledRun, flow: FlowOverTime) -> dict[tuple[str, str, str], Fraction]:
    out = {}
    for c in run.scenario.commodities:
        for arc_id in c.path:
            out[(c.id, arc_id, "in")] = uniform_flow_error(
                run.flows.cumulative_inflow(c.id, arc_id), flow.cumulative_inflow(c.id, arc_id)
            )
            out[(c.id, arc_id, "out")] = uniform_flow_error(
                run.flows.cumulative_outflow(c.id, arc_id), flow.cumulative_outflow(c.id, arc_id)
            )
    return out


def level_warnings(sc: Scenario, cfg: SweepConfig) -> list[str]:
    return sc.discretization.warnings(sc.network, sc.commodities, cfg.min_packet_capacity)


def run_sweep(scenario: Scenario, cfg: SweepConfig = SweepConfig(), *, flow: FlowOverTime | None = None) -> ConvergenceReport:
    """Compare the packet model at each level of ``cfg`` with the (level-independent) flow over time."""
    if flow is None:
        flow = load_network(scenario.network, scenario.commodities)
    levels = []
    for k, d in enumerate(cfg.discretizations()):
        sc = replace(scenario, discretization=d)
        notes = level_warnings(sc, cfg)
        for note in notes:
            log.warning("level %d (alpha=%s, beta=%s): %s", k, d.alpha, d.beta, note)
        try:
            run = couple(sc)
        except Exception as exc:
            raise RuntimeError(f"level {k} (alpha={d.alpha}, beta={d.beta}) failed: {exc}") from exc
        levels.append(LevelResult(k, d, arrival_records(k, run, flow), flow_errors(run, flow), notes))
    errors = [lv.max_arrival_error for lv in levels]
    if not any(errors):
        return ConvergenceReport(levels, None, "exact")
    try:
        return ConvergenceReport(levels, fit_rate([lv.discretization.alpha for lv in levels], errors))
    except ValueError:
        return ConvergenceReport(levels, None, "insufficient")


class WaitingBoundViolation(AssertionError):
    pass


def waiting_bound(flows: DiscreteFlowFunctions, arc_id: str) -> Fraction:
    arc = flows.network.arc(arc_id)
    kappa = rate_bound(flows.network, flows.commodities, arc_id)
    return 2 * flows.alpha + flows.alpha * kappa / arc.capacity + flows.beta / arc.capacity


def waiting_samples(flows: DiscreteFlowFunctions, arc_id: str, cid: str, full_grid: bool = False) -> list[Fraction]:
    """Refined entrance times of the commodity's packets plus grid points.

    By default only the grid points inside the steps in which the commodity
    enters the arc are used.  The gap between its waiting time and the total
    queue is only controlled there: once it has left, its waiting time is 0
    while other commodities may still keep the queue long.  ``full_grid``
    adds every grid point from 0 to the last departure from the arc.
    """
    arc = flows.network.arc(arc_id)
    n = flows.packet_count(cid)
    times = {refined_arrival(flows, cid, i, arc.tail) for i in range(1, n + 1)}
    if full_grid:
        end = flows.total_outflow(arc_id).end or ZERO
        windows = [(ZERO, end)]
    else:
        windows = [(a, b) for a, b, _ in flows.inflow[(cid, arc_id)].pieces()]
    for a, b in windows:
        k = math.ceil(a / flows.alpha)
        while k * flows.alpha <= b:
            times.add(k * flows.alpha)
            k += 1
    return sorted(times)


def check_waiting_bound(
    flows: DiscreteFlowFunctions, arc_id: str, cid: str, samples=None, full_grid: bool = False
) -> Fraction:
    """Check the packet waiting time against the total queue over capacity; return the smallest slack.

    Raises WaitingBoundViolation at the first sample where the gap exceeds
    ``2 alpha + alpha kappa / nu + beta / nu``.
    """
    stats = DiscreteQueueStats(flows, arc_id)
    bound = waiting_bound(flows, arc_id)
    total = stats.total_queue()
    nu = stats.arc.capacity
    worst = bound
    if samples is None:
        samples = waiting_samples(flows, arc_id, cid, full_grid)
    for theta in samples:
        gap = abs(stats.waiting_time(cid, theta) - total(theta + stats.delay) / nu)
        if gap > bound:
            raise WaitingBoundViolation(
                f"{cid} on {arc_id} at {theta}: |q - z/nu| = {gap} > {bound}"
            )
        worst = min(worst, bound - gap)
    return worst


@dataclass
class HypotheticalArcFlow:
    """Packet inflow rates pushed through the continuous arc dynamics."""

    arc_id: str
    dynamics: ArcDynamics
    inflow: dict[str, StepFunction]
    outflow: dict[str, StepFunction]

    def entrance_time(self, cid: str, phi) -> Fraction:
        return self.inflow[cid].integral().inverse_min(phi)

    def exit_time(self, cid: str, phi) -> Fraction:
        return self.outflow[cid].integral().inverse_min(phi)

    def predicted_exit_time(self, cid: str, phi) -> Fraction:
        return self.dynamics.exit_time(self.entrance_time(cid, phi))


def hypothetical_flow(flows: DiscreteFlowFunctions, arc_id: str) -> HypotheticalArcFlow:
    arc = flows.network.arc(arc_id)
    inflow = {c.id: flows.inflow[(c.id, arc_id)] for c in flows.commodities if arc_id in c.path}
    total = sum(inflow.values(), StepFunction())
    dyn = arc_outflow(total, arc.transit_time, arc.capacity)
    return HypotheticalArcFlow(arc_id, dyn, inflow, commodity_split(dyn, inflow))


def hypothetical_violations(flows: DiscreteFlowFunctions) -> list[str]:
    """Packets whose hypothetical entrance time differs from their refined entrance time."""
    problems = []
    for arc in flows.network.arcs:
        users = [c for c in flows.commodities if arc.id in c.path]
        if not users:
            continue
        hyp = hypothetical_flow(flows, arc.id)
        for c in users:
            for i in range(1, flows.packet_count(c.id) + 1):
                k_u = hyp.entrance_time(c.id, i * flows.beta)
                if k_u != refined_arrival(flows, c.id, i, arc.tail):
                    problems.append(f"{c.id}#{i} on {arc.id}: {k_u}")
                if hyp.exit_time(c.id, i * flows.beta) != hyp.predicted_exit_time(c.id, i * flows.beta):
                    problems.append(f"{c.id}#{i} on {arc.id}: hypothetical exit mismatch")
    return problems
