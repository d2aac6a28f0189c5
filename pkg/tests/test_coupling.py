import io
from fractions import Fraction as F

import pytest
from hypothesis import given

from packetflow.coupling import (
    DiscreteQueueStats,
    build_packets,
    couple,
    exit_identity_violations,
    extract_rates,
    position_in_step,
    refined_arrival,
)
from packetflow.discrete import EventLog, PacketId
from packetflow.model import Arc, Commodity, Discretization, Network, SupplyRate
from packetflow.scenario import Scenario
from conftest import scenarios

HALF, QUARTER = F(1, 2), F(1, 4)


def release_oracle(pieces, alpha, beta, count):
    """Oracle: scan grid points and integrate the supply directly."""
    def supplied(t):
        return sum(r * max(0, min(b, t) - a) for a, b, r in pieces)

    out = []
    for i in range(1, count + 1):
        k = 0
        while supplied(k * alpha) < i * beta:
            k += 1
        out.append(k * alpha)
    return tuple(out)


def commodity(*pieces):
    return Commodity("j", "o", "d", ("e",), SupplyRate(tuple(pieces)))


@pytest.mark.parametrize(
    "pieces, alpha, beta, expected",
    [
        (((0, 1, 1),), HALF, QUARTER, (HALF, HALF, 1, 1)),
        (((0, HALF, 2),), QUARTER, QUARTER, (QUARTER, QUARTER, HALF, HALF)),
    ],
)
def test_release_times(pieces, alpha, beta, expected):
    assert release_oracle(pieces, alpha, beta, len(expected)) == expected
    assert build_packets(commodity(*pieces), alpha, beta).release_times == expected


def test_packet_count_floors_the_mass():
    ps = build_packets(commodity((0, F(11, 10), 1)), HALF, QUARTER)
    assert ps.count == 4


@given(scenarios)
def test_release_times_match_grid_scan(sc):
    d = sc.discretization
    for c in sc.commodities:
        ps = build_packets(c, d.alpha, d.beta)
        assert ps.count * d.beta <= c.supply.mass < (ps.count + 1) * d.beta
        assert ps.release_times == release_oracle(c.supply.pieces, d.alpha, d.beta, ps.count)


def staggered_entry_log():
    """Eight packets entering one arc: 2, 1, 4 and 1 of them in steps 1 to 4."""
    ids = [PacketId("j", i) for i in range(1, 9)]
    entered = {"e": {1: ids[0:2], 2: ids[2:3], 3: ids[3:7], 4: ids[7:8]}}
    log = EventLog(entered, {"e": {}}, {}, {})
    net = Network(("o", "d"), (Arc("e", "o", "d", 1, 1),))
    return extract_rates(log, net, [commodity((0, 2, 1))], HALF, QUARTER)


def test_staggered_entry_rates_and_cumulative_values():
    flows = staggered_entry_log()
    g = flows.inflow[("j", "e")]
    assert g.left_value(F(3, 2)) == 2 and g.left_value(F(5, 4)) == 2
    G = flows.cumulative_inflow("j", "e")
    assert [G(x) for x in (HALF, 1, F(3, 2), 2)] == [HALF, F(3, 4), F(7, 4), 2]


def test_staggered_entry_refined_times_and_positions():
    flows = staggered_entry_log()
    g = flows.inflow[("j", "e")]
    G = flows.cumulative_inflow("j", "e")
    assert refined_arrival(flows, "j", 5, "o") == F(5, 4)
    assert position_in_step(F(5, 4), g, HALF, QUARTER) == 2
    t4 = refined_arrival(flows, "j", 4, "o")
    assert t4 == F(9, 8)
    # oracle: G reaches 4 beta exactly there and not a hair earlier
    assert G(t4) == 4 * QUARTER and G(t4 - F(1, 10**9)) < 4 * QUARTER
    t7 = refined_arrival(flows, "j", 7, "o")
    assert t7 == F(3, 2) and position_in_step(t7, g, HALF, QUARTER) == 4
    assert refined_arrival(flows, "j", 3, "o") == 1 and position_in_step(1, g, HALF, QUARTER) == 1


def test_refined_arrival_rejects_bad_index():
    with pytest.raises(ValueError):
        refined_arrival(staggered_entry_log(), "j", 9, "o")


def test_position_must_be_integral():
    with pytest.raises(AssertionError):
        position_in_step(F(21, 16), staggered_entry_log().inflow[("j", "e")], HALF, QUARTER)


def three_packets():
    net = Network(("o", "d"), (Arc("e", "o", "d", 1, 1),))
    c = Commodity("j", "o", "d", ("e",), SupplyRate(((0, 1, 3),)))
    return couple(Scenario(net, (c,), Discretization(1, 1)))


def test_three_packet_queue_statistics():
    run = three_packets()
    # released at step 1, leaving in steps 2, 3, 4
    assert [run.log.arrival[PacketId("j", i)] for i in (1, 2, 3)] == [2, 3, 4]
    stats = DiscreteQueueStats(run.flows, "e")
    z = stats.commodity_queue("j")
    assert [z(t) for t in (1, 2, 3, 4)] == [0, 2, 1, 0]
    assert stats.waiting_time("j", 1) == 2
    assert [refined_arrival(run.flows, "j", i, "o") for i in (1, 2, 3)] == [F(1, 3), F(2, 3), 1]
    for i in (1, 2, 3):
        enter = refined_arrival(run.flows, "j", i, "o")
        assert stats.exit_time("j", enter) == refined_arrival(run.flows, "j", i, "d") == i + 1


def test_no_congestion_means_no_wait():
    net = Network(("o", "d"), (Arc("e", "o", "d", F(3, 4), 4),))
    c = Commodity("j", "o", "d", ("e",), SupplyRate(((0, 1, 1),)))
    run = couple(Scenario(net, (c,), Discretization(HALF, QUARTER)))
    stats = DiscreteQueueStats(run.flows, "e")
    for k in range(6):
        assert stats.commodity_queue("j")(k * HALF) == 0
        assert stats.exit_time("j", k * HALF) == k * HALF + 1


def test_refined_csv_columns():
    buf = io.StringIO()
    three_packets().write_refined_csv(buf)
    rows = buf.getvalue().splitlines()
    assert rows[0] == "commodity,packet,node,refined_time,step,position"
    assert "j,1,o,1/3,1,1" in rows and "j,3,d,4,4,1" in rows


@given(scenarios)
def test_exit_time_identity(sc):
    assert exit_identity_violations(couple(sc).flows) == []


@given(scenarios)
def test_refined_times_agree_with_the_log(sc):
    run = couple(sc)
    d = sc.discretization
    for c in sc.commodities:
        n = run.flows.packet_count(c.id)
        for arc_id in c.path:
            G_in, G_out = run.flows.cumulative_inflow(c.id, arc_id), run.flows.cumulative_outflow(c.id, arc_id)
            assert G_in.final_value == G_out.final_value == n * d.beta
        for v in sc.network.path_nodes(c.path):
            times = [refined_arrival(run.flows, c.id, i, v) for i in range(1, n + 1)]
            assert times == sorted(set(times))
            by_step = {}
            rate = run.flows.node_rate(c.id, v)
            for i, t in enumerate(times, start=1):
                step = -((-t) // d.alpha)
                by_step.setdefault(step, []).append(position_in_step(t, rate, d.alpha, d.beta))
                arc = c.path[0] if v == c.origin else next(a for a in c.path if sc.network.arc(a).head == v)
                table = run.log.entrance_steps(arc) if v == c.origin else run.log.exit_steps(arc)
                assert table[PacketId(c.id, i)] == step
            for positions in by_step.values():
                assert positions == list(range(1, len(positions) + 1))


@given(scenarios)
def test_grid_values_count_packets(sc):
    run = couple(sc)
    d = sc.discretization
    for c in sc.commodities:
        arc = c.path[0]
        G = run.flows.cumulative_inflow(c.id, arc)
        entered = run.log.entrance_steps(arc)
        for t in range(run.log.steps + 1):
            count = sum(1 for p, s in entered.items() if p.commodity == c.id and s <= t)
            assert G(t * d.alpha) == count * d.beta
