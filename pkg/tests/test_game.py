import io
from fractions import Fraction as F

import pytest

from packetflow.game import (
    EVADER,
    PURSUER,
    PathCapExceeded,
    best_response,
    builtin_no_pne,
    enumerate_simple_paths,
    epsilon_check,
    evaluate_profile,
    exhaustive_pne_search,
    route,
    strategy_sets,
)
from packetflow.model import Arc, Commodity, Discretization, Network, SupplyRate
from packetflow.scenario import Scenario


@pytest.fixture(scope="module")
def nopne():
    return builtin_no_pne()


def profile(sc, p, e):
    return {PURSUER: route(sc, PURSUER, p), EVADER: route(sc, EVADER, e)}


def test_parallel_arcs_and_diamond():
    par = Network(("o", "d"), (Arc("b", "o", "d", 1, 1), Arc("a", "o", "d", 1, 1)))
    assert enumerate_simple_paths(par, "o", "d") == [("a",), ("b",)]
    dia = Network(
        ("o", "a", "b", "d"),
        (Arc("oa", "o", "a", 1, 1), Arc("ob", "o", "b", 1, 1), Arc("ad", "a", "d", 1, 1), Arc("bd", "b", "d", 1, 1)),
    )
    assert enumerate_simple_paths(dia, "o", "d") == [("oa", "ad"), ("ob", "bd")]
    with pytest.raises(ValueError):
        enumerate_simple_paths(dia, "d", "o")
    with pytest.raises(PathCapExceeded):
        enumerate_simple_paths(dia, "o", "d", cap=1)


def test_strategy_counts(nopne):
    sizes = {p: len(paths) for p, paths in strategy_sets(nopne).items()}
    assert sizes == {PURSUER: 2, EVADER: 2, "player3": 1, "player4": 1, "player5": 1, "player6": 1}


@pytest.mark.parametrize(
    "p, e, costs",
    [("top", "top", (5, 6)), ("top", "bottom", (6, 5)), ("bottom", "bottom", (5, 6)), ("bottom", "top", (6, 5))],
)
def test_payoffs(nopne, p, e, costs):
    c = evaluate_profile(nopne, profile(nopne, p, e))
    assert (c[PURSUER], c[EVADER]) == costs


def test_best_responses_form_matching_pennies(nopne):
    path, cost = best_response(nopne, profile(nopne, "top", "top"), EVADER)
    assert path == route(nopne, EVADER, "bottom") and cost == 5
    path, cost = best_response(nopne, profile(nopne, "top", "bottom"), PURSUER)
    assert path == route(nopne, PURSUER, "bottom") and cost == 5


@pytest.mark.parametrize("p", ["top", "bottom"])
@pytest.mark.parametrize("e", ["top", "bottom"])
def test_every_profile_is_exactly_a_one_equilibrium(nopne, p, e):
    assert epsilon_check(nopne, profile(nopne, p, e), 1).is_equilibrium
    assert not epsilon_check(nopne, profile(nopne, p, e), F(1, 2)).is_equilibrium


def test_no_pure_equilibrium(nopne):
    assert exhaustive_pne_search(nopne) == []


def one_packet(cid, o, d, path, start=0):
    return Commodity(cid, o, d, path, SupplyRate(((start, start + 1, 1),)))


def test_single_player_best_path_is_an_equilibrium():
    net = Network(("o", "d"), (Arc("slow", "o", "d", 3, 1), Arc("fast", "o", "d", 1, 1)))
    sc = Scenario(net, (one_packet("p", "o", "d", ("slow",)),), Discretization(1, 1))
    report = epsilon_check(sc)
    assert not report.is_equilibrium and report.max_improvement == 2
    assert exhaustive_pne_search(sc) == [{"p": ("fast",)}]
    assert epsilon_check(sc, {"p": ("fast",)}).is_equilibrium


def test_independent_players_combine_optima():
    net = Network(
        ("o1", "d1", "o2", "d2"),
        (Arc("a", "o1", "d1", 2, 1), Arc("b", "o1", "d1", 1, 1), Arc("c", "o2", "d2", 1, 1), Arc("e", "o2", "d2", 3, 1)),
    )
    sc = Scenario(net, (one_packet("p", "o1", "d1", ("a",)), one_packet("q", "o2", "d2", ("e",))), Discretization(1, 1))
    assert exhaustive_pne_search(sc) == [{"p": ("b",), "q": ("c",)}]


def test_release_time_must_sit_on_the_grid():
    net = Network(("o", "d"), (Arc("x", "o", "d", 1, 1),))
    sc = Scenario(net, (one_packet("p", "o", "d", ("x",), start=F(1, 2)),), Discretization(1, 1))
    with pytest.raises(ValueError):
        evaluate_profile(sc)


def test_player_must_be_one_packet():
    net = Network(("o", "d"), (Arc("x", "o", "d", 1, 1),))
    c = Commodity("p", "o", "d", ("x",), SupplyRate(((0, 2, 1),)))
    with pytest.raises(ValueError):
        evaluate_profile(Scenario(net, (c,), Discretization(1, 1)))


def test_report_csv(nopne):
    buf = io.StringIO()
    epsilon_check(nopne, profile(nopne, "top", "top"), F(1, 2)).write_csv(buf)
    rows = buf.getvalue().splitlines()
    assert rows[0] == "player,current_cost,best_deviation_path,best_cost,improvement,verdict_at_epsilon"
    assert rows[2].startswith("player2,6,") and rows[2].endswith(",5,1,improvable")


def test_epsilon_check_is_monotone(nopne):
    pr = profile(nopne, "bottom", "top")
    verdicts = [epsilon_check(nopne, pr, F(k, 4)).is_equilibrium for k in range(9)]
    assert verdicts == sorted(verdicts)
