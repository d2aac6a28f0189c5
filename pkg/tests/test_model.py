import json
from fractions import Fraction as F

import pytest
from hypothesis import given

from packetflow.game import builtin_no_pne
from packetflow.model import (
    Arc,
    Commodity,
    Discretization,
    Network,
    SupplyRate,
    ceil_to_grid,
    discretize,
    floor_to_grid,
    rate_bound,
)
from packetflow.scenario import (
    ScenarioError,
    dumps_scenario,
    loads_scenario,
    scenario_to_document,
    validate_scenario,
)
from conftest import fractions, positive_fractions, scenarios


def grid_neighbours(x, step, upto=40):
    """Oracle: scan multiples of ``step`` for the ones bracketing ``x``."""
    grid = [k * step for k in range(upto)]
    return max(g for g in grid if g <= x), min(g for g in grid if g >= x)


def test_rounding_examples():
    assert floor_to_grid(F("2.3"), F("0.5")) == 2
    assert ceil_to_grid(F("2.3"), F("0.5")) == F(5, 2)
    assert ceil_to_grid(2, F(1, 2)) == 2


def test_ceil_of_one_third_on_quarter_grid():
    assert grid_neighbours(F(1, 3), F(1, 4))[1] == F(1, 2)
    assert ceil_to_grid(F(1, 3), F(1, 4)) == F(1, 2)


def test_rounding_rejects_negative_input():
    with pytest.raises(ValueError):
        floor_to_grid(-1, 1)
    with pytest.raises(ValueError):
        ceil_to_grid(1, 0)


@given(fractions(0, 8), positive_fractions(2))
def test_rounding_brackets(x, step):
    lo, hi = floor_to_grid(x, step), ceil_to_grid(x, step)
    assert (lo, hi) == grid_neighbours(x, step, upto=int(x / step) + 3)
    assert lo <= x <= hi and x - lo < step and hi - x < step
    assert (lo / step).denominator == 1 and (hi / step).denominator == 1
    assert floor_to_grid(lo, step) == lo and ceil_to_grid(hi, step) == hi


def two_node(tau, nu):
    return Network(("o", "d"), (Arc("e", "o", "d", tau, nu),))


@pytest.mark.parametrize(
    "tau, nu, alpha, beta, steps, cap",
    [
        ("2.3", 1, "0.5", 1, 5, F(1, 2)),
        (1, 1, 1, 1, 1, 1),
        (1, 1, "0.5", "0.2", 2, F(5, 2)),
    ],
)
def test_discretize_examples(tau, nu, alpha, beta, steps, cap):
    (d,) = discretize(two_node(F(tau), F(nu)), Discretization(F(alpha), F(beta)))
    assert d.steps == steps and d.capacity == cap


@given(scenarios)
def test_discretize_is_exact(sc):
    d = sc.discretization
    for arc, da in zip(sc.network.arcs, discretize(sc.network, d)):
        assert d.beta * da.capacity == d.alpha * arc.capacity
        assert d.alpha * da.steps == ceil_to_grid(arc.transit_time, d.alpha)


def test_rate_bound_examples():
    net = two_node(1, 1)
    c = Commodity("j", "o", "d", ("e",), SupplyRate(((0, 1, 1),)))
    assert rate_bound(net, [c], "e") == 2

    net = Network(
        ("a", "b", "u", "v"),
        (Arc("x", "a", "u", 1, 1), Arc("y", "b", "u", 1, 2), Arc("e", "u", "v", 1, 1)),
    )
    assert rate_bound(net, [], "e") == 5
    assert rate_bound(two_node(1, 3), [], "e") == 4


@given(scenarios)
def test_rate_bound_exceeds_capacity(sc):
    for arc in sc.network.arcs:
        assert rate_bound(sc.network, sc.commodities, arc.id) >= arc.capacity + 1


def test_supply_rate_mass_and_peak():
    u = SupplyRate(((0, 1, 2), (F(3, 2), 2, 1)))
    assert u.mass == F(5, 2) and u.max_rate == 2
    assert u.cumulative(F(7, 4)) == F(9, 4)


def test_warnings_flag_coarse_discretizations():
    net = two_node(1, 1)
    c = Commodity("j", "o", "d", ("e",), SupplyRate(((0, 1, 1),)))
    notes = Discretization(1, 1).warnings(net, [c])
    assert any("beta/alpha" in n for n in notes)
    assert any("packet capacity" in n for n in notes)
    assert Discretization(1, F(1, 4)).warnings(net, [c]) == []


def doc(**over):
    base = {
        "nodes": ["o", "m", "d"],
        "arcs": [
            {"id": "a", "from": "o", "to": "m", "transit_time": "1", "capacity": "2"},
            {"id": "b", "from": "m", "to": "d", "transit_time": "1/2", "capacity": "1"},
        ],
        "commodities": [
            {"id": "j", "origin": "o", "destination": "d", "path": ["a", "b"],
             "supply": [{"start": "0", "end": "1.5", "rate": "2"}]}
        ],
        "discretization": {"alpha": "1/4", "beta": "1/16"},
    }
    base.update(over)
    return base


def test_valid_document_parses_exactly():
    sc = validate_scenario(doc())
    assert sc.network.arc("b").transit_time == F(1, 2)
    assert sc.commodities[0].supply.mass == 3
    assert [a.merge_priority for a in sc.network.arcs] == [0, 1]


def test_zero_transit_time_is_reported():
    d = doc()
    d["arcs"][0]["transit_time"] = "0"
    with pytest.raises(ScenarioError) as err:
        validate_scenario(d)
    assert ("$.arcs[0].transit_time", "transit time must be positive") in err.value.diagnostics


def test_path_revisiting_a_node_is_reported():
    d = doc()
    d["nodes"] = ["o", "m", "d"]
    d["arcs"].append({"id": "c", "from": "m", "to": "o", "transit_time": "1", "capacity": "1"})
    d["arcs"].append({"id": "f", "from": "o", "to": "d", "transit_time": "1", "capacity": "1"})
    d["commodities"][0]["path"] = ["a", "c", "f"]
    with pytest.raises(ScenarioError) as err:
        validate_scenario(d)
    assert any(msg == "path not simple" for _, msg in err.value.diagnostics)


def test_every_problem_gets_its_own_diagnostic():
    d = doc()
    d["arcs"][0]["capacity"] = "-1"
    d["arcs"][1]["to"] = "nowhere"
    d["commodities"][0]["supply"][0]["rate"] = "x"
    with pytest.raises(ScenarioError) as err:
        validate_scenario(d)
    paths = {p for p, _ in err.value.diagnostics}
    assert {"$.arcs[0].capacity", "$.arcs[1].to", "$.commodities[0].supply[0].rate"} <= paths


def test_json_floats_are_read_exactly():
    text = json.dumps(doc()).replace('"1.5"', "1.5").replace('"1/16"', "0.0625")
    sc = loads_scenario(text)
    assert sc.discretization.beta == F(1, 16)
    assert sc.commodities[0].supply.pieces[0][1] == F(3, 2)


def test_builtin_instance_validates_and_round_trips():
    sc = builtin_no_pne()
    again = validate_scenario(scenario_to_document(sc))
    assert again == sc
    assert loads_scenario(dumps_scenario(sc)) == sc


@given(scenarios)
def test_random_scenarios_round_trip(sc):
    assert loads_scenario(dumps_scenario(sc)) == sc
