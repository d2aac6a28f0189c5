"""Packet routing games: each commodity is one player sending a single packet.

A player's cost is its arrival time (grid step times alpha) under the packet
model, given everyone's chosen path.
"""

from __future__ import annotations

import csv
import itertools
from dataclasses import dataclass, replace
from fractions import Fraction
from typing import Mapping

from .discrete import Packet, PacketId, network_loading
from .model import Arc, Commodity, Discretization, Network, SupplyRate, discretize
from .piecewise import as_fraction
from .scenario import Scenario

Path = tuple[str, ...]
Profile = dict[str, Path]


class PathCapExceeded(RuntimeError):
    pass


def enumerate_simple_paths(net: Network, origin: str, destination: str, cap: int = 1000) -> list[Path]:
    """All simple origin-destination paths, sorted lexicographically by arc id."""
    out: list[Path] = []

    def dfs(v: str, visited: set[str], path: list[str]):
        if v == destination:
            out.append(tuple(path))
            if len(out) > cap:
                raise PathCapExceeded(f"more than {cap} paths from {origin} to {destination}")
            return
        for arc in sorted(net.outgoing(v), key=lambda a: a.id):
            if arc.head not in visited:
                visited.add(arc.head)
                path.append(arc.id)
                dfs(arc.head, visited, path)
                path.pop()
                visited.remove(arc.head)

    dfs(origin, {origin}, [])
    if not out:
        raise ValueError(f"{destination} is not reachable from {origin}")
    return sorted(out)


def _release_step(c: Commodity, alpha: Fraction) -> int:
    start = c.supply.support_start
    step = start / alpha
    if step.denominator != 1:
        raise ValueError(f"player {c.id}: release time {start} is not on the alpha grid")
    return int(step)


def players(scenario: Scenario) -> list[Commodity]:
    """The scenario's commodities, each checked to amount to exactly one packet."""
    beta = scenario.discretization.beta
    for c in scenario.commodities:
        if c.supply.mass // beta != 1:
            raise ValueError(f"player {c.id}: supply {c.supply.mass} is not a single packet of size {beta}")
    return list(scenario.commodities)


def current_profile(scenario: Scenario) -> Profile:
    return {c.id: c.path for c in scenario.commodities}


def evaluate_profile(scenario: Scenario, profile: Mapping[str, Path] | None = None) -> dict[str, Fraction]:
    """Arrival time of every player when each follows its path in ``profile``."""
    alpha = scenario.discretization.alpha
    profile = {**current_profile(scenario), **(profile or {})}
    packets = [
        Packet(PacketId(c.id, 1), tuple(profile[c.id]), _release_step(c, alpha), (c.id, 1))
        for c in players(scenario)
    ]
    log = network_loading(scenario.network, discretize(scenario.network, scenario.discretization), packets)
    return {p.id.commodity: alpha * log.arrival[p.id] for p in packets}


def best_response(scenario: Scenario, profile: Mapping[str, Path], player: str, cap: int = 1000) -> tuple[Path, Fraction]:
    """Cheapest path for ``player`` against the others' paths; ties go to the first path in order."""
    c = scenario.commodity(player)
    best = None
    for path in enumerate_simple_paths(scenario.network, c.origin, c.destination, cap):
        cost = evaluate_profile(scenario, {**profile, player: path})[player]
        if best is None or cost < best[1]:
            best = (path, cost)
    return best


@dataclass(frozen=True)
class PlayerVerdict:
    player: str
    current_cost: Fraction
    best_path: Path
    best_cost: Fraction

    @property
    def improvement(self) -> Fraction:
        return self.current_cost - self.best_cost


@dataclass(frozen=True)
class EquilibriumReport:
    epsilon: Fraction
    profile: Profile
    players: tuple[PlayerVerdict, ...]

    @property
    def max_improvement(self) -> Fraction:
        return max(p.improvement for p in self.players)

    @property
    def is_equilibrium(self) -> bool:
        return self.max_improvement <= self.epsilon

    def write_csv(self, fh) -> None:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["player", "current_cost", "best_deviation_path", "best_cost", "improvement", "verdict_at_epsilon"])
        for p in sorted(self.players, key=lambda p: p.player):
            ok = p.improvement <= self.epsilon
            w.writerow([p.player, p.current_cost, " ".join(p.best_path), p.best_cost, p.improvement, "ok" if ok else "improvable"])


def epsilon_check(scenario: Scenario, profile: Mapping[str, Path] | None = None, epsilon=0, cap: int = 1000) -> EquilibriumReport:
    """Can any player arrive more than ``epsilon`` earlier by switching path alone?"""
    profile = {**current_profile(scenario), **(profile or {})}
    costs = evaluate_profile(scenario, profile)
    verdicts = []
    for c in players(scenario):
        path, cost = best_response(scenario, profile, c.id, cap)
        verdicts.append(PlayerVerdict(c.id, costs[c.id], path, cost))
    return EquilibriumReport(as_fraction(epsilon), profile, tuple(verdicts))


def strategy_sets(scenario: Scenario, cap: int = 1000) -> dict[str, list[Path]]:
    return {
        c.id: enumerate_simple_paths(scenario.network, c.origin, c.destination, cap)
        for c in players(scenario)
    }


def exhaustive_pne_search(scenario: Scenario, cap: int = 1000, profile_cap: int = 100_000) -> list[Profile]:
    """Every pure Nash equilibrium, in lexicographic profile order."""
    sets = strategy_sets(scenario, cap)
    size = 1
    for paths in sets.values():
        size *= len(paths)
    if size > profile_cap:
        raise PathCapExceeded(f"{size} profiles exceed the cap of {profile_cap}")
    ids = list(sets)
    found = []
    for combo in itertools.product(*(sets[i] for i in ids)):
        profile = dict(zip(ids, combo))
        if epsilon_check(scenario, profile, 0, cap).is_equilibrium:
            found.append(profile)
    return found


PURSUER, EVADER = "player1", "player2"


def builtin_no_pne() -> Scenario:
    """Six-player instance without a pure Nash equilibrium.

    A pursuer and an evader each pick a top or a bottom route.  Four
    single-route players cross between the two routes on prioritized long
    arcs, so the pursuer gains from matching the evader's route and the evader
    from avoiding it.
    """
    arcs = []

    def add(tail, head, tau, priority=1):
        arcs.append(Arc(f"{tail}-{head}", tail, head, tau, 1, priority))

    for o, a, b, c, d in (
        ("oP", "v1", "v2", "d3", "dP"),
        ("oP", "v3", "v4", "d4", "dP"),
        ("oE", "v5", "v6", "d5", "dE"),
        ("oE", "v7", "v8", "d6", "dE"),
    ):
        add(o, a, 1)
        add(a, b, 2)
        add(b, c, 1)
        add(c, d, 1)
    add("v5", "v2", 2, 0)
    add("v1", "v6", 1, 0)
    add("v7", "v4", 2, 0)
    add("v3", "v8", 1, 0)
    nodes = ("oP", "oE", "v1", "v2", "v3", "v4", "v5", "v6", "v7", "v8", "d3", "d4", "d5", "d6", "dP", "dE")
    net = Network(nodes, tuple(arcs))
    one = SupplyRate(((0, 1, 1),))

    def player(pid, route):
        return Commodity(pid, route[0], route[-1], tuple(f"{u}-{v}" for u, v in zip(route, route[1:])), one)

    commodities = (
        player(PURSUER, ("oP", "v1", "v2", "d3", "dP")),
        player(EVADER, ("oE", "v5", "v6", "d5", "dE")),
        player("player3", ("oE", "v5", "v2", "d3")),
        player("player4", ("oE", "v7", "v4", "d4")),
        player("player5", ("oP", "v1", "v6", "d5")),
        player("player6", ("oP", "v3", "v8", "d6")),
    )
    return Scenario(net, commodities, Discretization(1, 1))


def route(scenario: Scenario, player: str, side: str) -> Path:
    """``"top"`` or ``"bottom"`` path of the pursuer or evader in the built-in instance."""
    top, bottom = enumerate_simple_paths(scenario.network, scenario.commodity(player).origin, scenario.commodity(player).destination)
    return {"top": top, "bottom": bottom}[side]
