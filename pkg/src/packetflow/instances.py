"""Ready-made scenarios: fixed test instances and a seeded random generator."""

from __future__ import annotations

import random
from fractions import Fraction

from .model import Arc, Commodity, Discretization, Network, SupplyRate
from .scenario import Scenario


def single_arc_burst(alpha=Fraction(1, 2), beta=Fraction(1, 4)) -> Scenario:
    """One arc (transit 1, capacity 1) fed at rate 2 during [0, 1)."""
    net = Network(("o", "d"), (Arc("e", "o", "d", 1, 1),))
    c = Commodity("j", "o", "d", ("e",), SupplyRate(((0, 1, 2),)))
    return Scenario(net, (c,), Discretization(alpha, beta))


def merge_bottleneck(alpha=Fraction(1, 2), beta=Fraction(1, 4)) -> Scenario:
    """Two sources merging into a capacity-1 arc that both commodities overload together."""
    net = Network(
        ("o1", "o2", "m", "d"),
        (
            Arc("a1", "o1", "m", 1, 2, 0),
            Arc("a2", "o2", "m", 1, 2, 1),
            Arc("b", "m", "d", 1, 1, 2),
        ),
    )
    commodities = (
        Commodity("c1", "o1", "d", ("a1", "b"), SupplyRate(((0, 2, 1),))),
        Commodity("c2", "o2", "d", ("a2", "b"), SupplyRate(((Fraction(1, 2), 2, 1),))),
    )
    return Scenario(net, commodities, Discretization(alpha, beta))


def random_scenario(seed: int, *, max_nodes: int = 6, max_commodities: int = 3) -> Scenario:
    """Small random DAG scenario with rational data; deterministic in ``seed``.

    Every commodity gets its own increasing node sequence as path, so paths
    overlap often enough to produce merges and shared queues.
    """
    rng = random.Random(seed)
    n = rng.randint(2, max_nodes)
    nodes = tuple(f"v{k}" for k in range(n))
    arcs: dict[tuple[int, int], Arc] = {}

    def arc(u: int, w: int) -> str:
        if (u, w) not in arcs:
            aid = f"e{u}{w}"
            arcs[(u, w)] = Arc(
                aid,
                nodes[u],
                nodes[w],
                Fraction(rng.randint(1, 8), 4),
                Fraction(rng.randint(1, 6), 2),
                len(arcs),
            )
        return arcs[(u, w)].id

    commodities = []
    for k in range(rng.randint(1, max_commodities)):
        start = rng.randint(0, n - 2)
        end = rng.randint(start + 1, n - 1)
        middle = sorted(rng.sample(range(start + 1, end), rng.randint(0, end - start - 1)))
        seq = [start, *middle, end]
        path = tuple(arc(u, w) for u, w in zip(seq, seq[1:]))
        pieces = []
        t = Fraction(rng.randint(0, 4), 4)
        for _ in range(rng.randint(1, 2)):
            length = Fraction(rng.randint(1, 4), 4)
            pieces.append((t, t + length, Fraction(rng.randint(1, 6), 2)))
            t += length + Fraction(rng.randint(0, 2), 4)
        commodities.append(Commodity(f"c{k}", nodes[start], nodes[end], path, SupplyRate(tuple(pieces))))
    alpha = rng.choice((Fraction(1, 2), Fraction(1, 3), Fraction(1, 4)))
    beta = alpha / rng.randint(2, 4)
    ordered = tuple(arcs[key] for key in sorted(arcs, key=lambda key: arcs[key].merge_priority))
    return Scenario(Network(nodes, ordered), tuple(commodities), Discretization(alpha, beta))
