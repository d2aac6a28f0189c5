"""Scenario documents: JSON-compatible dicts <-> validated model objects."""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path

from .model import Arc, Commodity, Discretization, Network, SupplyRate
from .piecewise import as_fraction


class ScenarioError(ValueError):
    """Raised with one ``(path, message)`` diagnostic per violated invariant."""

    def __init__(self, diagnostics: list[tuple[str, str]]):
        self.diagnostics = diagnostics
        super().__init__("; ".join(f"{p}: {m}" for p, m in diagnostics))


@dataclass(frozen=True)
class Scenario:
    network: Network
    commodities: tuple[Commodity, ...]
    discretization: Discretization

    def commodity(self, cid: str) -> Commodity:
        for c in self.commodities:
            if c.id == cid:
                return c
        raise KeyError(cid)

    def warnings(self) -> list[str]:
        return self.discretization.warnings(self.network, self.commodities)


def _number(value, path, diags, *, positive=False, nonneg=False):
    if isinstance(value, float):
        # json floats are decoded through parse_float, so this is a Python caller
        value = str(value)
    try:
        x = as_fraction(value)
    except (TypeError, ValueError, ZeroDivisionError):
        diags.append((path, f"not an exact number: {value!r}"))
        return None
    if positive and x <= 0:
        diags.append((path, "must be positive"))
    if nonneg and x < 0:
        diags.append((path, "must be non-negative"))
    return x


def validate_scenario(doc: dict) -> Scenario:
    """Check every invariant of ``doc`` and build the model, or raise ScenarioError."""
    diags: list[tuple[str, str]] = []
    if not isinstance(doc, dict):
        raise ScenarioError([("$", "scenario must be an object")])
    for key in ("nodes", "arcs", "commodities", "discretization"):
        if key not in doc:
            diags.append((f"$.{key}", "missing"))
    if diags:
        raise ScenarioError(diags)

    nodes = [str(v) for v in doc["nodes"]]
    if len(set(nodes)) != len(nodes):
        diags.append(("$.nodes", "node ids must be unique"))

    arcs: list[Arc] = []
    seen: set[str] = set()
    for k, a in enumerate(doc["arcs"]):
        p = f"$.arcs[{k}]"
        aid = str(a.get("id", ""))
        if not aid:
            diags.append((f"{p}.id", "missing"))
        elif aid in seen:
            diags.append((f"{p}.id", f"duplicate arc id {aid!r}"))
        seen.add(aid)
        tail, head = str(a.get("from")), str(a.get("to"))
        for end, name in ((tail, "from"), (head, "to")):
            if end not in nodes:
                diags.append((f"{p}.{name}", f"unknown node {end!r}"))
        tau = _number(a.get("transit_time"), f"{p}.transit_time", diags)
        if tau is not None and tau <= 0:
            diags.append((f"{p}.transit_time", "transit time must be positive"))
        nu = _number(a.get("capacity"), f"{p}.capacity", diags)
        if nu is not None and nu <= 0:
            diags.append((f"{p}.capacity", "capacity must be positive"))
        prio = a.get("merge_priority", k)
        if not isinstance(prio, int) or isinstance(prio, bool):
            diags.append((f"{p}.merge_priority", "must be an integer"))
        if not diags:
            arcs.append(Arc(aid, tail, head, tau, nu, prio))

    by_id = {str(a.get("id")): a for a in doc["arcs"]}
    commodities: list[Commodity] = []
    cids: set[str] = set()
    for k, c in enumerate(doc["commodities"]):
        p = f"$.commodities[{k}]"
        cid = str(c.get("id", ""))
        if not cid:
            diags.append((f"{p}.id", "missing"))
        elif cid in cids:
            diags.append((f"{p}.id", f"duplicate commodity id {cid!r}"))
        cids.add(cid)
        origin, dest = str(c.get("origin")), str(c.get("destination"))
        path = [str(x) for x in c.get("path", [])]
        _check_path(path, origin, dest, by_id, f"{p}.path", diags)
        pieces = []
        for m, piece in enumerate(c.get("supply", [])):
            q = f"{p}.supply[{m}]"
            a = _number(piece.get("start"), f"{q}.start", diags, nonneg=True)
            b = _number(piece.get("end"), f"{q}.end", diags)
            r = _number(piece.get("rate"), f"{q}.rate", diags, nonneg=True)
            if a is not None and b is not None and b <= a:
                diags.append((q, "end must exceed start"))
            pieces.append((a, b, r))
        ordered = sorted((pc for pc in pieces if None not in pc), key=lambda pc: pc[0])
        for (_, b, _), (a, _, _) in zip(ordered, ordered[1:]):
            if a < b:
                diags.append((f"{p}.supply", "supply pieces overlap"))
        if not diags:
            supply = SupplyRate(tuple(pieces))
            if supply.mass <= 0:
                diags.append((f"{p}.supply", "total supply must be positive"))
            commodities.append(Commodity(cid, origin, dest, tuple(path), supply))

    disc = doc["discretization"]
    alpha = _number(disc.get("alpha"), "$.discretization.alpha", diags, positive=True)
    beta = _number(disc.get("beta"), "$.discretization.beta", diags, positive=True)

    if diags:
        raise ScenarioError(diags)
    return Scenario(Network(tuple(nodes), tuple(arcs)), tuple(commodities), Discretization(alpha, beta))


def _check_path(path, origin, dest, arcs_by_id, p, diags):
    if not path:
        diags.append((p, "path is empty"))
        return
    missing = [a for a in path if a not in arcs_by_id]
    if missing:
        diags.append((p, f"unknown arcs {missing}"))
        return
    first, last = arcs_by_id[path[0]], arcs_by_id[path[-1]]
    if str(first.get("from")) != origin:
        diags.append((p, "path does not start at the origin"))
    if str(last.get("to")) != dest:
        diags.append((p, "path does not end at the destination"))
    for k, (a, b) in enumerate(zip(path, path[1:])):
        if str(arcs_by_id[a].get("to")) != str(arcs_by_id[b].get("from")):
            diags.append((f"{p}[{k + 1}]", "arcs are not consecutive"))
    visited = [str(first.get("from"))] + [str(arcs_by_id[a].get("to")) for a in path]
    if len(set(visited)) != len(visited):
        diags.append((p, "path not simple"))


def _fmt(x: Fraction) -> str:
    return str(x)


def scenario_to_document(sc: Scenario) -> dict:
    return {
        "nodes": list(sc.network.nodes),
        "arcs": [
            {
                "id": a.id,
                "from": a.tail,
                "to": a.head,
                "transit_time": _fmt(a.transit_time),
                "capacity": _fmt(a.capacity),
                "merge_priority": a.merge_priority,
            }
            for a in sc.network.arcs
        ],
        "commodities": [
            {
                "id": c.id,
                "origin": c.origin,
                "destination": c.destination,
                "path": list(c.path),
                "supply": [
                    {"start": _fmt(a), "end": _fmt(b), "rate": _fmt(r)} for a, b, r in c.supply.pieces
                ],
            }
            for c in sc.commodities
        ],
        "discretization": {"alpha": _fmt(sc.discretization.alpha), "beta": _fmt(sc.discretization.beta)},
    }


def loads_scenario(text: str) -> Scenario:
    try:
        doc = json.loads(text, parse_float=str, parse_int=int)
    except json.JSONDecodeError as exc:
        raise ScenarioError([("$", f"invalid JSON: {exc}")]) from exc
    return validate_scenario(doc)


def load_scenario(path) -> Scenario:
    return loads_scenario(Path(path).read_text())


def dumps_scenario(sc: Scenario) -> str:
    return json.dumps(scenario_to_document(sc), indent=2) + "\n"
