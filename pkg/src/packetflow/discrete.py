"""Packet routing with deterministic queuing: arc queues and zipper merging."""

from __future__ import annotations

import csv
import heapq
import math
from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping, NamedTuple, Sequence

from .model import DiscretizedArc, Network


class NonTerminationError(RuntimeError):
    pass


class PacketId(NamedTuple):
    commodity: str
    index: int


@dataclass(frozen=True)
class Packet:
    id: PacketId
    path: tuple[str, ...]
    release_step: int
    rank: tuple  # global release order; (commodity position, index) by default


@dataclass
class EventLog:
    """Everything that happened during one network loading run."""

    entered: dict[str, dict[int, list[PacketId]]]  # arc -> step -> L_e^+(t)
    left: dict[str, dict[int, list[PacketId]]]  # arc -> step -> L_e^-(t)
    released: dict[str, dict[int, list[PacketId]]]  # node -> step -> L_v^-(t)
    arrival: dict[PacketId, int]
    capacity: dict[str, list[Fraction]] = field(default_factory=dict)  # nu_hat_e(t)
    buffer_size: dict[str, list[int]] = field(default_factory=dict)  # |B_e(t)|
    steps: int = 0

    def entrance_steps(self, arc_id: str) -> dict[PacketId, int]:
        return {p: t for t, ps in self.entered.get(arc_id, {}).items() for p in ps}

    def exit_steps(self, arc_id: str) -> dict[PacketId, int]:
        return {p: t for t, ps in self.left.get(arc_id, {}).items() for p in ps}

    def rows(self) -> list[tuple]:
        """CSV rows ``(step, arc_or_node, event, commodity, packet_index, position)``."""
        rows = []
        for kind, table in (("enter", self.entered), ("leave", self.left), ("release", self.released)):
            for where, per_step in table.items():
                for t, ps in per_step.items():
                    rows.extend((t, where, kind, p.commodity, p.index, k + 1) for k, p in enumerate(ps))
        for p, t in self.arrival.items():
            rows.append((t, "", "arrive", p.commodity, p.index, 0))
        order = {"release": 0, "leave": 1, "arrive": 2, "enter": 3}
        rows.sort(key=lambda r: (r[0], order[r[2]], r[1], r[5], r[3], r[4]))
        return rows

    def write_csv(self, fh) -> None:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["step", "arc_or_node", "event", "commodity", "packet_index", "position_in_list"])
        w.writerows(self.rows())


def compute_buffer(queue: Sequence[tuple[PacketId, int]], t: int, steps: int) -> list[tuple[PacketId, int]]:
    """Front part of the queue whose entrance step is at most ``t - steps``."""
    out = []
    for item in queue:
        if item[1] > t - steps:
            break
        out.append(item)
    return out


def update_capacity(nu_hat: Fraction, previous: Fraction, buffered: int) -> Fraction:
    if buffered <= previous:
        return nu_hat
    return nu_hat + previous - math.floor(previous)


def select_leaving(buffer: Sequence, capacity: Fraction) -> tuple[list, list]:
    k = math.floor(capacity)
    return list(buffer[:k]), list(buffer[k:])


def zipper_merge(sources: Sequence[tuple[object, Sequence]]) -> list:
    """Merge ordered lists by the priority-counter rule.

    ``sources`` is a sequence of ``(tie_key, items)``.  Each source starts at
    counter ``1/y`` and advances by ``1/y`` per item taken (``y`` = its length);
    the smallest counter goes next, equal counters go to the smaller tie key.
    """
    heap = []
    for key, items in sources:
        if items:
            y = len(items)
            heap.append((Fraction(1, y), key, 0, Fraction(1, y), items))
    heapq.heapify(heap)
    out = []
    while heap:
        counter, key, pos, inc, items = heapq.heappop(heap)
        out.append(items[pos])
        if pos + 1 < len(items):
            heapq.heappush(heap, (counter + inc, key, pos + 1, inc, items))
    return out


def node_transition(
    node: str,
    leaving: Mapping[str, Sequence[PacketId]],
    released: Sequence[PacketId],
    net: Network,
    next_arc: Mapping[PacketId, Mapping[str | None, str]],
    origin_priority: int | None = None,
) -> dict[str, list[PacketId]]:
    """Distribute the packets leaving into ``node`` (and released at it) onto outgoing arcs.

    ``next_arc[p][e]`` is the arc following ``e`` on packet ``p``'s path, with
    ``next_arc[p][None]`` its first arc.  Packets whose path ends at ``node``
    must already have been removed from ``leaving``.
    """
    incoming = net.incoming(node)
    arc_rank = {a.id: k for k, a in enumerate(net.arcs)}
    origin_key = (math.inf, math.inf) if origin_priority is None else (origin_priority, -1)
    grouped: dict[str, list[tuple[object, list[PacketId]]]] = {}
    for arc in incoming:
        by_out: dict[str, list[PacketId]] = {}
        for p in leaving.get(arc.id, ()):
            try:
                nxt = next_arc[p][arc.id]
            except KeyError:
                raise AssertionError(f"packet {p} has no arc after {arc.id} but is not at its destination")
            by_out.setdefault(nxt, []).append(p)
        for out_arc, items in by_out.items():
            grouped.setdefault(out_arc, []).append(((arc.merge_priority, arc_rank[arc.id]), items))
    by_out = {}
    for p in released:
        by_out.setdefault(next_arc[p][None], []).append(p)
    for out_arc, items in by_out.items():
        grouped.setdefault(out_arc, []).append((origin_key, items))
    result = {}
    for out_arc, sources in grouped.items():
        if net.arc(out_arc).tail != node:
            raise AssertionError(f"arc {out_arc} does not leave node {node}")
        result[out_arc] = zipper_merge(sources)
    return result


def default_step_cap(packets: Sequence[Packet], darcs: Iterable[DiscretizedArc]) -> int:
    steps = [d.steps for d in darcs]
    last_release = max((p.release_step for p in packets), default=0)
    return 4 * (last_release + 1 + len(packets) * max(steps, default=1))


def network_loading(
    net: Network,
    darcs: Sequence[DiscretizedArc],
    packets: Sequence[Packet],
    *,
    origin_priority: int | None = None,
    max_steps: int | None = None,
) -> EventLog:
    """Run the packet model until every packet has reached its destination."""
    darc = {d.arc_id: d for d in darcs}
    next_arc: dict[PacketId, dict[str | None, str]] = {}
    dest_arc: dict[PacketId, str] = {}
    for p in packets:
        if not p.path:
            raise ValueError(f"packet {p.id} has an empty path")
        next_arc[p.id] = {None: p.path[0], **{a: b for a, b in zip(p.path, p.path[1:])}}
        dest_arc[p.id] = p.path[-1]
    releases: dict[int, dict[str, list[Packet]]] = {}
    for p in sorted(packets, key=lambda p: p.rank):
        origin = net.arc(p.path[0]).tail
        releases.setdefault(p.release_step, {}).setdefault(origin, []).append(p)

    cap = default_step_cap(packets, darcs) if max_steps is None else max_steps
    queues = {a.id: deque() for a in net.arcs}
    current = {a.id: darc[a.id].capacity for a in net.arcs}
    log = EventLog({a.id: {} for a in net.arcs}, {a.id: {} for a in net.arcs}, {}, {})
    for a in net.arcs:
        log.capacity[a.id] = []
        log.buffer_size[a.id] = []
    remaining = len(packets)
    t = 0
    while remaining:
        if t > cap:
            raise NonTerminationError(f"network loading exceeded {cap} steps")
        leaving: dict[str, list[PacketId]] = {}
        buffered: dict[str, int] = {}
        for a in net.arcs:
            buf = compute_buffer(queues[a.id], t, darc[a.id].steps)
            out, _ = select_leaving(buf, current[a.id])
            buffered[a.id] = len(buf)
            log.capacity[a.id].append(current[a.id])
            log.buffer_size[a.id].append(len(buf))
            if out:
                leaving[a.id] = [p for p, _ in out]
                log.left[a.id][t] = list(leaving[a.id])
        forwarded: dict[str, list[PacketId]] = {}
        for arc_id, ps in leaving.items():
            keep = []
            for p in ps:
                if dest_arc[p] == arc_id:
                    log.arrival[p] = t
                    remaining -= 1
                else:
                    keep.append(p)
            forwarded[arc_id] = keep
        entering: dict[str, list[PacketId]] = {}
        released_now = releases.get(t, {})
        for v in net.nodes:
            rel = [p.id for p in released_now.get(v, ())]
            if rel:
                log.released.setdefault(v, {})[t] = rel
            ins = {a.id: forwarded[a.id] for a in net.incoming(v) if forwarded.get(a.id)}
            if not ins and not rel:
                continue
            entering.update(node_transition(v, ins, rel, net, next_arc, origin_priority))
        for a in net.arcs:
            q = queues[a.id]
            for _ in leaving.get(a.id, ()):
                q.popleft()
            for p in entering.get(a.id, ()):
                q.append((p, t))
            if entering.get(a.id):
                log.entered[a.id][t] = list(entering[a.id])
            current[a.id] = update_capacity(darc[a.id].capacity, current[a.id], buffered[a.id])
        t += 1
    log.steps = t
    return log
