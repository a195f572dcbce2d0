"""Pulse schedules: ideal sequences, Eulerian bounded-strength cycles, nesting.

An ideal sequence over group elements ``g_1 .. g_m`` applies ``g_1``, waits
``tau``, applies ``g_2 g_1^dag``, waits, ..., and finishes with ``g_m^dag``,
so the toggling frame during window ``k`` is ``g_k``.  Eulerian schedules
replace pulses by finite control segments of length ``tau`` each driving one
generator with ``H = (pi / 2 tau) sum_{k in supp} P_k``.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace
from typing import Sequence, Union

from .groups import DecouplingGroup, GroupLabel, direct_product
from .pauli import PauliString, commutes, multiply

SCHEMA = "topodd.schedule/1"


class ScheduleError(ValueError):
    pass


@dataclass(frozen=True)
class InstantPulse:
    pauli: PauliString
    kind = "pulse"

    @property
    def duration(self) -> float:
        return 0.0


@dataclass(frozen=True)
class ControlSegment:
    generator: PauliString
    duration: float
    kind = "control"

    def __post_init__(self):
        if self.duration <= 0:
            raise ScheduleError("control segments need a positive duration")

    @property
    def amplitude(self) -> float:
        return math.pi / (2 * self.duration)


@dataclass(frozen=True)
class FreeEvolution:
    duration: float
    kind = "free"

    def __post_init__(self):
        if self.duration < 0:
            raise ScheduleError("negative duration")


@dataclass(frozen=True)
class LogicalSlot:
    """Opaque gate slot: the logical operator or an identity of equal cost."""

    pauli: PauliString
    duration: float
    logical: bool
    kind = "slot"


PulseEvent = Union[InstantPulse, ControlSegment, FreeEvolution, LogicalSlot]


@dataclass(frozen=True)
class Schedule:
    events: tuple[PulseEvent, ...]
    n_qubits: int
    tau: float
    mode: str = "ideal"  # ideal | eulerian
    group: str = "I"
    depth: int = 1

    @property
    def duration(self) -> float:
        return math.fsum(e.duration for e in self.events)

    @property
    def free_windows(self) -> int:
        return sum(1 for e in self.events if isinstance(e, FreeEvolution))

    @property
    def pulses(self) -> list[PauliString]:
        return [e.pauli for e in self.events if isinstance(e, InstantPulse)]

    def to_json(self) -> dict:
        evs = []
        for e in self.events:
            if isinstance(e, InstantPulse):
                evs.append({"kind": "pulse", "pauli": e.pauli.to_text(), "duration": 0.0})
            elif isinstance(e, ControlSegment):
                evs.append({"kind": "control", "pauli": e.generator.to_text(), "duration": e.duration})
            elif isinstance(e, FreeEvolution):
                evs.append({"kind": "free", "pauli": None, "duration": e.duration})
            else:
                evs.append({"kind": "slot", "pauli": e.pauli.to_text(), "duration": e.duration,
                            "logical": e.logical})
        return {"schema": SCHEMA, "mode": self.mode, "tau": self.tau, "group": self.group,
                "depth": self.depth, "n_qubits": self.n_qubits, "events": evs}

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=1)

    @classmethod
    def from_json(cls, doc: dict | str) -> "Schedule":
        if isinstance(doc, str):
            doc = json.loads(doc)
        if doc.get("schema") != SCHEMA:
            raise ScheduleError(f"unsupported schedule schema {doc.get('schema')!r}")
        n = int(doc["n_qubits"])
        evs: list[PulseEvent] = []
        for e in doc["events"]:
            kind = e["kind"]
            if kind == "pulse":
                evs.append(InstantPulse(PauliString.from_text(e["pauli"], n)))
            elif kind == "control":
                evs.append(ControlSegment(PauliString.from_text(e["pauli"], n), float(e["duration"])))
            elif kind == "free":
                evs.append(FreeEvolution(float(e["duration"])))
            elif kind == "slot":
                evs.append(LogicalSlot(PauliString.from_text(e["pauli"], n), float(e["duration"]),
                                       bool(e["logical"])))
            else:
                raise ScheduleError(f"unknown event kind {kind!r}")
        return cls(tuple(evs), n, float(doc["tau"]), doc["mode"], doc["group"], int(doc["depth"]))


def free_schedule(n_qubits: int, tau: float) -> Schedule:
    """A single free window; repeating it is plain free evolution."""
    return Schedule((FreeEvolution(tau),), n_qubits, tau, "ideal", "free", 0)


# -- ideal sequences ---------------------------------------------------------

def compile_ideal(group: DecouplingGroup, element_order: Sequence[PauliString] | None = None,
                  tau: float = 0.1) -> Schedule:
    """Ideal instantaneous-pulse sequence visiting ``element_order`` in turn."""
    if tau < 0:
        raise ScheduleError("tau must be non-negative")
    g = group.enumerate()
    order = list(g.elements) if element_order is None else [p.canonical() for p in element_order]
    if sorted(p.key() for p in order) != sorted(e.key() for e in g.elements):
        raise ScheduleError("element_order is not a permutation of the group elements")
    n = group.n_qubits
    events: list[PulseEvent] = []
    prev = PauliString.identity(n)
    for el in order:
        events.append(InstantPulse(multiply(el, prev.dagger()).hermitian()))
        events.append(FreeEvolution(tau))
        prev = el
    events.append(InstantPulse(prev.dagger().hermitian()))
    return Schedule(tuple(events), n, tau, "ideal", group.label.value, 1)


def toggling_frames(schedule: Schedule) -> list[PauliString]:
    """Cumulative pulse product (mod phase) in force during each timed window."""
    frame = PauliString.identity(schedule.n_qubits)
    out = []
    for e in schedule.events:
        if isinstance(e, (InstantPulse, LogicalSlot)):
            frame = multiply(e.pauli, frame)
        if isinstance(e, ControlSegment):
            out.append(frame.canonical())
            frame = multiply(e.generator, frame)
        elif isinstance(e, (FreeEvolution, LogicalSlot)) and e.duration > 0:
            out.append(frame.canonical())
    return out


def net_operator(schedule: Schedule) -> PauliString:
    """Product of every pulse, each control segment counted as its generator."""
    net = PauliString.identity(schedule.n_qubits)
    for e in schedule.events:
        if isinstance(e, (InstantPulse, LogicalSlot)):
            net = multiply(e.pauli, net)
        elif isinstance(e, ControlSegment):
            net = multiply(e.generator, net)
    return net


def nest(outer: DecouplingGroup, inner: Schedule,
         element_order: Sequence[PauliString] | None = None) -> Schedule:
    """Outer ideal sequence with every free window replaced by ``inner``.

    Identity pulses of the outer sequence are dropped, so nesting inside the
    trivial group returns ``inner`` unchanged.
    """
    if outer.n_qubits != inner.n_qubits:
        raise ScheduleError("qubit counts differ")
    if outer.order == 1:
        return inner
    shell = compile_ideal(outer, element_order, inner.duration)
    events: list[PulseEvent] = []
    for e in shell.events:
        if isinstance(e, FreeEvolution):
            events.extend(inner.events)
        elif not e.pauli.is_identity():
            events.append(e)
    return Schedule(tuple(events), inner.n_qubits, inner.tau, inner.mode,
                    f"{outer.label.value}({inner.group})", inner.depth + 1)


# -- Cayley graphs and Eulerian cycles ---------------------------------------

@dataclass(frozen=True)
class CayleyGraph:
    group: DecouplingGroup
    generators: tuple[PauliString, ...]
    # adjacency[v][j] = index of generator_j * element_v
    adjacency: tuple[tuple[int, ...], ...] = field(repr=False)

    @property
    def vertex_count(self) -> int:
        return len(self.adjacency)

    @property
    def edge_count(self) -> int:
        return sum(len(a) for a in self.adjacency)

    def edges(self) -> list[tuple[int, int, int]]:
        return [(v, j, w) for v, row in enumerate(self.adjacency) for j, w in enumerate(row)]


def cayley_graph(group: DecouplingGroup, generators: Sequence[PauliString] | None = None) -> CayleyGraph:
    g = group.enumerate()
    gens = tuple(generators) if generators is not None else g.generators
    adj = tuple(tuple(g.index_of(multiply(s, e)) for s in gens) for e in g.elements)
    return CayleyGraph(g, gens, adj)


def eulerian_cycle(graph: CayleyGraph, start: int = 0) -> list[int]:
    """Closed walk from ``start`` using every directed edge once, as generator indices.

    Hierholzer's algorithm; at each vertex the unused edge with the lowest
    generator index is taken, and sub-cycles are spliced in at the vertex
    where the walk got stuck.
    """
    nxt = [0] * graph.vertex_count  # next unused generator index per vertex
    stack: list[tuple[int, int]] = [(start, -1)]
    path: list[int] = []
    while stack:
        v, via = stack[-1]
        if nxt[v] < len(graph.adjacency[v]):
            j = nxt[v]
            nxt[v] += 1
            stack.append((graph.adjacency[v][j], j))
        else:
            stack.pop()
            if via >= 0:
                path.append(via)
    path.reverse()
    if len(path) != graph.edge_count:
        raise ScheduleError("graph is not Eulerian from the start vertex")
    return path


def walk_vertices(graph: CayleyGraph, walk: Sequence[int], start: int = 0) -> list[int]:
    verts = [start]
    for j in walk:
        verts.append(graph.adjacency[verts[-1]][j])
    return verts


def is_eulerian_cycle(graph: CayleyGraph, walk: Sequence[int], start: int = 0) -> bool:
    """Closed at ``start`` and every directed edge used exactly once."""
    if len(walk) != graph.edge_count:
        return False
    seen = set()
    v = start
    for j in walk:
        if not 0 <= j < len(graph.generators) or (v, j) in seen:
            return False
        seen.add((v, j))
        v = graph.adjacency[v][j]
    return v == start


def walk_from_vertices(graph: CayleyGraph, vertices: Sequence[PauliString]) -> list[int]:
    """Translate a vertex sequence into generator indices (raises if a step is not an edge)."""
    g = graph.group
    idx = [g.index_of(p.canonical()) for p in vertices]
    walk = []
    for a, b in zip(idx, idx[1:]):
        try:
            walk.append(graph.adjacency[a].index(b))
        except ValueError:
            raise ScheduleError(f"no generator takes vertex {a} to {b}") from None
    return walk


def compile_eulerian(group: DecouplingGroup, generators: Sequence[PauliString] | None = None,
                     tau: float = 0.1) -> Schedule:
    """One control segment of length ``tau`` per edge of the Eulerian cycle."""
    if tau <= 0:
        raise ScheduleError("tau must be positive")
    graph = cayley_graph(group, generators)
    walk = eulerian_cycle(graph)
    events = tuple(ControlSegment(graph.generators[j].hermitian(), tau) for j in walk)
    return Schedule(events, group.n_qubits, tau, "eulerian", group.label.value, 1)


def insert_logical(schedule: Schedule, group: DecouplingGroup, logical: PauliString,
                   vertex: PauliString | None = None, duration: float | None = None) -> Schedule:
    """Add one gate slot per Cayley-graph vertex: ``logical`` at ``vertex``
    (identity by default) and identity slots elsewhere.

    Each slot is placed the first time the walk leaves its vertex.
    """
    if schedule.mode != "eulerian":
        raise ScheduleError("logical slots go into Eulerian schedules")
    if logical.n != schedule.n_qubits:
        raise ScheduleError("qubit count mismatch")
    bad = [g for g in group.generators if not commutes(g, logical)]
    if bad:
        raise ScheduleError(f"logical {logical} anticommutes with group element {bad[0]}")
    g = group.enumerate()
    target = g.index_of((vertex or PauliString.identity(g.n_qubits)).canonical())
    duration = schedule.tau if duration is None else duration
    ident = PauliString.identity(schedule.n_qubits)
    frame = 0
    done: set[int] = set()
    events: list[PulseEvent] = []
    for e in schedule.events:
        if isinstance(e, ControlSegment):
            if frame not in done:
                done.add(frame)
                is_l = frame == target
                events.append(LogicalSlot(logical.hermitian() if is_l else ident, duration, is_l))
            frame = g.index_of(multiply(e.generator, g.elements[frame]).canonical())
        events.append(e)
    if len(done) != g.order:
        raise ScheduleError("walk does not visit every vertex")
    return replace(schedule, events=tuple(events))


def product_group(a: DecouplingGroup, b: DecouplingGroup) -> DecouplingGroup:
    return direct_product(a, b, GroupLabel.TXZ if {a.label, b.label} <= {
        GroupLabel.TZ, GroupLabel.TX, GroupLabel.TZ_PLANAR, GroupLabel.TX_PLANAR} else GroupLabel.CUSTOM)
