# src/transpiler.py
"""Lowering to the device gate set {CX, RZ, SX, X}, SWAP routing and gate counts."""
from __future__ import annotations

import logging
import math
from collections import deque
from dataclasses import dataclass
from functools import cached_property
from typing import Sequence

from src.circuits import Circuit, Gate, GateKind, MARKERS
from src.constants import (
    JAKARTA_EDGES,
    JAKARTA_LAYOUTS,
    JAKARTA_N_QUBITS,
    HALF_PI,
    ROUTING_LOOKAHEAD,
)
from src.errors import DeviceTooSmallError, NonNativeGateError
from src.models import QubitRole, RegisterLayout
from src.utils import wrap_angle

logger = logging.getLogger(__name__)

NATIVE_KINDS = {GateKind.CX, GateKind.RZ, GateKind.SX, GateKind.X}
PI = math.pi


@dataclass(frozen=True)
class CouplingMap:
    n_qubits: int
    edges: frozenset[tuple[int, int]]

    def __post_init__(self):
        edges = frozenset(tuple(sorted(e)) for e in self.edges)
        for a, b in edges:
            if a == b or not (0 <= a < self.n_qubits and 0 <= b < self.n_qubits):
                raise ValueError(f"invalid edge ({a}, {b}) on {self.n_qubits} qubits")
        object.__setattr__(self, "edges", edges)
        if self.n_qubits > 1 and len(self.distances[0]) != self.n_qubits:
            raise ValueError("coupling map is not connected")

    @classmethod
    def jakarta(cls) -> CouplingMap:
        return cls(JAKARTA_N_QUBITS, frozenset(JAKARTA_EDGES))

    @classmethod
    def all_to_all(cls, n_qubits: int) -> CouplingMap:
        return cls(
            n_qubits,
            frozenset((a, b) for a in range(n_qubits) for b in range(a + 1, n_qubits)),
        )

    def neighbors(self, q: int) -> list[int]:
        return sorted({b for a, b in self.edges if a == q} | {a for a, b in self.edges if b == q})

    def are_coupled(self, a: int, b: int) -> bool:
        return tuple(sorted((a, b))) in self.edges

    @cached_property
    def distances(self) -> list[dict[int, int]]:
        out = []
        for source in range(self.n_qubits):
            dist = {source: 0}
            queue = deque([source])
            while queue:
                q = queue.popleft()
                for n in self.neighbors(q):
                    if n not in dist:
                        dist[n] = dist[q] + 1
                        queue.append(n)
            out.append(dist)
        return out

    def shortest_path(self, a: int, b: int) -> list[int]:
        """Shortest path from a to b; ties go to the lowest-index neighbour."""
        path = [a]
        while path[-1] != b:
            here = path[-1]
            path.append(
                min(n for n in self.neighbors(here) if self.distances[n][b] == self.distances[here][b] - 1)
            )
        return path


@dataclass(frozen=True)
class GateCount:
    single_qubit: int = 0
    cx: int = 0


@dataclass(frozen=True)
class RoutedCircuit:
    circuit: Circuit
    initial_layout: tuple[int, ...]  # logical -> physical
    final_layout: tuple[int, ...]
    swaps: int

    @property
    def measured_logical(self) -> tuple[int, ...]:
        """Logical qubit read by each Measure, in measurement order."""
        p2l = {p: l for l, p in enumerate(self.final_layout)}
        return tuple(p2l[p] for p in self.circuit.measured)


@dataclass(frozen=True)
class CompactCircuit:
    circuit: Circuit
    physical: tuple[int, ...]  # compact wire -> device qubit


# --- Decomposition -----------------------------------------------------------

def _ry(q: int, phi: float) -> list[Gate]:
    return [
        Gate(GateKind.SX, (q,)),
        Gate(GateKind.RZ, (q,), phi - PI),
        Gate(GateKind.SX, (q,)),
        Gate(GateKind.RZ, (q,), PI),
    ]


def _rx_plus(q: int) -> list[Gate]:
    return [Gate(GateKind.SX, (q,))]


def _rx_minus(q: int) -> list[Gate]:
    return [Gate(GateKind.RZ, (q,), PI), Gate(GateKind.SX, (q,)), Gate(GateKind.RZ, (q,), PI)]


def _collision_pair(s: int, a: int, phi: float) -> list[Gate]:
    """CRY(phi) on (s, a) followed by CX(a, s), with two CX."""
    theta = phi / 2
    return (
        _ry(a, theta + HALF_PI)
        + _rx_plus(a)
        + [Gate(GateKind.CX, (s, a))]
        + _rx_plus(s)
        + [Gate(GateKind.RZ, (a,), -theta)]
        + [Gate(GateKind.CX, (s, a))]
        + _rx_minus(a)
        + _ry(a, -HALF_PI)
        + _rx_minus(s)
        + [Gate(GateKind.RZ, (a,), -HALF_PI)]
    )


def _cry(c: int, t: int, phi: float) -> list[Gate]:
    return (
        _ry(t, phi / 2)
        + [Gate(GateKind.CX, (c, t))]
        + _ry(t, -phi / 2)
        + [Gate(GateKind.CX, (c, t))]
    )


def merge_rz(circuit: Circuit, tol: float = 1e-12) -> Circuit:
    """Fuse runs of RZ on a wire and drop the ones equal to 0 mod 2*pi."""
    pending: dict[int, float] = {}
    out: list[Gate] = []

    def flush(q: int):
        if q in pending:
            angle = wrap_angle(pending.pop(q))
            if abs(angle) > tol:
                out.append(Gate(GateKind.RZ, (q,), angle))

    for gate in circuit.gates:
        if gate.kind is GateKind.RZ:
            q = gate.qubits[0]
            pending[q] = pending.get(q, 0.0) + gate.angle
            continue
        wires = range(circuit.width) if gate.kind is GateKind.BARRIER else gate.qubits
        for q in wires:
            flush(q)
        out.append(gate)
    for q in sorted(pending):
        flush(q)
    return circuit.with_gates(out)


def decompose_native(c: Circuit) -> Circuit:
    gates = list(c.gates)
    out: list[Gate] = []
    i = 0
    while i < len(gates):
        gate = gates[i]
        following = gates[i + 1] if i + 1 < len(gates) else None
        if gate.kind is GateKind.CRY:
            control, target = gate.qubits
            if (
                following is not None
                and following.kind is GateKind.CX
                and following.qubits == (target, control)
            ):
                out += _collision_pair(control, target, gate.angle)
                i += 2
                continue
            out += _cry(control, target, gate.angle)
        elif gate.kind is GateKind.RY:
            out += _ry(gate.qubits[0], gate.angle)
        else:
            out.append(gate)
        i += 1
    return merge_rz(c.with_gates(out))


# --- Routing -----------------------------------------------------------------

def default_layout(layout: RegisterLayout, coupling: CouplingMap) -> tuple[int, ...]:
    """Initial placement with the fewest routed CX per Gray-coded step on the jakarta map."""
    if coupling == CouplingMap.jakarta() and layout.signature in JAKARTA_LAYOUTS:
        return JAKARTA_LAYOUTS[layout.signature]
    return tuple(range(layout.width))


def _swap(u: int, v: int) -> list[Gate]:
    return [Gate(GateKind.CX, (u, v)), Gate(GateKind.CX, (v, u)), Gate(GateKind.CX, (u, v))]


def _walk(l2p: list[int], path: list[int]) -> tuple[list[int], list[tuple[int, int]]]:
    """Swap the qubit at path[0] along `path` until it neighbours path[-1]."""
    placed = list(l2p)
    p2l = {p: q for q, p in enumerate(placed)}
    swaps = []
    for u, v in zip(path[:-2], path[1:-1]):
        swaps.append((u, v))
        lu, lv = p2l.pop(u, None), p2l.pop(v, None)
        if lu is not None:
            placed[lu] = v
            p2l[v] = lu
        if lv is not None:
            placed[lv] = u
            p2l[u] = lv
    return placed, swaps


def _upcoming_distance(
    gates: Sequence[Gate], start: int, l2p: Sequence[int], coupling: CouplingMap
) -> int:
    total = seen = 0
    for gate in gates[start:]:
        if seen == ROUTING_LOOKAHEAD:
            break
        if len(gate.qubits) == 2 and gate.kind is not GateKind.BARRIER:
            a, b = gate.qubits
            total += coupling.distances[l2p[a]][l2p[b]]
            seen += 1
    return total


def route(
    c: Circuit, coupling: CouplingMap, layout: Sequence[int] | None = None
) -> RoutedCircuit:
    """
    Greedy SWAP insertion. Before each two-qubit gate on uncoupled qubits one
    operand walks along the shortest path until it neighbours the other. The
    first operand walks unless moving the second leaves the next few
    two-qubit gates strictly closer together.
    """
    if c.width > coupling.n_qubits:
        raise DeviceTooSmallError(
            f"circuit needs {c.width} qubits, device has {coupling.n_qubits}"
        )
    l2p = list(range(c.width)) if layout is None else [int(p) for p in layout]
    if len(l2p) != c.width or len(set(l2p)) != len(l2p):
        raise ValueError(f"layout {l2p} is not an injective placement of {c.width} qubits")
    if any(not 0 <= p < coupling.n_qubits for p in l2p):
        raise DeviceTooSmallError(f"layout {l2p} uses qubits outside the device")
    initial = tuple(l2p)

    out: list[Gate] = []
    swaps = 0
    for i, gate in enumerate(c.gates):
        if len(gate.qubits) == 2 and gate.kind is not GateKind.BARRIER:
            a, b = gate.qubits
            if not coupling.are_coupled(l2p[a], l2p[b]):
                first = _walk(l2p, coupling.shortest_path(l2p[a], l2p[b]))
                second = _walk(l2p, coupling.shortest_path(l2p[b], l2p[a]))
                l2p, moves = first
                if _upcoming_distance(c.gates, i + 1, second[0], coupling) < _upcoming_distance(
                    c.gates, i + 1, first[0], coupling
                ):
                    l2p, moves = second
                for u, v in moves:
                    out += _swap(u, v)
                swaps += len(moves)
        out.append(gate.on(l2p))

    roles: tuple[QubitRole, ...] = ()
    if c.roles:
        placed = {p: c.roles[q] for q, p in enumerate(initial)}
        roles = tuple(placed.get(p, QubitRole.IDLE) for p in range(coupling.n_qubits))
    routed = Circuit(coupling.n_qubits, tuple(out), roles)
    logger.debug("routing inserted %d swaps", swaps)
    return RoutedCircuit(routed, initial, tuple(l2p), swaps)


def compact(c: Circuit) -> CompactCircuit:
    """Drop wires no gate touches, keeping the remaining wires in device order."""
    used = sorted({q for g in c.gates for q in g.qubits})
    index = {p: i for i, p in enumerate(used)}
    roles = tuple(c.roles[p] for p in used) if c.roles else ()
    gates = tuple(Gate(g.kind, tuple(index[q] for q in g.qubits), g.angle) for g in c.gates)
    return CompactCircuit(Circuit(len(used), gates, roles), tuple(used))


def count_gates(c: Circuit) -> GateCount:
    single = cx = 0
    for gate in c.gates:
        if gate.kind in MARKERS:
            continue
        if gate.kind not in NATIVE_KINDS:
            raise NonNativeGateError(f"{gate.kind.value} is not a device gate")
        if gate.kind is GateKind.CX:
            cx += 1
        else:
            single += 1
    return GateCount(single, cx)
