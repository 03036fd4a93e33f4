# src/circuits.py
"""
Gate-level circuits for the encoded evolution.

Rotation convention: R_P(phi) = exp(-i phi P / 2). Two-qubit gates list the
control first. Gates are stored in time order.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Sequence

import numpy as np

from src.constants import HALF_PI, MAX_SIM_WIDTH
from src.encoding import BitCode, CodeKind, TruncationSpec, encode_hamiltonian
from src.errors import IdentityTermError, WidthError
from src.models import (
    InitialStateSpec,
    ModelParams,
    QubitRole,
    RateConvention,
    SpinState,
)
from src.pauli import PauliString, PauliSum

logger = logging.getLogger(__name__)


class GateKind(str, Enum):
    X = "x"
    SX = "sx"
    RZ = "rz"
    RY = "ry"
    CX = "cx"
    CRY = "cry"
    RESET = "reset"
    MEASURE = "measure"
    BARRIER = "barrier"


ROTATIONS = {GateKind.RZ, GateKind.RY, GateKind.CRY}
TWO_QUBIT = {GateKind.CX, GateKind.CRY}
MARKERS = {GateKind.RESET, GateKind.MEASURE, GateKind.BARRIER}


@dataclass(frozen=True)
class Gate:
    kind: GateKind
    qubits: tuple[int, ...]
    angle: float | None = None

    def __post_init__(self):
        object.__setattr__(self, "kind", GateKind(self.kind))
        object.__setattr__(self, "qubits", tuple(int(q) for q in self.qubits))
        if len(set(self.qubits)) != len(self.qubits):
            raise ValueError(f"{self.kind.value} has repeated operands {self.qubits}")
        if any(q < 0 for q in self.qubits):
            raise ValueError(f"{self.kind.value} has a negative operand {self.qubits}")
        if self.kind is GateKind.BARRIER:
            arity_ok = len(self.qubits) >= 1
        else:
            arity_ok = len(self.qubits) == (2 if self.kind in TWO_QUBIT else 1)
        if not arity_ok:
            raise ValueError(f"{self.kind.value} cannot act on {self.qubits}")
        if self.kind in ROTATIONS:
            if self.angle is None or not math.isfinite(self.angle):
                raise ValueError(f"{self.kind.value} needs a finite angle, got {self.angle}")
            object.__setattr__(self, "angle", float(self.angle))
        elif self.angle is not None:
            raise ValueError(f"{self.kind.value} takes no angle")

    def on(self, mapping: Sequence[int]) -> Gate:
        """The same gate with operand i moved to mapping[i]."""
        return Gate(self.kind, tuple(mapping[q] for q in self.qubits), self.angle)

    def to_text(self) -> str:
        line = f"{self.kind.value} {','.join(str(q) for q in self.qubits)}"
        return line if self.angle is None else f"{line} {self.angle!r}"

    @classmethod
    def from_text(cls, line: str) -> Gate:
        parts = line.split()
        if len(parts) not in (2, 3):
            raise ValueError(f"malformed gate line {line!r}")
        angle = float(parts[2]) if len(parts) == 3 else None
        return cls(GateKind(parts[0]), tuple(int(q) for q in parts[1].split(",")), angle)


@dataclass(frozen=True)
class Circuit:
    width: int
    gates: tuple[Gate, ...] = ()
    roles: tuple[QubitRole, ...] = field(default=())

    def __post_init__(self):
        object.__setattr__(self, "gates", tuple(self.gates))
        object.__setattr__(self, "roles", tuple(QubitRole(r) for r in self.roles))
        if self.roles and len(self.roles) != self.width:
            raise WidthError(f"{len(self.roles)} roles for width {self.width}")
        for gate in self.gates:
            if max(gate.qubits) >= self.width:
                raise WidthError(f"{gate.to_text()!r} outside width {self.width}")
        last_barrier = max(
            (i for i, g in enumerate(self.gates) if g.kind is GateKind.BARRIER), default=-1
        )
        for i, gate in enumerate(self.gates):
            if gate.kind is GateKind.MEASURE and i < last_barrier:
                raise ValueError("measurements must follow the final barrier")

    def __len__(self) -> int:
        return len(self.gates)

    def extended(self, fragment: Circuit, mapping: Sequence[int] | None = None) -> Circuit:
        """Append `fragment`, sending its qubit i to mapping[i]."""
        mapping = list(range(fragment.width)) if mapping is None else list(mapping)
        if len(mapping) != fragment.width:
            raise WidthError(f"mapping of length {len(mapping)} for width {fragment.width}")
        return Circuit(
            self.width, self.gates + tuple(g.on(mapping) for g in fragment.gates), self.roles
        )

    def with_gates(self, gates: Iterable[Gate]) -> Circuit:
        return Circuit(self.width, tuple(gates), self.roles)

    @property
    def measured(self) -> tuple[int, ...]:
        return tuple(g.qubits[0] for g in self.gates if g.kind is GateKind.MEASURE)

    def to_text(self) -> str:
        header = f"# width={self.width}"
        if self.roles:
            header += " roles=" + ",".join(r.value for r in self.roles)
        return "\n".join([header] + [g.to_text() for g in self.gates]) + "\n"

    @classmethod
    def from_text(cls, text: str) -> Circuit:
        lines = [line.strip() for line in text.splitlines() if line.strip()]
        if not lines or not lines[0].startswith("# width="):
            raise ValueError("circuit text must start with a '# width=' header")
        header = dict(item.split("=", 1) for item in lines[0][1:].split())
        roles = tuple(QubitRole(r) for r in header["roles"].split(",")) if "roles" in header else ()
        gates = tuple(Gate.from_text(line) for line in lines[1:] if not line.startswith("#"))
        return cls(int(header["width"]), gates, roles)


# --- Gate matrices -----------------------------------------------------------

def rz_matrix(phi: float) -> np.ndarray:
    return np.diag([np.exp(-0.5j * phi), np.exp(0.5j * phi)])


def ry_matrix(phi: float) -> np.ndarray:
    c, s = math.cos(phi / 2), math.sin(phi / 2)
    return np.array([[c, -s], [s, c]], dtype=complex)


def _controlled(op: np.ndarray) -> np.ndarray:
    out = np.eye(4, dtype=complex)
    out[2:, 2:] = op
    return out


X_MATRIX = np.array([[0, 1], [1, 0]], dtype=complex)
SX_MATRIX = 0.5 * np.array([[1 + 1j, 1 - 1j], [1 - 1j, 1 + 1j]])
CX_MATRIX = _controlled(X_MATRIX)


def gate_matrix(gate: Gate) -> np.ndarray:
    """Unitary of a gate on its own operands (first operand = leftmost factor)."""
    kind = gate.kind
    if kind is GateKind.X:
        return X_MATRIX
    if kind is GateKind.SX:
        return SX_MATRIX
    if kind is GateKind.RZ:
        return rz_matrix(gate.angle)
    if kind is GateKind.RY:
        return ry_matrix(gate.angle)
    if kind is GateKind.CX:
        return CX_MATRIX
    if kind is GateKind.CRY:
        return _controlled(ry_matrix(gate.angle))
    raise ValueError(f"{kind.value} is not unitary")


# --- Builders ----------------------------------------------------------------

def _hadamard(q: int) -> list[Gate]:
    return [Gate(GateKind.RZ, (q,), HALF_PI), Gate(GateKind.SX, (q,)), Gate(GateKind.RZ, (q,), HALF_PI)]


def _basis_change(letter: str, q: int, inverse: bool) -> list[Gate]:
    """Gates rotating `letter` onto Z (or back, when inverse), exact up to phase."""
    if letter == "X":
        return _hadamard(q)
    if letter == "Y":
        # SX maps Y onto Z; SX^dag = RZ(pi) SX RZ(pi)
        if inverse:
            return [Gate(GateKind.RZ, (q,), math.pi), Gate(GateKind.SX, (q,)), Gate(GateKind.RZ, (q,), math.pi)]
        return [Gate(GateKind.SX, (q,))]
    return []


def pauli_exponential(term: PauliString, angle: float) -> Circuit:
    """Circuit for exp(-i * angle * coefficient * P)."""
    if term.is_identity:
        raise IdentityTermError(f"{term} is a global phase, not a gate")
    if abs(term.coefficient.imag) > 1e-12:
        raise ValueError(f"coefficient of {term.letters} must be real, got {term.coefficient}")
    active = term.support
    pre: list[Gate] = []
    post: list[Gate] = []
    for q in active:
        pre += _basis_change(term.letters[q], q, inverse=False)
        post += _basis_change(term.letters[q], q, inverse=True)

    ladder = [Gate(GateKind.CX, (a, b)) for a, b in zip(active[:-1], active[1:])]
    core = Gate(GateKind.RZ, (active[-1],), 2.0 * angle * term.coefficient.real)
    gates = pre + ladder + [core] + list(reversed(ladder)) + post
    return Circuit(term.width, tuple(gates))


def trotter_step(h_terms: PauliSum, dt: float, order: int) -> Circuit:
    """One product-formula step; order 2 is the symmetric forward/backward sweep."""
    if dt <= 0:
        raise ValueError(f"time step must be positive, got {dt}")
    terms = [t for t in h_terms.terms if not t.is_identity]
    if order == 1:
        schedule = [(t, dt) for t in terms]
    elif order == 2:
        forward = [(t, dt / 2) for t in terms]
        backward = list(reversed(forward))
        # merge the turning point
        schedule = forward[:-1] + [(terms[-1], dt)] + backward[1:] if terms else []
    else:
        raise ValueError(f"Trotter order must be 1 or 2, got {order}")

    step = Circuit(h_terms.width)
    for term, duration in schedule:
        step = step.extended(pauli_exponential(term, duration))
    return step


def collision_angle(
    gamma: float, dt: float, convention: RateConvention | str = RateConvention.PAPER_COLLISION
) -> float:
    """theta with sin^2(theta) equal to the damping probability over dt."""
    if gamma < 0:
        raise ValueError(f"gamma must be non-negative, got {gamma}")
    rate = RateConvention(convention).effective_rate(gamma)
    return math.asin(math.sqrt(1.0 - math.exp(-rate * dt)))


def collision_block(
    gamma: float,
    dt: float,
    spin_q: int,
    aux_q: int,
    convention: RateConvention | str = RateConvention.PAPER_COLLISION,
    width: int | None = None,
) -> Circuit:
    """Amplitude damping of `spin_q` through a collision with a fresh aux qubit."""
    theta = collision_angle(gamma, dt, convention)
    width = max(spin_q, aux_q) + 1 if width is None else width
    return Circuit(
        width,
        (
            Gate(GateKind.CRY, (spin_q, aux_q), 2.0 * theta),
            Gate(GateKind.CX, (aux_q, spin_q)),
            Gate(GateKind.RESET, (aux_q,)),
        ),
    )


def evolution_step(
    params: ModelParams,
    order: int,
    dt: float,
    code: CodeKind | str = CodeKind.GRAY,
    convention: RateConvention | str = RateConvention.PAPER_COLLISION,
) -> Circuit:
    """One Trotter step followed by one collision per spin, on the circuit register."""
    layout = params.layout
    circuit = Circuit(layout.width, (), layout.roles)
    circuit = circuit.extended(
        trotter_step(encode_hamiltonian(params, code), dt, order), layout.system_wires
    )
    if params.gamma > 0:
        for spin, aux in zip(layout.spin_wires, layout.aux_wires):
            circuit = circuit.extended(
                collision_block(params.gamma, dt, spin, aux, convention, layout.width)
            )
    return circuit


def assemble_evolution(
    params: ModelParams,
    spec: InitialStateSpec,
    n_steps: int,
    dt: float,
    order: int,
    code: CodeKind | str = CodeKind.GRAY,
    convention: RateConvention | str = RateConvention.PAPER_COLLISION,
) -> Circuit:
    """
    Full evolution circuit: preparation, a barrier, then n_steps of
    [Trotter step, collisions, barrier], then measurement of the system wires.

    Barriers list the system wires in system-register order; each one marks a
    snapshot at t = k * dt.
    """
    if n_steps < 0:
        raise ValueError(f"n_steps must be non-negative, got {n_steps}")
    layout = params.layout
    if layout.width > MAX_SIM_WIDTH:
        raise WidthError(
            f"evolution register needs {layout.width} qubits, "
            f"dense simulation supports {MAX_SIM_WIDTH}"
        )
    if len(spec.spin_states) != params.n_spins:
        raise ValueError(f"{len(spec.spin_states)} spin states for {params.n_spins} spins")
    word = BitCode.for_truncation(code, TruncationSpec(params.d_ho)).word(spec.boson_level)

    gates: list[Gate] = []
    for wire, state in zip(layout.spin_wires, spec.spin_states):
        if state is SpinState.UP:
            gates.append(Gate(GateKind.X, (wire,)))
    for wire, bit in zip(layout.boson_wires, word):
        if bit == "1":
            gates.append(Gate(GateKind.X, (wire,)))
    barrier = Gate(GateKind.BARRIER, layout.system_wires)
    gates.append(barrier)

    step = evolution_step(params, order, dt, code, convention)
    for _ in range(n_steps):
        gates.extend(step.gates)
        gates.append(barrier)
    gates.extend(Gate(GateKind.MEASURE, (w,)) for w in layout.system_wires)

    circuit = Circuit(layout.width, tuple(gates), layout.roles)
    logger.debug(
        "assembled %d-step circuit: width %d, %d gates", n_steps, circuit.width, len(circuit)
    )
    return circuit
