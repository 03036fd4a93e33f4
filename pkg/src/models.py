# src/models.py
from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from src.constants import HERMITIAN_TOL, PSD_TOL, TRACE_TOL
from src.errors import StateInvariantError, WidthError


class SpinState(str, Enum):
    UP = "up"
    DOWN = "down"


class QubitRole(str, Enum):
    SPIN = "spin"
    BOSON = "boson"
    AUX = "aux"
    IDLE = "idle"  # device wire no logical qubit was placed on


class RateConvention(str, Enum):
    """How the bare rate gamma enters the dissipator."""

    PAPER_COLLISION = "paper-collision"  # excited population decays as e^{-gamma t}
    EQ2_LITERAL = "eq2-literal"  # excited population decays as e^{-2 gamma t}

    def effective_rate(self, gamma: float) -> float:
        return gamma if self is RateConvention.PAPER_COLLISION else 2.0 * gamma


class ModelParams(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    # Spin fields
    h: float = Field(1.0, allow_inf_nan=False)
    epsilon: float = Field(0.5, allow_inf_nan=False)
    # Oscillator and coupling
    omega: float = Field(4.0, allow_inf_nan=False)
    lambda_c: float = Field(2.0, allow_inf_nan=False)
    # Dissipation (bare rate)
    gamma: float = Field(1.0, ge=0.0, allow_inf_nan=False)
    # Sizes
    n_spins: int = Field(1, ge=1)
    d_ho: int = Field(4, ge=2)

    @property
    def n_boson_qubits(self) -> int:
        return max(1, math.ceil(math.log2(self.d_ho)))

    @property
    def layout(self) -> RegisterLayout:
        return RegisterLayout.for_model(self.n_spins, self.n_boson_qubits)


class InitialStateSpec(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    spin_states: tuple[SpinState, ...] = (SpinState.UP,)
    boson_level: int = Field(0, ge=0)

    @classmethod
    def first_spin_excited(cls, n_spins: int) -> InitialStateSpec:
        """One spin excited, the rest in the ground state, oscillator empty."""
        return cls(spin_states=(SpinState.UP,) + (SpinState.DOWN,) * (n_spins - 1))


@dataclass(frozen=True)
class RegisterLayout:
    """
    Wire order of an evolution circuit and of the system register.

    The circuit register interleaves aux qubits at the outer edges next to
    their spins: one spin gives [boson hi..lo, spin, aux], two spins give
    [aux1, spin1, boson hi..lo, spin2, aux2]. The system register is the
    circuit register with the aux wires removed; the Hamiltonian, the oracle
    and every snapshot live on it.
    """

    n_spins: int
    n_boson_qubits: int
    roles: tuple[QubitRole, ...]
    spin_wires: tuple[int, ...]
    aux_wires: tuple[int, ...]
    boson_wires: tuple[int, ...]

    @classmethod
    def for_model(cls, n_spins: int, n_boson_qubits: int) -> RegisterLayout:
        before = n_spins // 2
        wires: list[tuple[QubitRole, int]] = []
        wires += [(QubitRole.AUX, k) for k in range(before)]
        wires += [(QubitRole.SPIN, k) for k in range(before)]
        wires += [(QubitRole.BOSON, j) for j in range(n_boson_qubits)]
        wires += [(QubitRole.SPIN, k) for k in range(before, n_spins)]
        wires += [(QubitRole.AUX, k) for k in reversed(range(before, n_spins))]

        spin = [0] * n_spins
        aux = [0] * n_spins
        boson = []
        for wire, (role, k) in enumerate(wires):
            if role is QubitRole.SPIN:
                spin[k] = wire
            elif role is QubitRole.AUX:
                aux[k] = wire
            else:
                boson.append(wire)
        return cls(
            n_spins=n_spins,
            n_boson_qubits=n_boson_qubits,
            roles=tuple(role for role, _ in wires),
            spin_wires=tuple(spin),
            aux_wires=tuple(aux),
            boson_wires=tuple(boson),
        )

    @property
    def width(self) -> int:
        return len(self.roles)

    @property
    def system_wires(self) -> tuple[int, ...]:
        return tuple(w for w, r in enumerate(self.roles) if r is not QubitRole.AUX)

    @property
    def system_width(self) -> int:
        return len(self.system_wires)

    @property
    def spin_qubits(self) -> tuple[int, ...]:
        """Spin positions inside the system register."""
        index = {w: i for i, w in enumerate(self.system_wires)}
        return tuple(index[w] for w in self.spin_wires)

    @property
    def boson_qubits(self) -> tuple[int, ...]:
        index = {w: i for i, w in enumerate(self.system_wires)}
        return tuple(index[w] for w in self.boson_wires)

    @property
    def signature(self) -> str:
        letters = {QubitRole.SPIN: "s", QubitRole.BOSON: "b", QubitRole.AUX: "a"}
        return "".join(letters[r] for r in self.roles)


def reduce_state(data: np.ndarray, keep, n_qubits: int) -> np.ndarray:
    """Partial trace keeping `keep` (in the given order)."""
    keep = list(keep)
    tensor = data.reshape([2] * (2 * n_qubits))
    cols = [n_qubits + q if q in keep else q for q in range(n_qubits)]
    inputs = list(range(n_qubits)) + cols
    outputs = keep + [n_qubits + q for q in keep]
    reduced = np.einsum(tensor, inputs, outputs)
    dim = 2 ** len(keep)
    return reduced.reshape(dim, dim)


@dataclass(frozen=True)
class DensityMatrix:
    data: np.ndarray

    def __post_init__(self):
        data = np.asarray(self.data, dtype=complex)
        dim = data.shape[0]
        if data.ndim != 2 or data.shape[1] != dim or dim & (dim - 1) or dim < 1:
            raise WidthError(f"density matrix must be square with power-of-two size, got {data.shape}")
        object.__setattr__(self, "data", data)

    @classmethod
    def pure(cls, vector: np.ndarray) -> DensityMatrix:
        vector = np.asarray(vector, dtype=complex)
        return cls(np.outer(vector, vector.conj()))

    @classmethod
    def basis(cls, bits: str) -> DensityMatrix:
        vector = np.zeros(2 ** len(bits), dtype=complex)
        vector[int(bits, 2)] = 1.0
        return cls.pure(vector)

    @classmethod
    def maximally_mixed(cls, n_qubits: int) -> DensityMatrix:
        dim = 2**n_qubits
        return cls(np.eye(dim, dtype=complex) / dim)

    @property
    def dim(self) -> int:
        return self.data.shape[0]

    @property
    def n_qubits(self) -> int:
        return self.dim.bit_length() - 1

    @property
    def trace(self) -> float:
        return float(np.trace(self.data).real)

    @property
    def purity(self) -> float:
        return float(np.real(np.trace(self.data @ self.data)))

    def populations(self) -> np.ndarray:
        return np.clip(np.real(np.diag(self.data)), 0.0, None)

    def partial_trace(self, keep) -> DensityMatrix:
        return DensityMatrix(reduce_state(self.data, keep, self.n_qubits))

    def tensor(self, other: DensityMatrix) -> DensityMatrix:
        return DensityMatrix(np.kron(self.data, other.data))

    def violations(
        self,
        trace_tol: float = TRACE_TOL,
        hermitian_tol: float = HERMITIAN_TOL,
        psd_tol: float = PSD_TOL,
    ) -> list[str]:
        problems = []
        trace = np.trace(self.data)
        if abs(trace - 1) > trace_tol:
            problems.append(f"trace {trace:.3e} differs from 1")
        skew = np.max(np.abs(self.data - self.data.conj().T))
        if skew > hermitian_tol:
            problems.append(f"non-Hermitian part {skew:.3e}")
        lowest = np.linalg.eigvalsh(0.5 * (self.data + self.data.conj().T))[0]
        if lowest < -psd_tol:
            problems.append(f"negative eigenvalue {lowest:.3e}")
        return problems

    def validate(self, **tolerances) -> DensityMatrix:
        problems = self.violations(**tolerances)
        if problems:
            raise StateInvariantError("; ".join(problems))
        return self


@dataclass(frozen=True)
class TrajectorySnapshot:
    t: float
    rho: DensityMatrix
