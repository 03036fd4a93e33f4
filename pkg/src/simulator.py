# src/simulator.py
"""
Density-matrix execution of circuits.

The state is kept as a tensor with one row axis and one column axis per
qubit; gates and channels contract only the axes they act on.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass
from functools import reduce
from typing import Sequence

import numpy as np

from src.circuits import Circuit, GateKind, gate_matrix
from src.constants import MAX_SIM_WIDTH
from src.errors import (
    NonNativeGateError,
    SingularConfusionError,
    StateInvariantError,
    WidthError,
)
from src.models import DensityMatrix
from src.noise import NoiseModel
from src.transpiler import NATIVE_KINDS

logger = logging.getLogger(__name__)

# Reset to |0>: trace the qubit out and replace it
_RESET_KRAUS = (
    np.array([[1, 0], [0, 0]], dtype=complex),
    np.array([[0, 1], [0, 0]], dtype=complex),
)
_RESET_SUPEROP = sum(np.kron(k, k.conj()) for k in _RESET_KRAUS)


@dataclass(frozen=True)
class SimulationResult:
    snapshots: list[DensityMatrix]  # one per barrier, on the barrier's qubits
    final: DensityMatrix
    measured: tuple[int, ...]


@dataclass(frozen=True)
class CountsTable:
    counts: dict[str, int]
    shots: int

    def __post_init__(self):
        if sum(self.counts.values()) != self.shots:
            raise ValueError("counts do not add up to the number of shots")

    @property
    def n_bits(self) -> int:
        return len(next(iter(self.counts))) if self.counts else 0

    def distribution(self, n_bits: int | None = None) -> np.ndarray:
        n_bits = self.n_bits if n_bits is None else n_bits
        out = np.zeros(2**n_bits)
        for bits, count in self.counts.items():
            out[int(bits, 2)] = count / self.shots
        return out


@dataclass(frozen=True)
class MitigationResult:
    quasi: np.ndarray  # may hold small negative entries
    projected: np.ndarray  # closest point of the probability simplex


def _apply_unitary(tensor: np.ndarray, u: np.ndarray, qubits: Sequence[int], n: int) -> np.ndarray:
    k = len(qubits)
    op = u.reshape([2] * (2 * k))
    # rows: U rho
    tensor = np.tensordot(op, tensor, axes=(list(range(k, 2 * k)), list(qubits)))
    tensor = np.moveaxis(tensor, list(range(k)), list(qubits))
    # columns: rho U^dag
    cols = [n + q for q in qubits]
    tensor = np.tensordot(tensor, op.conj(), axes=(cols, list(range(k, 2 * k))))
    return np.moveaxis(tensor, list(range(2 * n - k, 2 * n)), cols)


def _apply_superop(tensor: np.ndarray, superop: np.ndarray, qubits: Sequence[int], n: int) -> np.ndarray:
    k = len(qubits)
    op = superop.reshape([2] * (4 * k))
    axes = list(qubits) + [n + q for q in qubits]
    tensor = np.tensordot(op, tensor, axes=(list(range(2 * k, 4 * k)), axes))
    return np.moveaxis(tensor, list(range(2 * k)), axes)


def _check(rho: DensityMatrix, where: str) -> DensityMatrix:
    problems = rho.violations()
    if problems:
        raise StateInvariantError(f"{where}: " + "; ".join(problems))
    return rho


def ground_state(width: int) -> DensityMatrix:
    return DensityMatrix.basis("0" * width)


def simulate(
    c: Circuit, noise: NoiseModel | None = None, rho0: DensityMatrix | None = None
) -> SimulationResult:
    """
    Run `c` gate by gate. Noisy gates are followed by their channel; each
    barrier records the reduced state of its qubits, in the listed order.
    """
    n = c.width
    if n > MAX_SIM_WIDTH:
        raise WidthError(f"circuit width {n} exceeds the simulator limit {MAX_SIM_WIDTH}")
    rho0 = ground_state(n) if rho0 is None else rho0
    if rho0.n_qubits != n:
        raise WidthError(f"initial state has {rho0.n_qubits} qubits, circuit has {n}")

    tensor = rho0.data.reshape([2] * (2 * n))
    snapshots: list[DensityMatrix] = []
    for gate in c.gates:
        if gate.kind is GateKind.BARRIER:
            full = DensityMatrix(tensor.reshape(2**n, 2**n))
            snapshots.append(_check(full.partial_trace(gate.qubits), f"barrier {len(snapshots)}"))
            continue
        if gate.kind is GateKind.MEASURE:
            continue
        if gate.kind is GateKind.RESET:
            tensor = _apply_superop(tensor, _RESET_SUPEROP, gate.qubits, n)
            continue
        if noise is not None and gate.kind not in NATIVE_KINDS:
            raise NonNativeGateError(f"noisy simulation needs device gates, got {gate.kind.value}")
        tensor = _apply_unitary(tensor, gate_matrix(gate), gate.qubits, n)
        if noise is not None:
            channel = noise.channel_for(gate)
            if channel is not None and not channel.is_identity:
                tensor = _apply_superop(tensor, channel.superoperator, gate.qubits, n)

    final = _check(DensityMatrix(tensor.reshape(2**n, 2**n)), "final state")
    return SimulationResult(snapshots, final, c.measured)


def circuit_unitary(c: Circuit) -> np.ndarray:
    """Dense unitary of a circuit made of unitary gates (markers ignored)."""
    dim = 2**c.width
    u = np.eye(dim, dtype=complex).reshape([2] * c.width + [dim])
    for gate in c.gates:
        if gate.kind in (GateKind.BARRIER, GateKind.MEASURE):
            continue
        if gate.kind is GateKind.RESET:
            raise ValueError("reset is not unitary")
        k = len(gate.qubits)
        op = gate_matrix(gate).reshape([2] * (2 * k))
        u = np.tensordot(op, u, axes=(list(range(k, 2 * k)), list(gate.qubits)))
        u = np.moveaxis(u, list(range(k)), list(gate.qubits))
    return u.reshape(dim, dim)


def _readout_matrix(confusion: Sequence[np.ndarray]) -> np.ndarray:
    return reduce(np.kron, confusion)


def sample_counts(
    rho: DensityMatrix,
    shots: int,
    readout: Sequence[np.ndarray] | None = None,
    seed: int | np.random.SeedSequence | None = None,
) -> CountsTable:
    """Computational-basis samples; bit i of each key is qubit i."""
    if shots < 1:
        raise ValueError(f"shots must be positive, got {shots}")
    probs = rho.populations()
    if readout is not None:
        if len(readout) != rho.n_qubits:
            raise WidthError(f"{len(readout)} confusion matrices for {rho.n_qubits} qubits")
        probs = _readout_matrix(readout).T @ probs
    probs = np.clip(probs, 0.0, None)
    probs = probs / probs.sum()
    rng = np.random.default_rng(seed)
    draws = rng.multinomial(shots, probs)
    counts = {
        format(i, f"0{rho.n_qubits}b"): int(k) for i, k in enumerate(draws) if k > 0
    }
    return CountsTable(counts, shots)


def project_to_simplex(v: np.ndarray) -> np.ndarray:
    """Euclidean projection onto {p : p >= 0, sum(p) = 1}."""
    u = np.sort(v)[::-1]
    cumulative = np.cumsum(u) - 1.0
    index = np.arange(1, len(v) + 1)
    rho = index[u - cumulative / index > 0][-1]
    shift = cumulative[rho - 1] / rho
    return np.clip(v - shift, 0.0, None)


def mitigate_distribution(
    observed: np.ndarray, confusion: Sequence[np.ndarray]
) -> MitigationResult:
    inverses = []
    for matrix in confusion:
        if abs(np.linalg.det(matrix)) < 1e-12:
            raise SingularConfusionError(f"confusion matrix {matrix.tolist()} is singular")
        inverses.append(np.linalg.inv(matrix.T))
    quasi = _readout_matrix(inverses) @ observed
    return MitigationResult(quasi, project_to_simplex(quasi))


def mitigate_readout(counts: CountsTable, confusion: Sequence[np.ndarray]) -> MitigationResult:
    """Undo independent per-qubit readout flips on an empirical distribution."""
    return mitigate_distribution(counts.distribution(len(confusion)), confusion)
