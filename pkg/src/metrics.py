# src/metrics.py
from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Sequence

import numpy as np

from src.constants import TIME_TOL
from src.encoding import (
    BitCode,
    BosonOperator,
    CodeKind,
    TruncationSpec,
    encode_boson_operator,
)
from src.errors import WidthError
from src.models import DensityMatrix, RegisterLayout, TrajectorySnapshot
from src.pauli import to_dense
from src.utils import embed_operator

PAULI_X = np.array([[0, 1], [1, 0]], dtype=complex)
# Physical sigma_z: spin up is qubit |1>
SIGMA_Z = np.array([[-1, 0], [0, 1]], dtype=complex)


class ObservableKind(str, Enum):
    BOSON_NUMBER = "boson_number"
    SIGMA_Z = "sigma_z"
    SIGMA_X = "sigma_x"
    CZZ = "czz"
    CXX = "cxx"


class CorrelationPair(str, Enum):
    ZZ = "ZZ"
    XX = "XX"


@dataclass(frozen=True)
class ObservableSpec:
    kind: ObservableKind
    spin: int = 0


def _matrix(rho) -> np.ndarray:
    return rho.data if isinstance(rho, DensityMatrix) else np.asarray(rho, dtype=complex)


def _sqrtm_psd(matrix: np.ndarray) -> np.ndarray:
    values, vectors = np.linalg.eigh(0.5 * (matrix + matrix.conj().T))
    values = np.sqrt(np.clip(values, 0.0, None))
    return (vectors * values) @ vectors.conj().T


def fidelity(rho, sigma) -> float:
    """Uhlmann fidelity (Tr sqrt(sqrt(rho) sigma sqrt(rho)))^2."""
    a, b = _matrix(rho), _matrix(sigma)
    if a.shape != b.shape:
        raise WidthError(f"dimension mismatch {a.shape} vs {b.shape}")
    root = _sqrtm_psd(a)
    inner = root @ b @ root
    values = np.linalg.eigvalsh(0.5 * (inner + inner.conj().T))
    value = float(np.sum(np.sqrt(np.clip(values, 0.0, None))) ** 2)
    return min(max(value, 0.0), 1.0)


def infidelity(rho, sigma) -> float:
    return 1.0 - fidelity(rho, sigma)


def infidelity_series(
    traj_sim: Sequence[TrajectorySnapshot], traj_exact: Sequence[TrajectorySnapshot]
) -> list[float]:
    if len(traj_sim) != len(traj_exact):
        raise ValueError(
            f"trajectory lengths differ: {len(traj_sim)} vs {len(traj_exact)}"
        )
    out = []
    for a, b in zip(traj_sim, traj_exact):
        if abs(a.t - b.t) > TIME_TOL:
            raise ValueError(f"time grids differ: {a.t} vs {b.t}")
        out.append(infidelity(a.rho, b.rho))
    return out


def time_averaged_infidelity(
    traj_sim: Sequence[TrajectorySnapshot], traj_exact: Sequence[TrajectorySnapshot]
) -> float:
    """Mean infidelity over the t > 0 grid points (all points if none is positive)."""
    values = infidelity_series(traj_sim, traj_exact)
    if not values:
        raise ValueError("empty trajectories")
    later = [v for v, snap in zip(values, traj_exact) if snap.t > TIME_TOL]
    return float(np.mean(later if later else values))


def observable_matrix(
    obs: ObservableSpec,
    layout: RegisterLayout,
    code: CodeKind | str = CodeKind.GRAY,
    d_ho: int | None = None,
) -> np.ndarray:
    """Dense observable on the system register; `d_ho` defaults to every code word."""
    width = layout.system_width
    if obs.kind is ObservableKind.BOSON_NUMBER:
        d_ho = 2**layout.n_boson_qubits if d_ho is None else d_ho
        if TruncationSpec(d_ho).n_qubits != layout.n_boson_qubits:
            raise WidthError(
                f"d_ho={d_ho} does not fit {layout.n_boson_qubits} boson qubits"
            )
        spec = TruncationSpec(d_ho)
        number = encode_boson_operator(
            BosonOperator.NUMBER, spec, BitCode.for_truncation(code, spec)
        )
        return embed_operator(to_dense(number), layout.boson_qubits, width)

    if not 0 <= obs.spin < layout.n_spins:
        raise ValueError(f"spin {obs.spin} outside 0..{layout.n_spins - 1}")
    if obs.kind is ObservableKind.SIGMA_Z:
        return embed_operator(SIGMA_Z, (layout.spin_qubits[obs.spin],), width)
    if obs.kind is ObservableKind.SIGMA_X:
        return embed_operator(PAULI_X, (layout.spin_qubits[obs.spin],), width)
    raise ValueError(f"{obs.kind.value} is a correlation, use connected_correlation")


def expectation(
    rho,
    obs: ObservableSpec,
    layout: RegisterLayout,
    code: CodeKind | str = CodeKind.GRAY,
    d_ho: int | None = None,
) -> float:
    if obs.kind in (ObservableKind.CZZ, ObservableKind.CXX):
        pair = CorrelationPair.ZZ if obs.kind is ObservableKind.CZZ else CorrelationPair.XX
        return connected_correlation(rho, pair, layout)
    value = np.trace(_matrix(rho) @ observable_matrix(obs, layout, code, d_ho))
    return float(value.real)


def connected_correlation(
    rho, pair: CorrelationPair | str, layout: RegisterLayout
) -> float:
    """<s1 s2> - <s1><s2> for the two spins of the register."""
    if layout.n_spins != 2:
        raise ValueError(f"correlations need exactly 2 spins, got {layout.n_spins}")
    pair = CorrelationPair(pair)
    kind = ObservableKind.SIGMA_Z if pair is CorrelationPair.ZZ else ObservableKind.SIGMA_X
    data = _matrix(rho)
    first = observable_matrix(ObservableSpec(kind, 0), layout)
    second = observable_matrix(ObservableSpec(kind, 1), layout)
    joint = np.trace(data @ first @ second).real
    value = float(joint - np.trace(data @ first).real * np.trace(data @ second).real)
    if abs(value) > 1 + 1e-9:
        raise ValueError(f"correlation {value} outside [-1, 1]; state is not physical")
    return value
