# src/oracle.py
"""
Reference open-system dynamics.

The master equation

    d rho/dt = -i[H, rho] + sum_k rate_k (L_k rho L_k^dag - {L_k^dag L_k, rho}/2)

is vectorized by column stacking, vec(A rho B) = (B^T kron A) vec(rho), and
integrated with fixed-step RK4.
"""
from __future__ import annotations

import logging
import math
from functools import lru_cache
from typing import Sequence

import numpy as np
import scipy.sparse as sp

from src.constants import (
    ORACLE_HERMITIAN_DRIFT,
    ORACLE_MAX_REFINEMENTS,
    ORACLE_MAX_STEP,
    ORACLE_REFINE_TOL,
    ORACLE_TRACE_DRIFT,
    TIME_TOL,
)
from src.encoding import CodeKind
from src.errors import OracleDriftError, WidthError
from src.metrics import fidelity
from src.models import DensityMatrix, ModelParams, RateConvention, TrajectorySnapshot
from src.spin_boson import dense_hamiltonian, lindblad_operators

logger = logging.getLogger(__name__)


def build_liouvillian(
    hamiltonian: np.ndarray, jumps: Sequence[tuple[np.ndarray, float]]
) -> sp.csr_matrix:
    dim = hamiltonian.shape[0]
    eye = sp.identity(dim, format="csr", dtype=complex)
    h = sp.csr_matrix(hamiltonian)
    generator = -1j * (sp.kron(eye, h) - sp.kron(h.T, eye))
    for op, rate in jumps:
        if rate == 0:
            continue
        op = sp.csr_matrix(op)
        decay = (op.conj().T @ op).tocsr()
        generator = generator + rate * (
            sp.kron(op.conj(), op)
            - 0.5 * sp.kron(eye, decay)
            - 0.5 * sp.kron(decay.T, eye)
        )
    return sp.csr_matrix(generator)


@lru_cache(maxsize=16)
def cached_liouvillian(
    params: ModelParams, convention: RateConvention, code: CodeKind
) -> sp.csr_matrix:
    logger.debug("building Liouvillian for %s (%s, %s)", params, convention.value, code.value)
    return build_liouvillian(
        dense_hamiltonian(params, code), lindblad_operators(params, convention)
    )


def _vec(rho: np.ndarray) -> np.ndarray:
    return rho.reshape(-1, order="F")


def _unvec(v: np.ndarray, dim: int) -> np.ndarray:
    return v.reshape(dim, dim, order="F")


def _rk4_step(generator: sp.csr_matrix, v: np.ndarray, h: float) -> np.ndarray:
    k1 = generator @ v
    k2 = generator @ (v + 0.5 * h * k1)
    k3 = generator @ (v + 0.5 * h * k2)
    k4 = generator @ (v + h * k3)
    return v + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)


def _integrate(
    generator: sp.csr_matrix, rho0: np.ndarray, t_grid: Sequence[float], max_step: float
) -> list[np.ndarray]:
    dim = rho0.shape[0]
    states = [rho0.copy()]
    v = _vec(rho0)
    worst = 0.0
    for t0, t1 in zip(t_grid[:-1], t_grid[1:]):
        span = t1 - t0
        n_sub = max(1, math.ceil(span / max_step - 1e-12))
        h = span / n_sub
        for _ in range(n_sub):
            v = _rk4_step(generator, v, h)
            rho = _unvec(v, dim)
            sym = 0.5 * (rho + rho.conj().T)
            correction = float(np.max(np.abs(rho - sym)))
            worst = max(worst, correction)
            if correction > ORACLE_HERMITIAN_DRIFT:
                logger.warning("symmetrization correction %.3e at t=%.4f", correction, t1)
                raise OracleDriftError(
                    f"non-Hermitian drift {correction:.3e} exceeds {ORACLE_HERMITIAN_DRIFT}"
                )
            v = _vec(sym)
        rho = _unvec(v, dim).copy()
        drift = abs(np.trace(rho) - 1.0)
        if drift > ORACLE_TRACE_DRIFT:
            raise OracleDriftError(
                f"trace drift {drift:.3e} at t={t1}; the internal step is too coarse"
            )
        states.append(rho)
    logger.debug("largest symmetrization correction %.3e", worst)
    return states


def evolve_exact(
    rho0: DensityMatrix,
    params: ModelParams,
    t_grid: Sequence[float],
    convention: RateConvention | str = RateConvention.PAPER_COLLISION,
    code: CodeKind | str = CodeKind.GRAY,
    max_step: float = ORACLE_MAX_STEP,
) -> list[TrajectorySnapshot]:
    """Reference states on `t_grid`, refining the RK4 step until it has converged."""
    t_grid = [float(t) for t in t_grid]
    if not t_grid or abs(t_grid[0]) > TIME_TOL:
        raise ValueError("time grid must start at 0")
    if any(b <= a for a, b in zip(t_grid[:-1], t_grid[1:])):
        raise ValueError("time grid must be strictly ascending")
    generator = cached_liouvillian(params, RateConvention(convention), CodeKind(code))
    if generator.shape[0] != rho0.dim**2:
        raise WidthError(
            f"initial state has dimension {rho0.dim}, model needs {math.isqrt(generator.shape[0])}"
        )

    step = max_step
    states = _integrate(generator, rho0.data, t_grid, step)
    for _ in range(ORACLE_MAX_REFINEMENTS):
        step /= 2
        finer = _integrate(generator, rho0.data, t_grid, step)
        change = 1.0 - fidelity(states[-1], finer[-1])
        states = finer
        logger.debug("RK4 step %.2e changed the final state by %.2e", step, change)
        if change < ORACLE_REFINE_TOL:
            break
    else:
        logger.warning("oracle did not converge to %.1e after refinement", ORACLE_REFINE_TOL)

    return [TrajectorySnapshot(t, DensityMatrix(rho)) for t, rho in zip(t_grid, states)]
