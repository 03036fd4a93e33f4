# src/spin_boson.py
"""Dense operators of the open spin-boson model on the system register."""
from __future__ import annotations

import numpy as np

from src.encoding import BitCode, CodeKind, TruncationSpec, encode_hamiltonian
from src.errors import LevelOutOfRangeError
from src.models import (
    DensityMatrix,
    InitialStateSpec,
    ModelParams,
    RateConvention,
    SpinState,
)
from src.pauli import to_dense
from src.utils import embed_operator

# |down><up| with spin up stored as qubit |1>
SPIN_LOWERING = np.array([[0, 1], [0, 0]], dtype=complex)


def dense_hamiltonian(
    params: ModelParams, code: CodeKind | str = CodeKind.GRAY
) -> np.ndarray:
    return to_dense(encode_hamiltonian(params, code))


def lindblad_operators(
    params: ModelParams,
    convention: RateConvention | str = RateConvention.PAPER_COLLISION,
) -> list[tuple[np.ndarray, float]]:
    """
    One spin-lowering operator per spin with its rate.

    The rate is the effective one, so the dissipator is always written as
    rate * (L rho L^dag - {L^dag L, rho}/2).
    """
    layout = params.layout
    rate = RateConvention(convention).effective_rate(params.gamma)
    return [
        (embed_operator(SPIN_LOWERING, (q,), layout.system_width), rate)
        for q in layout.spin_qubits
    ]


def initial_density_matrix(
    spec: InitialStateSpec,
    params: ModelParams,
    code: CodeKind | str = CodeKind.GRAY,
) -> DensityMatrix:
    if len(spec.spin_states) != params.n_spins:
        raise ValueError(
            f"{len(spec.spin_states)} spin states given for {params.n_spins} spins"
        )
    if spec.boson_level >= params.d_ho:
        raise LevelOutOfRangeError(
            f"boson level {spec.boson_level} outside 0..{params.d_ho - 1}"
        )
    layout = params.layout
    word = BitCode.for_truncation(code, TruncationSpec(params.d_ho)).word(spec.boson_level)

    bits = ["0"] * layout.system_width
    for q, state in zip(layout.spin_qubits, spec.spin_states):
        bits[q] = "1" if state is SpinState.UP else "0"
    for q, bit in zip(layout.boson_qubits, word):
        bits[q] = bit
    return DensityMatrix.basis("".join(bits))

