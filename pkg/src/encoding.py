# src/encoding.py
"""
Compact binary encodings of a truncated harmonic oscillator.

Level l is stored as the code word of l on Q_B = ceil(log2 d_HO) qubits, most
significant bit on the lowest qubit index ("hi" before "lo"). Every operator
is expanded as a sum of level transitions |l><l'|, and each transition is a
tensor product of single-qubit projectors and ladder operators:

    |0><0| = (I + Z)/2    |1><1| = (I - Z)/2
    |0><1| = (X + iY)/2   |1><0| = (X - iY)/2
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from enum import Enum
from functools import lru_cache

import numpy as np

from src.errors import LevelOutOfRangeError, WidthError
from src.constants import MAX_DENSE_WIDTH
from src.models import ModelParams
from src.pauli import PauliString, PauliSum, canonicalize

logger = logging.getLogger(__name__)


class CodeKind(str, Enum):
    GRAY = "gray"
    STANDARD_BINARY = "standard_binary"


class BosonOperator(str, Enum):
    A = "a"
    A_DAGGER = "a_dagger"
    NUMBER = "number"


@dataclass(frozen=True)
class TruncationSpec:
    d_ho: int

    def __post_init__(self):
        if self.d_ho < 2:
            raise ValueError(f"d_HO must be at least 2, got {self.d_ho}")

    @property
    def n_qubits(self) -> int:
        return max(1, math.ceil(math.log2(self.d_ho)))


@dataclass(frozen=True)
class BitCode:
    kind: CodeKind
    width: int

    @classmethod
    def for_truncation(cls, kind: CodeKind | str, spec: TruncationSpec) -> BitCode:
        return cls(CodeKind(kind), spec.n_qubits)

    def word(self, level: int) -> str:
        return code_bits(level, self)

    def permutation(self, d_ho: int) -> np.ndarray:
        """Isometry P (2^width x d_ho) with P[code(l), l] = 1."""
        out = np.zeros((2**self.width, d_ho))
        for level in range(d_ho):
            out[int(self.word(level), 2), level] = 1.0
        return out


def code_bits(i: int, code: BitCode) -> str:
    if not 0 <= i < 2**code.width:
        raise LevelOutOfRangeError(f"level {i} does not fit in {code.width} bits")
    value = i ^ (i >> 1) if code.kind is CodeKind.GRAY else i
    return format(value, f"0{code.width}b")


# bit pair (row, column) -> single-qubit Pauli expansion
_BIT_PAIR = {
    ("0", "0"): {"I": 0.5, "Z": 0.5},
    ("1", "1"): {"I": 0.5, "Z": -0.5},
    ("0", "1"): {"X": 0.5, "Y": 0.5j},
    ("1", "0"): {"X": 0.5, "Y": -0.5j},
}


def encode_transition(
    l: int, lp: int, code: BitCode, d_ho: int | None = None  # noqa: E741
) -> PauliSum:
    """Pauli sum of |code(l)><code(lp)|."""
    limit = d_ho if d_ho is not None else 2**code.width
    for level in (l, lp):
        if not 0 <= level < limit:
            raise LevelOutOfRangeError(f"level {level} outside 0..{limit - 1}")
    row, col = code_bits(l, code), code_bits(lp, code)

    partial: dict[str, complex] = {"": 1.0}
    for bit_pair in zip(row, col):
        factor = _BIT_PAIR[bit_pair]
        partial = {
            letters + letter: coeff * c
            for letters, coeff in partial.items()
            for letter, c in factor.items()
        }
    return canonicalize(
        PauliSum(code.width, tuple(PauliString(k, v) for k, v in partial.items()))
    )


def boson_matrix(which: BosonOperator, d_ho: int) -> np.ndarray:
    """Truncated operator in the Fock basis."""
    lowering = np.diag(np.sqrt(np.arange(1, d_ho)), k=1)
    if which is BosonOperator.A:
        return lowering
    if which is BosonOperator.A_DAGGER:
        return lowering.T
    return np.diag(np.arange(d_ho, dtype=float))


def encode_boson_operator(
    which: BosonOperator | str, spec: TruncationSpec, code: BitCode
) -> PauliSum:
    which = BosonOperator(which)
    if code.width != spec.n_qubits:
        raise WidthError(f"code width {code.width} != Q_B {spec.n_qubits}")
    matrix = boson_matrix(which, spec.d_ho)
    total = PauliSum(code.width)
    for l, lp in zip(*np.nonzero(matrix)):  # noqa: E741
        total = total + encode_transition(int(l), int(lp), code, spec.d_ho) * float(
            matrix[l, lp]
        )
    return canonicalize(total)


def _embed(local: PauliSum, qubits: tuple[int, ...], width: int) -> PauliSum:
    """Place a sum defined on len(qubits) qubits onto the given register positions."""
    terms = []
    for term in local.terms:
        letters = ["I"] * width
        for q, letter in zip(qubits, term.letters):
            letters[q] = letter
        terms.append(PauliString("".join(letters), term.coefficient))
    return PauliSum(width, tuple(terms))


@lru_cache(maxsize=64)
def hamiltonian_with_offset(params: ModelParams, code_kind: CodeKind) -> PauliSum:
    """Encoded Hamiltonian on the system register, identity term included."""
    layout = params.layout
    width = layout.system_width
    if width > MAX_DENSE_WIDTH:
        raise WidthError(
            f"{params.n_spins} spins with d_HO={params.d_ho} need {width} system "
            f"qubits, above the dense limit of {MAX_DENSE_WIDTH}"
        )
    spec = TruncationSpec(params.d_ho)
    code = BitCode.for_truncation(code_kind, spec)
    bosons = layout.boson_qubits

    number = encode_boson_operator(BosonOperator.NUMBER, spec, code)
    quadrature = encode_boson_operator(BosonOperator.A, spec, code) + encode_boson_operator(
        BosonOperator.A_DAGGER, spec, code
    )

    # Oscillator
    total = _embed(number, bosons, width) * params.omega
    for s in layout.spin_qubits:
        # Spin fields; spin up is qubit |1>, so sigma_z = -Z
        spin = PauliSum.from_dict(1, {"Z": -0.5 * params.h, "X": 0.5 * params.epsilon})
        total = total + _embed(spin, (s,), width)
        # Coupling sigma_x (a + a^dagger)
        coupling = PauliSum.from_dict(1, {"X": params.lambda_c}).tensor(quadrature)
        total = total + _embed(coupling, (s,) + bosons, width)
    return canonicalize(total)


def encode_hamiltonian(
    params: ModelParams, code_kind: CodeKind | str = CodeKind.GRAY
) -> PauliSum:
    """
    Encoded spin-boson Hamiltonian on the system register, identity dropped.

    Equal parameters return the very same PauliSum object, so the circuit
    builder and the exact oracle share one Hamiltonian.
    """
    return _encoded_without_identity(params, CodeKind(code_kind))


@lru_cache(maxsize=64)
def _encoded_without_identity(params: ModelParams, code_kind: CodeKind) -> PauliSum:
    h = canonicalize(hamiltonian_with_offset(params, code_kind).without_identity())
    logger.debug("encoded Hamiltonian (%d terms): %s", len(h), h)
    return h
