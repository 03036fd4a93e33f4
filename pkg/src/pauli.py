# src/pauli.py
"""
Weighted Pauli strings and sums.

Qubit 0 is the leftmost letter and the leftmost tensor factor of every dense
realization, so "XZ" means X on qubit 0 and Z on qubit 1.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import reduce

import numpy as np

from src.constants import COEFF_TOL, MAX_DENSE_WIDTH
from src.errors import WidthError
from src.utils import format_coefficient

PAULI_LETTERS = "IXYZ"

PAULI_MATRICES = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}

# (left, right) -> (phase, letter) for single-site products
_SITE_PRODUCTS: dict[tuple[str, str], tuple[complex, str]] = {
    ("X", "Y"): (1j, "Z"),
    ("Y", "Z"): (1j, "X"),
    ("Z", "X"): (1j, "Y"),
    ("Y", "X"): (-1j, "Z"),
    ("Z", "Y"): (-1j, "X"),
    ("X", "Z"): (-1j, "Y"),
}


def _site_product(a: str, b: str) -> tuple[complex, str]:
    if a == "I":
        return 1, b
    if b == "I":
        return 1, a
    if a == b:
        return 1, "I"
    return _SITE_PRODUCTS[(a, b)]


@dataclass(frozen=True)
class PauliString:
    letters: str
    coefficient: complex = 1.0

    def __post_init__(self):
        if not self.letters:
            raise WidthError("a Pauli string needs at least one qubit")
        bad = set(self.letters) - set(PAULI_LETTERS)
        if bad:
            raise ValueError(f"invalid Pauli letters {sorted(bad)} in {self.letters!r}")
        object.__setattr__(self, "coefficient", complex(self.coefficient))

    @property
    def width(self) -> int:
        return len(self.letters)

    @property
    def is_identity(self) -> bool:
        return set(self.letters) == {"I"}

    @property
    def support(self) -> tuple[int, ...]:
        """Qubits carrying a non-identity letter, ascending."""
        return tuple(i for i, p in enumerate(self.letters) if p != "I")

    def with_coefficient(self, coefficient: complex) -> PauliString:
        return PauliString(self.letters, coefficient)

    def __str__(self) -> str:
        return f"{format_coefficient(self.coefficient)} {self.letters}"


def multiply(a: PauliString, b: PauliString) -> PauliString:
    """Product a·b with the accumulated phase folded into the coefficient."""
    if a.width != b.width:
        raise WidthError(f"cannot multiply widths {a.width} and {b.width}")
    phase: complex = a.coefficient * b.coefficient
    letters = []
    for pa, pb in zip(a.letters, b.letters):
        site_phase, letter = _site_product(pa, pb)
        phase *= site_phase
        letters.append(letter)
    return PauliString("".join(letters), phase)


@dataclass(frozen=True)
class PauliSum:
    width: int
    terms: tuple[PauliString, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "terms", tuple(self.terms))
        for term in self.terms:
            if term.width != self.width:
                raise WidthError(
                    f"term {term.letters!r} has width {term.width}, sum has {self.width}"
                )

    @classmethod
    def from_dict(cls, width: int, coefficients: dict[str, complex]) -> PauliSum:
        return cls(width, tuple(PauliString(k, v) for k, v in coefficients.items()))

    @classmethod
    def identity(cls, width: int, coefficient: complex = 1.0) -> PauliSum:
        return cls(width, (PauliString("I" * width, coefficient),))

    def __len__(self) -> int:
        return len(self.terms)

    def __iter__(self):
        return iter(self.terms)

    def __add__(self, other: PauliSum) -> PauliSum:
        if other.width != self.width:
            raise WidthError(f"cannot add widths {self.width} and {other.width}")
        return PauliSum(self.width, self.terms + other.terms)

    def __mul__(self, other: complex | PauliSum) -> PauliSum:
        if isinstance(other, PauliSum):
            if other.width != self.width:
                raise WidthError(f"cannot multiply widths {self.width} and {other.width}")
            return PauliSum(
                self.width, tuple(multiply(a, b) for a in self.terms for b in other.terms)
            )
        return PauliSum(
            self.width, tuple(t.with_coefficient(t.coefficient * other) for t in self.terms)
        )

    __rmul__ = __mul__

    def as_dict(self) -> dict[str, complex]:
        return {t.letters: t.coefficient for t in canonicalize(self).terms}

    def adjoint(self) -> PauliSum:
        return PauliSum(
            self.width,
            tuple(t.with_coefficient(t.coefficient.conjugate()) for t in self.terms),
        )

    def is_hermitian(self, tol: float = COEFF_TOL) -> bool:
        return all(abs(t.coefficient.imag) <= tol for t in canonicalize(self).terms)

    def identity_offset(self) -> complex:
        return canonicalize(self).as_dict().get("I" * self.width, 0.0)

    def without_identity(self) -> PauliSum:
        return PauliSum(self.width, tuple(t for t in self.terms if not t.is_identity))

    def tensor(self, other: PauliSum) -> PauliSum:
        """self on the leading qubits, other on the trailing ones."""
        return PauliSum(
            self.width + other.width,
            tuple(
                PauliString(a.letters + b.letters, a.coefficient * b.coefficient)
                for a in self.terms
                for b in other.terms
            ),
        )

    def to_dense(self) -> np.ndarray:
        return to_dense(self)

    def __str__(self) -> str:
        if not self.terms:
            return "0"
        out = str(self.terms[0])
        for term in self.terms[1:]:
            c = term.coefficient
            if abs(c.imag) < 1e-12 and c.real < 0:
                out += f" - {format_coefficient(-c)} {term.letters}"
            else:
                out += f" + {term}"
        return out


def canonicalize(s: PauliSum) -> PauliSum:
    """Merge duplicate letter patterns, drop near-zero terms, sort lexicographically."""
    merged: dict[str, complex] = {}
    for term in s.terms:
        merged[term.letters] = merged.get(term.letters, 0) + term.coefficient
    order = {p: i for i, p in enumerate(PAULI_LETTERS)}
    keys = sorted(merged, key=lambda letters: [order[p] for p in letters])
    return PauliSum(
        s.width,
        tuple(PauliString(k, merged[k]) for k in keys if abs(merged[k]) >= COEFF_TOL),
    )


def string_to_dense(term: PauliString) -> np.ndarray:
    return term.coefficient * reduce(np.kron, [PAULI_MATRICES[p] for p in term.letters])


def to_dense(s: PauliSum) -> np.ndarray:
    if s.width > MAX_DENSE_WIDTH:
        raise WidthError(
            f"width {s.width} exceeds the dense limit of {MAX_DENSE_WIDTH} qubits"
        )
    dim = 2**s.width
    out = np.zeros((dim, dim), dtype=complex)
    for term in s.terms:
        out += string_to_dense(term)
    return out
