# tests/test_pauli.py
import itertools

import numpy as np
import pytest

from src.errors import WidthError
from src.pauli import (
    PauliString,
    PauliSum,
    canonicalize,
    multiply,
    string_to_dense,
    to_dense,
)


def test_multiply_x_y_gives_iz():
    """X times Y is iZ."""
    product = multiply(PauliString("X"), PauliString("Y"))
    assert product.letters == "Z"
    assert product.coefficient == pytest.approx(1j)


def test_multiply_is_involutive():
    """Z times Z is the identity."""
    product = multiply(PauliString("Z"), PauliString("Z"))
    assert product.letters == "I"
    assert product.coefficient == pytest.approx(1.0)


def test_multiply_two_sites_tracks_phase():
    """Per-site phases of XZ * ZX cancel to give YY with coefficient 1."""
    a, b = PauliString("XZ", 2.0), PauliString("ZX", 0.5)
    product = multiply(a, b)
    assert product.letters == "YY"
    assert product.coefficient == pytest.approx(1.0)
    np.testing.assert_allclose(
        string_to_dense(product), string_to_dense(a) @ string_to_dense(b), atol=1e-12
    )


def test_multiply_matches_dense_product(rng):
    """Dense realization is multiplicative for random strings."""
    for _ in range(25):
        width = int(rng.integers(1, 5))
        a = PauliString("".join(rng.choice(list("IXYZ"), width)), complex(rng.normal(), rng.normal()))
        b = PauliString("".join(rng.choice(list("IXYZ"), width)), complex(rng.normal(), rng.normal()))
        np.testing.assert_allclose(
            string_to_dense(multiply(a, b)),
            string_to_dense(a) @ string_to_dense(b),
            atol=1e-12,
        )


def test_multiply_width_mismatch():
    with pytest.raises(WidthError):
        multiply(PauliString("X"), PauliString("XX"))


def test_invalid_letters_rejected():
    with pytest.raises(ValueError):
        PauliString("XA")


def test_canonicalize_cancels_and_merges():
    """Opposite terms vanish, equal patterns merge."""
    empty = canonicalize(PauliSum(1, (PauliString("X", 1), PauliString("X", -1))))
    assert len(empty) == 0
    merged = canonicalize(PauliSum(1, (PauliString("Z", 0.5), PauliString("Z", 0.5))))
    assert merged.as_dict() == {"Z": pytest.approx(1.0)}


def test_canonicalize_drops_tiny_coefficients():
    s = PauliSum.from_dict(2, {"XX": 1e-13, "ZZ": 1.0})
    assert list(canonicalize(s).as_dict()) == ["ZZ"]


def test_canonicalize_orders_and_is_idempotent():
    """Terms come out in I < X < Y < Z order and a second pass changes nothing."""
    s = PauliSum.from_dict(2, {"ZI": 1, "XY": 2, "IZ": 3, "XX": 4})
    once = canonicalize(s)
    assert [t.letters for t in once.terms] == ["IZ", "XX", "XY", "ZI"]
    assert canonicalize(once) == once


def test_dense_identity_and_z():
    assert np.array_equal(to_dense(PauliSum.identity(1)), np.eye(2))
    assert np.array_equal(to_dense(PauliSum.from_dict(1, {"Z": 1})), np.diag([1, -1]))


def test_dense_qubit_zero_is_leftmost_factor():
    """X on qubit 0 flips the most significant bit of the basis index."""
    dense = to_dense(PauliSum.from_dict(2, {"XI": 1}))
    assert dense[2, 0] == 1
    assert dense[1, 0] == 0


def test_dense_is_linear(rng):
    letters = ["".join(p) for p in itertools.product("IXYZ", repeat=2)]
    c1 = {p: rng.normal() for p in letters}
    c2 = {p: rng.normal() for p in letters}
    both = {p: 2 * c1[p] - 3 * c2[p] for p in letters}
    np.testing.assert_allclose(
        to_dense(PauliSum.from_dict(2, both)),
        2 * to_dense(PauliSum.from_dict(2, c1)) - 3 * to_dense(PauliSum.from_dict(2, c2)),
        atol=1e-12,
    )


def test_dense_width_limit():
    with pytest.raises(WidthError):
        to_dense(PauliSum.identity(9))


def test_sum_algebra():
    """Addition, scalar and sum products, adjoint and identity offset."""
    x = PauliSum.from_dict(1, {"X": 1.0})
    y = PauliSum.from_dict(1, {"Y": 1.0})
    assert canonicalize(x * y).as_dict() == {"Z": pytest.approx(1j)}
    assert canonicalize(x * y).adjoint().as_dict() == {"Z": pytest.approx(-1j)}
    assert not canonicalize(x * y).is_hermitian()
    assert (x + y).is_hermitian()
    shifted = 2.0 * x + PauliSum.identity(1, 0.25)
    assert shifted.identity_offset() == pytest.approx(0.25)
    assert shifted.without_identity().as_dict() == {"X": pytest.approx(2.0)}


def test_tensor_places_factors_in_order():
    s = PauliSum.from_dict(1, {"X": 2.0}).tensor(PauliSum.from_dict(2, {"ZY": 0.5}))
    assert s.width == 3
    assert s.as_dict() == {"XZY": pytest.approx(1.0)}


def test_text_rendering():
    s = canonicalize(PauliSum.from_dict(2, {"XX": 1.5, "ZZ": -2.0}))
    assert str(s) == "1.5 XX - 2 ZZ"
    assert str(PauliSum(2)) == "0"
