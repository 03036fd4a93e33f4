# tests/test_simulator.py
from functools import reduce

import numpy as np
import pytest

from src.circuits import CX_MATRIX, Circuit, Gate, GateKind
from src.errors import NonNativeGateError, SingularConfusionError, WidthError
from src.models import DensityMatrix
from src.noise import build_noise_model
from src.simulator import (
    CountsTable,
    circuit_unitary,
    mitigate_distribution,
    mitigate_readout,
    project_to_simplex,
    sample_counts,
    simulate,
)

NATIVE_PAIR = Circuit(
    2,
    (
        Gate(GateKind.SX, (0,)),
        Gate(GateKind.RZ, (0,), 0.4),
        Gate(GateKind.CX, (0, 1)),
        Gate(GateKind.X, (1,)),
        Gate(GateKind.BARRIER, (0, 1)),
        Gate(GateKind.SX, (1,)),
        Gate(GateKind.BARRIER, (1, 0)),
    ),
)


def _confusion(p10: float, p01: float) -> np.ndarray:
    return np.array([[1 - p10, p10], [p01, 1 - p01]])


# --- state evolution ----------------------------------------------------------------


def test_x_flips_the_leftmost_qubit():
    result = simulate(Circuit(2, (Gate(GateKind.X, (0,)),)))
    np.testing.assert_allclose(result.final.data, DensityMatrix.basis("10").data)


def test_reset_returns_to_ground():
    c = Circuit(1, (Gate(GateKind.SX, (0,)), Gate(GateKind.RESET, (0,))))
    np.testing.assert_allclose(simulate(c).final.data, DensityMatrix.basis("0").data, atol=1e-12)


def test_barrier_snapshots_follow_listed_order():
    result = simulate(Circuit(2, (Gate(GateKind.X, (0,)), Gate(GateKind.BARRIER, (1, 0)))))
    np.testing.assert_allclose(result.snapshots[0].data, DensityMatrix.basis("01").data)


def test_simulation_matches_circuit_unitary(random_state):
    rho0 = random_state(2)
    c = NATIVE_PAIR
    u = circuit_unitary(c)
    np.testing.assert_allclose(
        simulate(c, rho0=rho0).final.data, u @ rho0.data @ u.conj().T, atol=1e-12
    )


def test_circuit_unitary_operand_order():
    np.testing.assert_allclose(circuit_unitary(Circuit(2, (Gate(GateKind.CX, (0, 1)),))), CX_MATRIX)
    swapped = circuit_unitary(Circuit(2, (Gate(GateKind.CX, (1, 0)),)))
    assert swapped[0b11, 0b01] == 1
    with pytest.raises(ValueError):
        circuit_unitary(Circuit(1, (Gate(GateKind.RESET, (0,)),)))


def test_simulation_limits():
    with pytest.raises(WidthError):
        simulate(Circuit(7))
    with pytest.raises(WidthError):
        simulate(Circuit(2), rho0=DensityMatrix.basis("0"))


def test_noisy_simulation_needs_native_gates(calibration):
    noise = build_noise_model(calibration, 0.1, pairs=[(0, 1)])
    with pytest.raises(NonNativeGateError):
        simulate(Circuit(2, (Gate(GateKind.RY, (0,), 0.3),)), noise)


def test_zero_noise_matches_noiseless(calibration):
    """The noisy path at xi = 0 reproduces the ideal states."""
    noise = build_noise_model(calibration, 0.0, pairs=[(0, 1)])
    ideal = simulate(NATIVE_PAIR)
    noisy = simulate(NATIVE_PAIR, noise)
    for a, b in zip(ideal.snapshots, noisy.snapshots):
        np.testing.assert_allclose(a.data, b.data, atol=1e-12)


def test_noise_reduces_purity(calibration):
    noise = build_noise_model(calibration, 1.0, pairs=[(0, 1)])
    final = simulate(NATIVE_PAIR, noise).final
    final.validate()
    assert final.purity < 1.0 - 1e-4


# --- sampling -------------------------------------------------------------------------


def test_sampling_is_seeded():
    rho = DensityMatrix.maximally_mixed(2)
    a = sample_counts(rho, 1000, seed=7)
    b = sample_counts(rho, 1000, seed=7)
    assert a == b
    assert a.shots == sum(a.counts.values()) == 1000
    assert set(a.counts) <= {"00", "01", "10", "11"}


def test_sampling_pure_basis_state():
    counts = sample_counts(DensityMatrix.basis("101"), 50, seed=0)
    assert counts.counts == {"101": 50}
    assert counts.distribution()[0b101] == pytest.approx(1.0)


def test_sampling_rejects_bad_arguments():
    with pytest.raises(ValueError):
        sample_counts(DensityMatrix.basis("0"), 0)
    with pytest.raises(WidthError):
        sample_counts(DensityMatrix.basis("00"), 10, readout=[np.eye(2)])


def test_counts_table_consistency():
    with pytest.raises(ValueError):
        CountsTable({"0": 3}, 4)
    table = CountsTable({"01": 1, "11": 3}, 4)
    np.testing.assert_allclose(table.distribution(), [0, 0.25, 0, 0.75])


# --- readout mitigation ---------------------------------------------------------------


def test_project_to_simplex():
    inside = np.array([0.2, 0.3, 0.5])
    np.testing.assert_allclose(project_to_simplex(inside), inside)
    np.testing.assert_allclose(project_to_simplex(np.array([1.2, -0.2])), [1.0, 0.0])
    projected = project_to_simplex(np.array([0.6, 0.6, -0.1, -0.05]))
    assert projected.sum() == pytest.approx(1.0)
    assert projected.min() >= 0.0


def test_mitigation_inverts_exact_readout(rng):
    """Applying the confusion and then mitigating returns the true distribution."""
    confusion = [_confusion(0.03, 0.05), _confusion(0.02, 0.04), _confusion(0.1, 0.01)]
    true = rng.dirichlet(np.ones(8))
    observed = reduce(np.kron, confusion).T @ true
    result = mitigate_distribution(observed, confusion)
    np.testing.assert_allclose(result.quasi, true, atol=1e-12)
    np.testing.assert_allclose(result.projected, true, atol=1e-12)


def test_mitigation_with_shot_noise():
    """Averaged over seeds, mitigated counts sit far closer to the truth than raw ones."""
    vector = np.zeros(8)
    vector[0b001] = vector[0b110] = np.sqrt(0.5)
    rho = DensityMatrix.pure(vector)
    true = rho.populations()
    confusion = [_confusion(0.03349, 0.03349)] * 3
    mitigated, raw = [], []
    for seed in range(100):
        counts = sample_counts(rho, 8192, readout=confusion, seed=seed)
        result = mitigate_readout(counts, confusion)
        mitigated.append(0.5 * np.abs(result.projected - true).sum())
        raw.append(0.5 * np.abs(counts.distribution() - true).sum())
    assert np.mean(mitigated) < 2 * np.mean(raw)
    assert np.mean(mitigated) < 0.02 < np.mean(raw)


def test_singular_confusion_rejected():
    with pytest.raises(SingularConfusionError):
        mitigate_distribution(np.array([0.5, 0.5]), [np.full((2, 2), 0.5)])
