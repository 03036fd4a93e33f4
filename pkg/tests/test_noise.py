# tests/test_noise.py
import json

import numpy as np
import pytest

from src.circuits import Gate, GateKind
from src.errors import CalibrationError, ChannelError
from src.noise import (
    QuantumChannel,
    average_gate_fidelity,
    build_noise_model,
    confusion_matrix,
    depolarizing_channel,
    depolarizing_probability,
    error_source_ratio,
    gate_channel,
    load_calibration,
    scale_calibration,
    thermal_relaxation_channel,
)

PLUS = np.full((2, 2), 0.5, dtype=complex)
EXCITED = np.diag([0.0, 1.0]).astype(complex)


# --- calibration documents ----------------------------------------------------


def test_bundled_calibration(calibration):
    assert calibration.n_qubits == 7
    assert calibration.qubits[0].t1_us == pytest.approx(139.01)
    assert calibration.gate_entry("cx", (3, 5)).error == pytest.approx(0.01109)
    assert calibration.gate_entry(GateKind.SX, (2,)).time_ns == pytest.approx(35.556)


def test_gate_entry_prefers_exact_operands(tmp_path):
    doc = {
        "qubits": [{"t1_us": 100, "t2_us": 80}, {"t1_us": 100, "t2_us": 80}],
        "gates": [
            {"kind": "cx", "error": 0.01, "time_ns": 300},
            {"kind": "cx", "qubits": [1, 0], "error": 0.02, "time_ns": 400},
        ],
    }
    path = tmp_path / "cal.json"
    path.write_text(json.dumps(doc))
    cal = load_calibration(path)
    assert cal.gate_entry("cx", (1, 0)).error == pytest.approx(0.02)
    assert cal.gate_entry("cx", (0, 1)).error == pytest.approx(0.01)
    with pytest.raises(CalibrationError):
        cal.gate_entry("sx", (0,))


@pytest.mark.parametrize(
    "content",
    [
        "not json",
        json.dumps({"qubits": [{"t1_us": 10, "t2_us": 30}], "gates": []}),
        json.dumps({"qubits": [{"t1_us": -1, "t2_us": 1}], "gates": []}),
        json.dumps({"qubits": [], "gates": [], "extra": 1}),
    ],
)
def test_bad_calibration_documents(tmp_path, content):
    path = tmp_path / "bad.json"
    path.write_text(content)
    with pytest.raises(CalibrationError):
        load_calibration(path)


def test_missing_calibration_file(tmp_path):
    with pytest.raises(CalibrationError):
        load_calibration(tmp_path / "absent.json")


# --- channels --------------------------------------------------------------------


@pytest.mark.parametrize("t1, t2", [(139.01, 44.82), (50.0, 80.0), (20.0, 20.0)])
def test_thermal_relaxation_populations_and_coherences(t1, t2):
    """Excited population decays with T1 and coherences with T2, in both branches."""
    t = 5.0
    ch = thermal_relaxation_channel(t1, t2, t)
    assert ch.is_cptp()
    decayed = ch.apply(EXCITED)
    assert decayed[0, 0].real == pytest.approx(1 - np.exp(-t / t1), abs=1e-12)
    dephased = ch.apply(PLUS)
    assert abs(dephased[0, 1]) == pytest.approx(0.5 * np.exp(-t / t2), abs=1e-12)


def test_thermal_relaxation_zero_time_is_identity():
    assert thermal_relaxation_channel(139.01, 44.82, 0.0).is_identity


@pytest.mark.parametrize(
    "t1, t2, t, kwargs",
    [(0.0, 1.0, 1.0, {}), (10.0, 25.0, 1.0, {}), (10.0, 5.0, -1.0, {}), (10.0, 5.0, 1.0, {"excited_population": 0.1})],
)
def test_thermal_relaxation_rejects(t1, t2, t, kwargs):
    with pytest.raises(CalibrationError):
        thermal_relaxation_channel(t1, t2, t, **kwargs)


def test_calibrated_thermal_infidelities():
    """Relaxation alone accounts for most of the jakarta gate error."""
    single = thermal_relaxation_channel(139.01, 44.82, 0.035556)
    assert 1 - average_gate_fidelity(single) == pytest.approx(3.0699e-4, rel=1e-3)
    pair = thermal_relaxation_channel(139.01, 44.82, 0.454095)
    assert 1 - average_gate_fidelity(pair.tensor(pair)) == pytest.approx(9.3414e-3, rel=1e-3)


def test_depolarizing_channel():
    ch = depolarizing_channel(0.3, 1)
    assert ch.is_cptp()
    assert average_gate_fidelity(ch) == pytest.approx(0.85)
    np.testing.assert_allclose(depolarizing_channel(1.0, 1).apply(EXCITED), np.eye(2) / 2, atol=1e-12)
    assert depolarizing_channel(0.0, 2).is_identity
    with pytest.raises(ChannelError):
        depolarizing_channel(1.5, 1)


def test_average_gate_fidelity_against_target():
    x = np.array([[0, 1], [1, 0]], dtype=complex)
    assert average_gate_fidelity(QuantumChannel.unitary(x), x) == pytest.approx(1.0)
    assert average_gate_fidelity(QuantumChannel.unitary(x)) == pytest.approx(1 / 3)
    with pytest.raises(ChannelError):
        average_gate_fidelity(QuantumChannel((0.5 * np.eye(2),)))


def test_compose_reduces_kraus_rank():
    """Composition keeps the action and never carries more than d^2 operators."""
    first = thermal_relaxation_channel(100.0, 60.0, 3.0).tensor(QuantumChannel.identity(2))
    second = depolarizing_channel(0.05, 2)
    combined = second.compose(first)
    assert len(combined.kraus) <= 16
    rho = np.kron(PLUS, EXCITED)
    np.testing.assert_allclose(combined.apply(rho), second.apply(first.apply(rho)), atol=1e-12)
    with pytest.raises(ChannelError):
        second.compose(QuantumChannel.identity(2))


def test_from_choi_rejects_non_positive():
    with pytest.raises(ChannelError):
        QuantumChannel.from_choi(np.diag([1.0, -0.5, 0.0, 0.5]))


def test_depolarizing_probability_clamps_to_zero():
    thermal = thermal_relaxation_channel(10.0, 5.0, 1.0)
    assert depolarizing_probability(1e-6, thermal) == 0.0


# --- noise models ------------------------------------------------------------------


@pytest.mark.parametrize("xi", [1.0, 0.1, 0.01])
@pytest.mark.parametrize("kind, qubits, error", [("sx", (0,), 0.000322), ("x", (4,), 0.000322), ("cx", (1, 3), 0.01109)])
def test_gate_channels_hit_scaled_error(calibration, xi, kind, qubits, error):
    model = build_noise_model(calibration, xi, pairs=[(1, 3)])
    ch = model.channel_for(Gate(kind, qubits))
    assert ch.is_cptp()
    assert average_gate_fidelity(ch) == pytest.approx(1 - xi * error, abs=1e-6)


def test_rz_is_noiseless(calibration):
    assert gate_channel(calibration, GateKind.RZ, (0,)).is_identity


def test_zero_noise_factor_gives_identity_channels(calibration):
    model = build_noise_model(calibration, 0.0, pairs=[(0, 1), (1, 0)])
    assert all(ch.is_identity for ch in model.channels.values())
    for matrix in model.readout(range(7)):
        np.testing.assert_allclose(matrix, np.eye(2))


def test_scale_calibration(calibration):
    scaled = scale_calibration(calibration, 0.5)
    assert scaled.qubits[0].t1_us == calibration.qubits[0].t1_us
    assert scaled.qubits[0].p10 == pytest.approx(0.5 * 0.03349)
    assert scaled.gate_entry("cx", (0, 1)).time_ns == pytest.approx(0.5 * 454.095)
    with pytest.raises(ValueError):
        scale_calibration(calibration, 1.5)


def test_confusion_matrix_rows_are_distributions(calibration):
    c = confusion_matrix(calibration.qubits[0])
    np.testing.assert_allclose(c.sum(axis=1), 1.0)
    assert c[0, 1] == pytest.approx(0.03349)


def test_noise_model_lookup_and_remap(calibration):
    model = build_noise_model(calibration, 0.1, pairs=[(3, 5)])
    assert model.channel_for(Gate(GateKind.BARRIER, (0, 1))) is None
    with pytest.raises(CalibrationError):
        model.channel_for(Gate(GateKind.CX, (5, 3)))
    local = model.remapped((3, 5))
    assert local.channel_for(Gate(GateKind.CX, (0, 1))) is model.channel_for(Gate(GateKind.CX, (3, 5)))
    assert len(local.readout([0, 1])) == 2
    np.testing.assert_allclose(local.readout([7])[0], np.eye(2))


def test_error_source_ratio(calibration):
    """Relaxation outweighs depolarization about fifteen to one on jakarta."""
    assert error_source_ratio(calibration) == pytest.approx(15.4, abs=0.1)
