# tests/test_circuits.py
import math

import numpy as np
import pytest
from scipy.linalg import expm

from src.circuits import (
    Circuit,
    Gate,
    GateKind,
    assemble_evolution,
    collision_angle,
    collision_block,
    evolution_step,
    pauli_exponential,
    trotter_step,
)
from src.encoding import encode_hamiltonian
from src.errors import IdentityTermError, WidthError
from src.metrics import infidelity
from src.models import DensityMatrix, InitialStateSpec, ModelParams
from src.oracle import evolve_exact
from src.pauli import PauliString, PauliSum, string_to_dense, to_dense
from src.simulator import circuit_unitary, simulate
from src.spin_boson import initial_density_matrix


def _phase_distance(u: np.ndarray, v: np.ndarray) -> float:
    """Spectral-norm distance after removing the best global phase."""
    overlap = np.trace(u.conj().T @ v)
    phase = overlap / abs(overlap) if abs(overlap) > 1e-12 else 1.0
    return float(np.linalg.norm(u * phase - v, 2))


def _amplitude_damping(rho: np.ndarray, p: float) -> np.ndarray:
    # spin up is |1>, decay goes to |0>
    k0 = np.array([[1, 0], [0, math.sqrt(1 - p)]])
    k1 = np.array([[0, math.sqrt(p)], [0, 0]])
    return k0 @ rho @ k0.T + k1 @ rho @ k1.T


# --- collision angle and block ------------------------------------------------


def test_collision_angle_values():
    assert collision_angle(1.0, 0.2) == pytest.approx(0.4397986, abs=1e-6)
    assert collision_angle(1.0, 0.2, "eq2-literal") == pytest.approx(0.6115994, abs=1e-6)
    assert collision_angle(0.0, 0.2) == 0.0


def test_collision_angle_rejects_negative_rate():
    with pytest.raises(ValueError):
        collision_angle(-0.1, 0.2)


def _amplitude_damping_choi(p: float) -> np.ndarray:
    """sum_ij |i><j| (x) E(|i><j|), input factor first."""
    choi = np.zeros((4, 4), dtype=complex)
    for i in range(2):
        for j in range(2):
            unit = np.zeros((2, 2))
            unit[i, j] = 1.0
            choi += np.kron(unit, _amplitude_damping(unit, p))
    return choi


@pytest.mark.parametrize("convention, rate_factor", [("paper-collision", 1.0), ("eq2-literal", 2.0)])
def test_collision_block_is_amplitude_damping(convention, rate_factor):
    """Tracing out the reset aux leaves the spin amplitude-damped, Choi matrix to 1e-12."""
    rng = np.random.default_rng(20)
    bell = DensityMatrix.pure(np.array([1, 0, 0, 1]) / math.sqrt(2))
    for gamma, dt in zip(rng.uniform(0.0, 3.0, 20), rng.uniform(0.01, 0.5, 20)):
        block = collision_block(gamma, dt, spin_q=1, aux_q=2, convention=convention)
        assert [g.kind for g in block.gates] == [GateKind.CRY, GateKind.CX, GateKind.RESET]
        final = simulate(block, rho0=bell.tensor(DensityMatrix.basis("0"))).final
        choi = 2 * final.partial_trace([0, 1]).data
        p = 1 - math.exp(-rate_factor * gamma * dt)
        assert np.linalg.norm(choi - _amplitude_damping_choi(p)) < 1e-12
        np.testing.assert_allclose(
            final.partial_trace([2]).data, DensityMatrix.basis("0").data, atol=1e-12
        )


# --- Pauli exponentials and Trotter steps ----------------------------------------


@pytest.mark.parametrize("letters", ["Z", "X", "Y", "XZ", "YX", "ZIY", "XYZ"])
def test_pauli_exponential_matches_matrix_exponential(letters):
    term = PauliString(letters, -0.7)
    angle = 0.3
    expected = expm(-1j * angle * string_to_dense(term))
    assert _phase_distance(circuit_unitary(pauli_exponential(term, angle)), expected) < 1e-10


def test_pauli_exponential_gate_structure():
    """Ladder of CX, one RZ, mirrored ladder, with basis changes on X and Y."""
    c = pauli_exponential(PauliString("XIZ", 1.0), 0.5)
    kinds = [g.kind for g in c.gates]
    assert kinds.count(GateKind.CX) == 2
    assert kinds.count(GateKind.SX) == 2
    core = [g for g in c.gates if g.kind is GateKind.RZ and g.qubits == (2,)]
    assert len(core) == 1 and core[0].angle == pytest.approx(1.0)
    assert all(1 not in g.qubits for g in c.gates)


def test_pauli_exponential_rejects_identity_and_complex():
    with pytest.raises(IdentityTermError):
        pauli_exponential(PauliString("II", 1.0), 0.1)
    with pytest.raises(ValueError):
        pauli_exponential(PauliString("X", 1j), 0.1)


def test_second_order_schedule_is_symmetric():
    """Order 2 on X + Z is e^{-iX dt/2} e^{-iZ dt} e^{-iX dt/2}."""
    h = PauliSum.from_dict(1, {"X": 1.0, "Z": 1.0})
    dt = 0.4
    half = expm(-0.5j * dt * string_to_dense(PauliString("X")))
    expected = half @ expm(-1j * dt * string_to_dense(PauliString("Z"))) @ half
    assert _phase_distance(circuit_unitary(trotter_step(h, dt, 2)), expected) < 1e-10


def test_commuting_terms_are_exact():
    h = PauliSum.from_dict(2, {"ZI": 0.3, "IZ": -1.1, "ZZ": 0.7})
    for order in (1, 2):
        u = circuit_unitary(trotter_step(h, 0.9, order))
        assert _phase_distance(u, expm(-0.9j * to_dense(h))) < 1e-10


def test_trotter_error_scaling(one_spin_params):
    """Local error shrinks as dt^2 for order 1 and dt^3 for order 2."""
    h = encode_hamiltonian(one_spin_params)
    dense = to_dense(h)

    def error(dt, order):
        return _phase_distance(circuit_unitary(trotter_step(h, dt, order)), expm(-1j * dt * dense))

    assert error(0.004, 2) < error(0.004, 1)
    assert error(0.004, 1) / error(0.002, 1) > 3.0
    assert error(0.004, 2) / error(0.002, 2) > 6.0


def test_trotter_step_argument_errors():
    h = PauliSum.from_dict(1, {"X": 1.0})
    with pytest.raises(ValueError):
        trotter_step(h, 0.0, 1)
    with pytest.raises(ValueError):
        trotter_step(h, 0.1, 3)


# --- evolution circuits -----------------------------------------------------------


def test_evolution_step_has_one_collision_per_spin(two_spin_params):
    step = evolution_step(two_spin_params, order=1, dt=0.2)
    resets = [g for g in step.gates if g.kind is GateKind.RESET]
    assert sorted(g.qubits[0] for g in resets) == [0, 5]
    closed = evolution_step(two_spin_params.model_copy(update={"gamma": 0.0}), 1, 0.2)
    assert not any(g.kind is GateKind.RESET for g in closed.gates)


def test_zero_step_evolution_prepares_and_measures(one_spin_params, excited_spin):
    c = assemble_evolution(one_spin_params, excited_spin, n_steps=0, dt=0.2, order=1)
    kinds = [g.kind for g in c.gates]
    assert kinds == [GateKind.X, GateKind.BARRIER] + [GateKind.MEASURE] * 3
    assert c.measured == (0, 1, 2)
    result = simulate(c)
    assert len(result.snapshots) == 1
    np.testing.assert_allclose(
        result.snapshots[0].data,
        initial_density_matrix(excited_spin, one_spin_params).data,
        atol=1e-12,
    )


def test_barriers_mark_every_step(two_spin_params):
    c = assemble_evolution(
        two_spin_params, InitialStateSpec.first_spin_excited(2), n_steps=3, dt=0.2, order=2
    )
    assert sum(g.kind is GateKind.BARRIER for g in c.gates) == 4
    assert sum(g.kind is GateKind.RESET for g in c.gates) == 6
    assert c.roles == two_spin_params.layout.roles


def test_evolution_tracks_exact_dynamics(one_spin_params, excited_spin):
    """A fine second-order circuit stays close to the master equation."""
    dt, n_steps = 0.05, 4
    c = assemble_evolution(one_spin_params, excited_spin, n_steps, dt, order=2)
    sim = simulate(c).snapshots
    rho0 = initial_density_matrix(excited_spin, one_spin_params)
    exact = evolve_exact(rho0, one_spin_params, [k * dt for k in range(n_steps + 1)])
    for rho, snap in zip(sim, exact):
        assert infidelity(rho, snap.rho) < 1e-3


def test_evolution_errors(one_spin_params, excited_spin):
    with pytest.raises(ValueError):
        assemble_evolution(one_spin_params, excited_spin, -1, 0.2, 1)
    with pytest.raises(WidthError):
        assemble_evolution(
            ModelParams(n_spins=2, d_ho=8), InitialStateSpec.first_spin_excited(2), 1, 0.2, 1
        )
    with pytest.raises(ValueError):
        assemble_evolution(one_spin_params, InitialStateSpec.first_spin_excited(2), 1, 0.2, 1)


# --- gates and text form ------------------------------------------------------------


@pytest.mark.parametrize(
    "kind, qubits, angle",
    [
        ("cx", (1, 1), None),
        ("cx", (0,), None),
        ("rz", (0,), None),
        ("rz", (0,), float("inf")),
        ("x", (0,), 0.5),
        ("sx", (-1,), None),
    ],
)
def test_invalid_gates(kind, qubits, angle):
    with pytest.raises(ValueError):
        Gate(kind, qubits, angle)


def test_circuit_rejects_out_of_range_and_early_measurement():
    with pytest.raises(WidthError):
        Circuit(2, (Gate(GateKind.X, (2,)),))
    with pytest.raises(ValueError):
        Circuit(1, (Gate(GateKind.MEASURE, (0,)), Gate(GateKind.BARRIER, (0,))))


def test_text_form_round_trip(two_spin_params):
    c = assemble_evolution(
        two_spin_params, InitialStateSpec.first_spin_excited(2), n_steps=2, dt=0.3, order=2
    )
    text = c.to_text()
    assert text.startswith("# width=6 roles=aux,spin,boson,boson,spin,aux")
    assert Circuit.from_text(text) == c


def test_text_form_rejects_missing_header():
    with pytest.raises(ValueError):
        Circuit.from_text("x 0\n")
