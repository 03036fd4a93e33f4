import numpy as np
import pytest

from src.models import DensityMatrix, InitialStateSpec, ModelParams
from src.noise import load_calibration


@pytest.fixture
def one_spin_params():
    """One spin, four oscillator levels, at the reference parameters."""
    return ModelParams(
        h=1.0,
        epsilon=0.5,
        omega=4.0,
        lambda_c=2.0,
        gamma=1.0,
        n_spins=1,
        d_ho=4,
    )


@pytest.fixture
def two_spin_params():
    """Two spins share a stiffer oscillator."""
    return ModelParams(
        h=1.0,
        epsilon=0.5,
        omega=6.0,
        lambda_c=2.0,
        gamma=1.0,
        n_spins=2,
        d_ho=4,
    )


@pytest.fixture
def excited_spin():
    return InitialStateSpec.first_spin_excited(1)


@pytest.fixture
def calibration():
    """Bundled ibmq_jakarta averages."""
    return load_calibration()


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def random_state(rng):
    """Returns a factory for full-rank random density matrices."""

    def make(n_qubits: int) -> DensityMatrix:
        dim = 2**n_qubits
        g = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
        rho = g @ g.conj().T
        return DensityMatrix(rho / np.trace(rho))

    return make
