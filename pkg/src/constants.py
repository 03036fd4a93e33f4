# src/constants.py
import math

# Numerical tolerances
COEFF_TOL = 1e-12  # Pauli coefficients below this are dropped
TRACE_TOL = 1e-9
HERMITIAN_TOL = 1e-10
PSD_TOL = 1e-9
CPTP_TOL = 1e-10
CHOI_EIG_FLOOR = -1e-10

# Dense backends
MAX_DENSE_WIDTH = 8  # Pauli sums realized as 2^w x 2^w matrices
MAX_SIM_WIDTH = 6  # density-matrix engine

# Master-equation integrator
ORACLE_MAX_STEP = 1e-3  # in units of 1/h
ORACLE_REFINE_TOL = 1e-8  # fidelity change between successive halvings
ORACLE_MAX_REFINEMENTS = 4
ORACLE_TRACE_DRIFT = 1e-6
ORACLE_HERMITIAN_DRIFT = 1e-8

# Time grids are matched to this many decimals
TIME_TOL = 1e-9

# ibmq_jakarta connectivity
JAKARTA_N_QUBITS = 7
JAKARTA_EDGES = ((0, 1), (1, 2), (1, 3), (3, 5), (4, 5), (5, 6))

# Initial placements with the fewest routed CX for one Gray-coded Trotter step.
# Keys are circuit-wire role signatures (see RegisterLayout.signature).
JAKARTA_LAYOUTS = {
    "bbsa": (0, 2, 1, 3),
    "bbbsa": (0, 5, 1, 3, 2),
    "asbbsa": (0, 3, 4, 6, 5, 1),
    "asbbbsa": (0, 4, 6, 1, 5, 3, 2),
}
ROUTING_LOOKAHEAD = 4  # two-qubit gates scored when choosing which operand moves

HALF_PI = math.pi / 2

# Shot sampling
DEFAULT_SHOTS = 8192  # 2^13
