# src/engine.py
import itertools
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from functools import lru_cache
from pathlib import Path

import numpy as np
import pandas as pd

from src.circuits import Circuit, GateKind, assemble_evolution, evolution_step
from src.config import ExperimentConfig, ExperimentKind
from src.constants import JAKARTA_EDGES, JAKARTA_N_QUBITS
from src.encoding import CodeKind
from src.errors import CalibrationError
from src.metrics import (
    CorrelationPair,
    ObservableKind,
    ObservableSpec,
    connected_correlation,
    expectation,
    infidelity_series,
    observable_matrix,
    time_averaged_infidelity,
)
from src.models import (
    DensityMatrix,
    InitialStateSpec,
    ModelParams,
    RateConvention,
    RegisterLayout,
    TrajectorySnapshot,
)
from src.noise import NoiseModel, build_noise_model, load_calibration
from src.oracle import evolve_exact
from src.results import RunOutputs, emit_csv, write_manifest
from src.simulator import SimulationResult, mitigate_distribution, sample_counts, simulate
from src.spin_boson import initial_density_matrix
from src.transpiler import (
    CouplingMap,
    compact,
    count_gates,
    decompose_native,
    default_layout,
    route,
)

logger = logging.getLogger(__name__)

_SWEEP_COLUMNS = [
    "n_spins", "d_ho", "code", "convention", "order", "gamma", "xi", "dt",
    "n_steps", "t_final", "avg_infidelity", "final_infidelity",
]
_TIME_COLUMNS = ["code", "convention", "order", "gamma", "xi", "dt", "step", "t"]

COLUMNS = {
    ExperimentKind.TROTTER_SWEEP: _SWEEP_COLUMNS,
    ExperimentKind.NOISE_SWEEP: _SWEEP_COLUMNS,
    ExperimentKind.GAMMA_SWEEP: _SWEEP_COLUMNS,
    ExperimentKind.INFIDELITY_VS_TIME: _TIME_COLUMNS + ["infidelity"],
    ExperimentKind.OBSERVABLES: _TIME_COLUMNS + [
        "boson_number_sim", "boson_number_exact", "sigma_z_sim", "sigma_z_exact",
    ],
    ExperimentKind.CORRELATIONS: _TIME_COLUMNS + [
        "czz_sim", "czz_exact", "cxx_sim", "cxx_exact",
    ],
    ExperimentKind.GATE_COUNTS: [
        "n_spins", "d_ho", "order", "code", "single_qubit", "cx", "swaps",
    ],
}
# Z-basis estimates from mitigated samples
SHOT_COLUMNS = {
    ExperimentKind.OBSERVABLES: ["boson_number_shots", "sigma_z_shots"],
    ExperimentKind.CORRELATIONS: ["czz_shots"],
}


def columns_for(config: ExperimentConfig) -> list[str]:
    columns = list(COLUMNS[config.kind])
    if config.shots is not None:
        columns += SHOT_COLUMNS.get(config.kind, [])
    return columns


@dataclass(frozen=True)
class GridPoint:
    index: int
    order: int
    dt: float
    gamma: float = 0.0
    xi: float = 0.0
    n_spins: int = 1
    d_ho: int = 4
    code: CodeKind = CodeKind.GRAY


@dataclass(frozen=True)
class Trajectory:
    snapshots: list[TrajectorySnapshot]
    readout: list[list[np.ndarray]] | None  # confusion matrices per snapshot


def grid_points(config: ExperimentConfig) -> list[GridPoint]:
    """Grid points in the row order of the output table."""
    if config.kind is ExperimentKind.GATE_COUNTS:
        combos = itertools.product(
            config.n_spins_grid, config.d_ho_grid, config.orders, config.codes
        )
        return [
            GridPoint(i, order, config.dt_grid[0], config.model.gamma, 0.0, n_spins, d_ho, code)
            for i, (n_spins, d_ho, order, code) in enumerate(combos)
        ]
    combos = itertools.product(
        config.orders, config.gamma_grid, config.xi_grid, config.dt_grid
    )
    return [
        GridPoint(
            i, order, dt, gamma, xi, config.model.n_spins, config.model.d_ho, config.code
        )
        for i, (order, gamma, xi, dt) in enumerate(combos)
    ]


def step_count(t_final: float, dt: float) -> int:
    """N = ceil(t_final / dt); a ratio that is not integral is rounded up with a warning."""
    ratio = t_final / dt
    n_steps = math.ceil(ratio - 1e-9)
    if abs(ratio - round(ratio)) > 1e-9:
        logger.warning(
            "t_final=%g is not a multiple of dt=%g; running %d steps up to t=%g",
            t_final, dt, n_steps, n_steps * dt,
        )
    return n_steps


# --- Noise ---------------------------------------------------------------------

@lru_cache(maxsize=4)
def _calibration(path: str | None):
    cal = load_calibration(path)
    if cal.n_qubits < JAKARTA_N_QUBITS:
        raise CalibrationError(
            f"calibration {cal.name!r} covers {cal.n_qubits} qubits, "
            f"routing targets {JAKARTA_N_QUBITS}"
        )
    return cal


@lru_cache(maxsize=16)
def noise_model(path: str | None, xi: float) -> NoiseModel:
    """Device noise at factor xi on every coupled pair of the device map."""
    pairs = [(a, b) for a, b in JAKARTA_EDGES] + [(b, a) for a, b in JAKARTA_EDGES]
    return build_noise_model(_calibration(path), xi, pairs)


# --- Trajectories ----------------------------------------------------------------

@lru_cache(maxsize=32)
def exact_trajectory(
    params: ModelParams,
    spec: InitialStateSpec,
    dt: float,
    n_steps: int,
    convention: RateConvention,
    code: CodeKind,
) -> tuple[TrajectorySnapshot, ...]:
    rho0 = initial_density_matrix(spec, params, code)
    grid = [k * dt for k in range(n_steps + 1)]
    return tuple(evolve_exact(rho0, params, grid, convention, code))


def simulate_trajectory(
    config: ExperimentConfig, params: ModelParams, point: GridPoint, n_steps: int
) -> Trajectory:
    """
    Snapshots of the assembled circuit at t = k * dt. Noise-free points run
    the logical circuit directly; noisy points are lowered to device gates,
    routed onto the device and trimmed to the wires they use.
    """
    circuit = assemble_evolution(
        params, config.start_state, n_steps, point.dt, point.order, point.code,
        config.convention,
    )
    times = [k * point.dt for k in range(n_steps + 1)]

    if point.xi == 0:
        result = simulate(circuit)
        snapshots = [TrajectorySnapshot(t, rho) for t, rho in zip(times, result.snapshots)]
        return Trajectory(snapshots, None)

    path = str(config.calibration) if config.calibration is not None else None
    result, readout = run_on_device(circuit, params.layout, noise_model(path, point.xi))
    snapshots = [TrajectorySnapshot(t, rho) for t, rho in zip(times, result.snapshots)]
    return Trajectory(snapshots, readout)


def run_on_device(
    circuit: Circuit, layout: RegisterLayout, noise: NoiseModel
) -> tuple[SimulationResult, list[list[np.ndarray]]]:
    """
    Lower, route and compact a logical circuit, then simulate it under `noise`
    (indexed by device qubit). Returns the result and the confusion matrices
    of every barrier snapshot.
    """
    coupling = CouplingMap.jakarta()
    native = decompose_native(circuit)
    routed = route(native, coupling, default_layout(layout, coupling))
    packed = compact(routed.circuit)
    local = noise.remapped(packed.physical)
    logger.debug(
        "noisy run on device qubits %s: %d gates, %d swaps",
        packed.physical, len(packed.circuit), routed.swaps,
    )

    result = simulate(packed.circuit, local)
    barriers = [g.qubits for g in packed.circuit.gates if g.kind is GateKind.BARRIER]
    return result, [local.readout(wires) for wires in barriers]


# --- Rows --------------------------------------------------------------------------

def _point_columns(config: ExperimentConfig, point: GridPoint) -> dict:
    return {
        "code": point.code.value,
        "convention": config.convention.value,
        "order": point.order,
        "gamma": point.gamma,
        "xi": point.xi,
        "dt": point.dt,
    }


def _diagonal(matrix: np.ndarray) -> np.ndarray:
    return np.real(np.diag(matrix))


def _shot_distribution(
    rho: DensityMatrix,
    readout: list[np.ndarray] | None,
    shots: int,
    seed: np.random.SeedSequence,
) -> np.ndarray:
    counts = sample_counts(rho, shots, readout, seed)
    observed = counts.distribution(rho.n_qubits)
    if readout is None:
        return observed
    return mitigate_distribution(observed, readout).projected


def _observable_rows(
    config: ExperimentConfig,
    point: GridPoint,
    layout: RegisterLayout,
    d_ho: int,
    traj: Trajectory,
    exact: tuple[TrajectorySnapshot, ...],
) -> list[dict]:
    number = ObservableSpec(ObservableKind.BOSON_NUMBER)
    sigma_z = ObservableSpec(ObservableKind.SIGMA_Z)
    seeds = np.random.SeedSequence([config.seed, point.index]).spawn(len(exact))
    rows = []
    for step, (sim, ref) in enumerate(zip(traj.snapshots, exact)):
        row = _point_columns(config, point) | {"step": step, "t": ref.t}
        row["boson_number_sim"] = expectation(sim.rho, number, layout, point.code, d_ho)
        row["boson_number_exact"] = expectation(ref.rho, number, layout, point.code, d_ho)
        row["sigma_z_sim"] = expectation(sim.rho, sigma_z, layout, point.code)
        row["sigma_z_exact"] = expectation(ref.rho, sigma_z, layout, point.code)
        if config.shots is not None:
            readout = traj.readout[step] if traj.readout is not None else None
            probs = _shot_distribution(sim.rho, readout, config.shots, seeds[step])
            row["boson_number_shots"] = float(
                probs @ _diagonal(observable_matrix(number, layout, point.code, d_ho))
            )
            row["sigma_z_shots"] = float(
                probs @ _diagonal(observable_matrix(sigma_z, layout, point.code))
            )
        rows.append(row)
    return rows


def _correlation_rows(
    config: ExperimentConfig,
    point: GridPoint,
    layout: RegisterLayout,
    traj: Trajectory,
    exact: tuple[TrajectorySnapshot, ...],
) -> list[dict]:
    z_first = _diagonal(observable_matrix(ObservableSpec(ObservableKind.SIGMA_Z, 0), layout))
    z_second = _diagonal(observable_matrix(ObservableSpec(ObservableKind.SIGMA_Z, 1), layout))
    seeds = np.random.SeedSequence([config.seed, point.index]).spawn(len(exact))
    rows = []
    for step, (sim, ref) in enumerate(zip(traj.snapshots, exact)):
        row = _point_columns(config, point) | {"step": step, "t": ref.t}
        row["czz_sim"] = connected_correlation(sim.rho, CorrelationPair.ZZ, layout)
        row["czz_exact"] = connected_correlation(ref.rho, CorrelationPair.ZZ, layout)
        row["cxx_sim"] = connected_correlation(sim.rho, CorrelationPair.XX, layout)
        row["cxx_exact"] = connected_correlation(ref.rho, CorrelationPair.XX, layout)
        if config.shots is not None:
            readout = traj.readout[step] if traj.readout is not None else None
            probs = _shot_distribution(sim.rho, readout, config.shots, seeds[step])
            row["czz_shots"] = float(
                probs @ (z_first * z_second) - (probs @ z_first) * (probs @ z_second)
            )
        rows.append(row)
    return rows


def _gate_count_rows(config: ExperimentConfig, point: GridPoint) -> list[dict]:
    params = config.model.model_copy(
        update={"n_spins": point.n_spins, "d_ho": point.d_ho, "gamma": point.gamma}
    )
    coupling = CouplingMap.jakarta()
    step = evolution_step(params, point.order, point.dt, point.code, config.convention)
    routed = route(decompose_native(step), coupling, default_layout(params.layout, coupling))
    counts = count_gates(routed.circuit)
    logger.debug(
        "%d spins, d_ho=%d, order %d, %s: %d single, %d CX",
        point.n_spins, point.d_ho, point.order, point.code.value,
        counts.single_qubit, counts.cx,
    )
    return [
        {
            "n_spins": point.n_spins,
            "d_ho": point.d_ho,
            "order": point.order,
            "code": point.code.value,
            "single_qubit": counts.single_qubit,
            "cx": counts.cx,
            "swaps": routed.swaps,
        }
    ]


def evaluate_point(config: ExperimentConfig, point: GridPoint) -> list[dict]:
    """All output rows of one grid point."""
    if config.kind is ExperimentKind.GATE_COUNTS:
        return _gate_count_rows(config, point)

    params = config.model.model_copy(update={"gamma": point.gamma})
    n_steps = step_count(config.t_final, point.dt)
    logger.info(
        "%s point %d: order %d, gamma=%g, xi=%g, dt=%g (%d steps)",
        config.kind.value, point.index, point.order, point.gamma, point.xi, point.dt, n_steps,
    )
    traj = simulate_trajectory(config, params, point, n_steps)
    exact = exact_trajectory(
        params, config.start_state, point.dt, n_steps, config.convention, point.code
    )

    # 1. Averaged and final infidelity
    if config.kind in (
        ExperimentKind.TROTTER_SWEEP, ExperimentKind.NOISE_SWEEP, ExperimentKind.GAMMA_SWEEP
    ):
        series = infidelity_series(traj.snapshots, exact)
        return [
            {
                "n_spins": params.n_spins,
                "d_ho": params.d_ho,
                **_point_columns(config, point),
                "n_steps": n_steps,
                "t_final": n_steps * point.dt,
                "avg_infidelity": time_averaged_infidelity(traj.snapshots, exact),
                "final_infidelity": series[-1],
            }
        ]

    # 2. Infidelity at every step
    if config.kind is ExperimentKind.INFIDELITY_VS_TIME:
        series = infidelity_series(traj.snapshots, exact)
        return [
            _point_columns(config, point) | {"step": k, "t": snap.t, "infidelity": value}
            for k, (snap, value) in enumerate(zip(exact, series))
        ]

    # 3. Observables
    if config.kind is ExperimentKind.OBSERVABLES:
        return _observable_rows(config, point, params.layout, params.d_ho, traj, exact)
    return _correlation_rows(config, point, params.layout, traj, exact)


def run_experiment(config: ExperimentConfig) -> pd.DataFrame:
    points = grid_points(config)
    if config.kind.simulates and any(xi > 0 for xi in config.xi_grid):
        # fail on a bad calibration before any point is evaluated
        _calibration(str(config.calibration) if config.calibration is not None else None)
    if config.shots is not None and config.kind not in SHOT_COLUMNS:
        logger.warning("shots are only sampled for observables and correlations; ignoring")
    logger.info("running %s over %d grid points", config.kind.value, len(points))

    if config.workers > 1 and len(points) > 1:
        with ProcessPoolExecutor(max_workers=config.workers) as pool:
            chunks = list(pool.map(evaluate_point, itertools.repeat(config), points))
    else:
        chunks = [evaluate_point(config, point) for point in points]

    data = [row for chunk in chunks for row in chunk]
    frame = pd.DataFrame(data, columns=columns_for(config))
    if config.kind is ExperimentKind.GAMMA_SWEEP:
        for best in lowest_infidelity_rates(frame).itertuples():
            logger.info(
                "order %d, xi=%g: lowest averaged infidelity %.4g at gamma=%g",
                best.order, best.xi, best.avg_infidelity, best.gamma,
            )
    return frame


def lowest_infidelity_rates(frame: pd.DataFrame) -> pd.DataFrame:
    """The dissipation rate with the lowest averaged infidelity, per order and noise factor."""
    best = frame.loc[frame.groupby(["order", "xi"])["avg_infidelity"].idxmin()]
    return best[["order", "xi", "gamma", "avg_infidelity"]].reset_index(drop=True)


def run(config: ExperimentConfig) -> RunOutputs:
    """Evaluate the experiment and write its CSV and manifest under config.output_dir."""
    frame = run_experiment(config)
    out_dir = Path(config.output_dir)
    csv_path = emit_csv(frame, out_dir / f"{config.kind.value}.csv")
    manifest = write_manifest(
        config, {"csv": csv_path}, len(frame), out_dir / f"{config.kind.value}.manifest.json"
    )
    logger.info("wrote %d rows to %s", len(frame), csv_path)
    return RunOutputs(csv_path, manifest, len(frame))
