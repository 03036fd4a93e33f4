# src/config.py
"""
Experiment configuration.

Field constraints are declared on the fields; rules that span several fields
run in one validator that reports every violation together. `load_config`
layers built-in defaults, an optional JSON file and command-line overrides.
"""
from __future__ import annotations

import hashlib
import json
import logging
from enum import Enum
from pathlib import Path
from typing import Annotated, Any, Literal, Mapping

from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from src.constants import JAKARTA_N_QUBITS, MAX_SIM_WIDTH
from src.defaults import get_default_inputs
from src.encoding import CodeKind
from src.errors import ConfigError
from src.models import InitialStateSpec, ModelParams, RateConvention

logger = logging.getLogger(__name__)

PositiveTime = Annotated[float, Field(gt=0.0, allow_inf_nan=False)]
NoiseFactor = Annotated[float, Field(ge=0.0, le=1.0)]
Rate = Annotated[float, Field(ge=0.0, allow_inf_nan=False)]


class ExperimentKind(str, Enum):
    TROTTER_SWEEP = "trotter_sweep"
    NOISE_SWEEP = "noise_sweep"
    INFIDELITY_VS_TIME = "infidelity_vs_time"
    GAMMA_SWEEP = "gamma_sweep"
    OBSERVABLES = "observables"
    CORRELATIONS = "correlations"
    GATE_COUNTS = "gate_counts"

    @property
    def simulates(self) -> bool:
        return self is not ExperimentKind.GATE_COUNTS


class ExperimentConfig(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    kind: ExperimentKind
    model: ModelParams = ModelParams()
    initial_state: InitialStateSpec | None = None  # one spin excited by default
    code: CodeKind = CodeKind.GRAY

    # Grids
    orders: tuple[Literal[1, 2], ...] = Field((1, 2), min_length=1)
    dt_grid: tuple[PositiveTime, ...] = Field((0.2,), min_length=1)
    t_final: PositiveTime = 2.0
    xi_grid: tuple[NoiseFactor, ...] = Field((0.0,), min_length=1)
    gamma_grid: tuple[Rate, ...] = Field((1.0,), min_length=1)  # overrides model.gamma

    # gate_counts only
    n_spins_grid: tuple[Annotated[int, Field(ge=1)], ...] = Field((1, 2), min_length=1)
    d_ho_grid: tuple[Annotated[int, Field(ge=2)], ...] = Field((4, 8), min_length=1)
    codes: tuple[CodeKind, ...] = Field(
        (CodeKind.GRAY, CodeKind.STANDARD_BINARY), min_length=1
    )

    # Sampling and noise
    shots: int | None = Field(None, ge=1)
    seed: int = Field(0, ge=0)
    convention: RateConvention = RateConvention.PAPER_COLLISION
    calibration: Path | None = None

    # Run
    output_dir: Path = Path("results")
    workers: int = Field(1, ge=1)

    @model_validator(mode="after")
    def _check_consistency(self) -> ExperimentConfig:
        problems: list[str] = []
        params = self.model

        if self.initial_state is not None:
            n_given = len(self.initial_state.spin_states)
            if n_given != params.n_spins:
                problems.append(
                    f"initial_state: {n_given} spin states given for {params.n_spins} spins"
                )
            if self.initial_state.boson_level >= params.d_ho:
                problems.append(
                    f"initial_state: boson level {self.initial_state.boson_level} "
                    f"outside 0..{params.d_ho - 1}"
                )

        if self.kind.simulates:
            width = params.layout.width
            if width > MAX_SIM_WIDTH:
                problems.append(
                    f"model: {params.n_spins} spins with d_ho={params.d_ho} need {width} "
                    f"qubits, the simulator supports {MAX_SIM_WIDTH}"
                )
        if self.kind is ExperimentKind.CORRELATIONS and params.n_spins != 2:
            problems.append(f"correlations need exactly 2 spins, model has {params.n_spins}")
        if self.kind is ExperimentKind.GATE_COUNTS:
            for n_spins in self.n_spins_grid:
                for d_ho in self.d_ho_grid:
                    width = ModelParams(n_spins=n_spins, d_ho=d_ho).layout.width
                    if width > JAKARTA_N_QUBITS:
                        problems.append(
                            f"gate_counts: {n_spins} spins with d_ho={d_ho} do not fit "
                            f"on the {JAKARTA_N_QUBITS}-qubit device"
                        )

        if problems:
            raise ConfigError(problems)
        return self

    @property
    def start_state(self) -> InitialStateSpec:
        if self.initial_state is not None:
            return self.initial_state
        return InitialStateSpec.first_spin_excited(self.model.n_spins)

    def digest(self) -> str:
        """SHA-256 of the canonical JSON form."""
        return hashlib.sha256(self.model_dump_json().encode()).hexdigest()


def _merge(base: dict, update: Mapping[str, Any]) -> dict:
    out = dict(base)
    for key, value in update.items():
        if isinstance(value, Mapping) and isinstance(out.get(key), Mapping):
            out[key] = _merge(out[key], value)
        else:
            out[key] = value
    return out


def _problems(error: ValidationError) -> list[str]:
    problems = []
    for item in error.errors():
        cause = (item.get("ctx") or {}).get("error")
        if isinstance(cause, ConfigError):
            problems.extend(cause.problems)
            continue
        where = ".".join(str(part) for part in item["loc"]) or "config"
        problems.append(f"{where}: {item['msg']}")
    return problems


def load_config(
    kind: ExperimentKind | str,
    path: str | Path | None = None,
    overrides: Mapping[str, Any] | None = None,
) -> ExperimentConfig:
    """Defaults for `kind`, then the JSON file at `path`, then `overrides`."""
    try:
        kind = ExperimentKind(kind)
    except ValueError:
        raise ConfigError([f"kind: unknown experiment {kind!r}"]) from None

    data = get_default_inputs(kind.value)
    if path is not None:
        try:
            from_file = json.loads(Path(path).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError([f"{path}: {exc}"]) from exc
        if not isinstance(from_file, dict):
            raise ConfigError([f"{path}: top level must be a JSON object"])
        data = _merge(data, from_file)
    if overrides:
        data = _merge(data, {k: v for k, v in overrides.items() if v is not None})
    data["kind"] = kind.value

    try:
        config = ExperimentConfig.model_validate(data)
    except ValidationError as exc:
        raise ConfigError(_problems(exc)) from None
    logger.debug("configuration %s", config.model_dump_json())
    return config
