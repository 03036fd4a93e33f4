# src/noise.py
"""
Device noise from calibration data.

Every native gate is followed by thermal relaxation over the gate time and
then by a depolarizing channel whose strength is back-solved so that the
composition reproduces the calibrated average gate infidelity. Readout error
is a per-qubit confusion matrix C[m, n] = P(record n | true m).

Choi convention: C = sum_ij |i><j| (x) E(|i><j|), input factor first.
"""
from __future__ import annotations

import itertools
import json
import logging
from dataclasses import dataclass, field
from functools import cached_property, reduce
from importlib import resources
from pathlib import Path
from typing import Iterable, Optional, Sequence

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from src.circuits import Gate, GateKind
from src.constants import CHOI_EIG_FLOOR, CPTP_TOL
from src.errors import CalibrationError, ChannelError
from src.metrics import fidelity
from src.pauli import PAULI_MATRICES

logger = logging.getLogger(__name__)

BUNDLED_CALIBRATION = "jakarta-avg.json"
SINGLE_QUBIT_KINDS = (GateKind.X, GateKind.SX, GateKind.RZ)


# --- Calibration schema ------------------------------------------------------

class QubitCalibration(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    t1_us: float = Field(gt=0, allow_inf_nan=False)
    t2_us: float = Field(gt=0, allow_inf_nan=False)
    freq_ghz: float = 0.0  # informational
    p10: float = Field(0.0, ge=0, le=1)  # P(record 1 | true 0)
    p01: float = Field(0.0, ge=0, le=1)  # P(record 0 | true 1)

    @model_validator(mode="after")
    def _physical_t2(self):
        if self.t2_us > 2 * self.t1_us:
            raise ValueError(f"T2={self.t2_us} exceeds 2*T1={2 * self.t1_us}")
        return self


class GateCalibration(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    kind: str
    qubits: Optional[tuple[int, ...]] = None  # None applies to every operand set
    error: float = Field(ge=0, le=1)  # average gate infidelity
    time_ns: float = Field(ge=0, allow_inf_nan=False)


class CalibrationData(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    name: str = ""
    qubits: tuple[QubitCalibration, ...]
    gates: tuple[GateCalibration, ...]

    @property
    def n_qubits(self) -> int:
        return len(self.qubits)

    def gate_entry(self, kind: GateKind | str, qubits: Sequence[int]) -> GateCalibration:
        kind = GateKind(kind).value
        qubits = tuple(qubits)
        wildcard = None
        for entry in self.gates:
            if entry.kind != kind:
                continue
            if entry.qubits == qubits:
                return entry
            if entry.qubits is None and wildcard is None:
                wildcard = entry
        if wildcard is None:
            raise CalibrationError(f"no calibration for {kind} on {qubits}")
        return wildcard


def load_calibration(path: str | Path | None = None) -> CalibrationData:
    """Read a calibration document; None selects the bundled device averages."""
    try:
        if path is None:
            text = resources.files("src").joinpath("data", BUNDLED_CALIBRATION).read_text()
        else:
            text = Path(path).read_text()
        return CalibrationData.model_validate(json.loads(text))
    except (OSError, json.JSONDecodeError, ValidationError) as exc:
        raise CalibrationError(f"cannot load calibration {path or BUNDLED_CALIBRATION}: {exc}") from exc


# --- Channels ----------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class QuantumChannel:
    kraus: tuple[np.ndarray, ...]

    def __post_init__(self):
        ops = tuple(np.asarray(k, dtype=complex) for k in self.kraus)
        if not ops:
            raise ChannelError("a channel needs at least one Kraus operator")
        dim = ops[0].shape[0]
        if any(k.shape != (dim, dim) for k in ops):
            raise ChannelError("Kraus operators must be square and of equal size")
        object.__setattr__(self, "kraus", ops)

    @classmethod
    def identity(cls, dim: int) -> QuantumChannel:
        return cls((np.eye(dim, dtype=complex),))

    @classmethod
    def unitary(cls, u: np.ndarray) -> QuantumChannel:
        return cls((u,))

    @classmethod
    def from_choi(cls, choi: np.ndarray) -> QuantumChannel:
        dim = int(round(np.sqrt(choi.shape[0])))
        values, vectors = np.linalg.eigh(0.5 * (choi + choi.conj().T))
        if values[0] < CHOI_EIG_FLOOR:
            raise ChannelError(f"Choi matrix has eigenvalue {values[0]:.3e}")
        ops = [
            np.sqrt(v) * vectors[:, i].reshape(dim, dim).T
            for i, v in enumerate(values)
            if v > 1e-14
        ]
        return cls(tuple(ops) or (np.zeros((dim, dim)),))

    @property
    def dim(self) -> int:
        return self.kraus[0].shape[0]

    @property
    def n_qubits(self) -> int:
        return self.dim.bit_length() - 1

    @cached_property
    def choi(self) -> np.ndarray:
        vecs = [k.T.reshape(-1) for k in self.kraus]
        return sum(np.outer(v, v.conj()) for v in vecs)

    @cached_property
    def superoperator(self) -> np.ndarray:
        """S with vec(E(rho)) = S vec(rho) for row-major vec."""
        return sum(np.kron(k, k.conj()) for k in self.kraus)

    @cached_property
    def is_identity(self) -> bool:
        return bool(np.allclose(self.superoperator, np.eye(self.dim**2), atol=1e-15))

    def apply(self, rho: np.ndarray) -> np.ndarray:
        return sum(k @ rho @ k.conj().T for k in self.kraus)

    def cptp_error(self) -> float:
        total = sum(k.conj().T @ k for k in self.kraus)
        return float(np.max(np.abs(total - np.eye(self.dim))))

    def is_cptp(self, tol: float = CPTP_TOL) -> bool:
        return self.cptp_error() <= tol

    def compose(self, first: QuantumChannel) -> QuantumChannel:
        """self after `first`."""
        if first.dim != self.dim:
            raise ChannelError(f"cannot compose dimensions {self.dim} and {first.dim}")
        ops = tuple(a @ b for a in self.kraus for b in first.kraus)
        if len(ops) > self.dim**2:
            return QuantumChannel.from_choi(QuantumChannel(ops).choi)
        return QuantumChannel(ops)

    def tensor(self, other: QuantumChannel) -> QuantumChannel:
        return QuantumChannel(tuple(np.kron(a, b) for a in self.kraus for b in other.kraus))


def thermal_relaxation_channel(
    t1: float, t2: float, t_gate: float, excited_population: float = 0.0
) -> QuantumChannel:
    """Relaxation towards |0> over t_gate; all three times in the same unit."""
    if t1 <= 0 or t2 <= 0:
        raise CalibrationError(f"T1 and T2 must be positive, got {t1}, {t2}")
    if t2 > 2 * t1:
        raise CalibrationError(f"T2={t2} exceeds 2*T1={2 * t1}")
    if t_gate < 0:
        raise CalibrationError(f"gate time must be non-negative, got {t_gate}")
    if excited_population != 0:
        raise CalibrationError("only zero qubit temperature is modelled")

    p_reset = 1.0 - np.exp(-t_gate / t1)
    if t2 <= t1:
        p_z = (1.0 - p_reset) * (1.0 - np.exp(-t_gate * (1.0 / t2 - 1.0 / t1))) / 2.0
        p_i = 1.0 - p_z - p_reset
        ops = [
            np.sqrt(p_i) * PAULI_MATRICES["I"],
            np.sqrt(p_z) * PAULI_MATRICES["Z"],
            np.sqrt(p_reset) * np.array([[1, 0], [0, 0]], dtype=complex),
            np.sqrt(p_reset) * np.array([[0, 1], [0, 0]], dtype=complex),
        ]
        return QuantumChannel(tuple(k for k in ops if np.any(k)) or (ops[0],))

    p_t2 = np.exp(-t_gate / t2)
    choi = np.array(
        [
            [1, 0, 0, p_t2],
            [0, 0, 0, 0],
            [0, 0, p_reset, 0],
            [p_t2, 0, 0, 1 - p_reset],
        ],
        dtype=complex,
    )
    return QuantumChannel.from_choi(choi)


def depolarizing_channel(p: float, n_qubits: int) -> QuantumChannel:
    """(1 - p) * id + p * (complete depolarization)."""
    dim = 2**n_qubits
    if not 0 <= p <= dim**2 / (dim**2 - 1):
        raise ChannelError(f"depolarizing probability {p} out of range")
    ops = []
    for letters in itertools.product("IXYZ", repeat=n_qubits):
        pauli = reduce(np.kron, [PAULI_MATRICES[c] for c in letters])
        weight = 1 - p + p / dim**2 if set(letters) == {"I"} else p / dim**2
        if weight > 0:
            ops.append(np.sqrt(weight) * pauli)
    return QuantumChannel(tuple(ops))


def average_gate_fidelity(ch: QuantumChannel, target: np.ndarray | None = None) -> float:
    """Haar-averaged fidelity of `ch` against a unitary (identity by default)."""
    dim = ch.dim
    target = np.eye(dim) if target is None else np.asarray(target, dtype=complex)
    if target.shape != (dim, dim):
        raise ChannelError(f"target of shape {target.shape} for a {dim}-dimensional channel")
    if not ch.is_cptp():
        raise ChannelError(f"channel is not trace preserving (error {ch.cptp_error():.3e})")
    ideal = target.T.reshape(-1)
    process = fidelity(np.outer(ideal, ideal.conj()) / dim, ch.choi / dim)
    return (dim * process + 1) / (dim + 1)


def depolarizing_probability(
    target_gate_infidelity: float, thermal_channel: QuantumChannel, d: int | None = None
) -> float:
    d = thermal_channel.dim if d is None else d
    f_thermal = average_gate_fidelity(thermal_channel)
    f_gate = 1.0 - target_gate_infidelity
    p = d * (f_thermal - f_gate) / (d * f_thermal - 1)
    if p < 0:
        logger.warning(
            "thermal infidelity %.3e exceeds the gate budget %.3e; depolarizing set to 0",
            1 - f_thermal,
            target_gate_infidelity,
        )
        return 0.0
    if p > 1:
        logger.warning("depolarizing probability %.3f clamped to 1", p)
        return 1.0
    return float(p)


def scale_calibration(cal: CalibrationData, xi: float) -> CalibrationData:
    """Scale gate errors, gate times and readout errors by xi; T1, T2 stay put."""
    if not 0.0 <= xi <= 1.0:
        raise ValueError(f"noise factor must lie in [0, 1], got {xi}")
    qubits = tuple(q.model_copy(update={"p10": xi * q.p10, "p01": xi * q.p01}) for q in cal.qubits)
    gates = tuple(
        g.model_copy(update={"error": xi * g.error, "time_ns": xi * g.time_ns}) for g in cal.gates
    )
    return cal.model_copy(update={"qubits": qubits, "gates": gates})


def _thermal_for(cal: CalibrationData, qubits: Sequence[int], time_ns: float) -> QuantumChannel:
    channels = [
        thermal_relaxation_channel(cal.qubits[q].t1_us, cal.qubits[q].t2_us, time_ns / 1000.0)
        for q in qubits
    ]
    return reduce(lambda a, b: a.tensor(b), channels)


def gate_channel(cal: CalibrationData, kind: GateKind, qubits: Sequence[int]) -> QuantumChannel:
    """Depolarizing after thermal relaxation, tuned to the calibrated gate error."""
    entry = cal.gate_entry(kind, qubits)
    thermal = _thermal_for(cal, qubits, entry.time_ns)
    p_depol = depolarizing_probability(entry.error, thermal)
    if p_depol == 0:
        return thermal
    return depolarizing_channel(p_depol, len(qubits)).compose(thermal)


def confusion_matrix(qubit: QubitCalibration) -> np.ndarray:
    return np.array([[1 - qubit.p10, qubit.p10], [qubit.p01, 1 - qubit.p01]])


@dataclass(frozen=True, eq=False)
class NoiseModel:
    xi: float
    channels: dict[tuple[GateKind, tuple[int, ...]], QuantumChannel]
    confusion: dict[int, np.ndarray] = field(default_factory=dict)

    def channel_for(self, gate: Gate) -> QuantumChannel | None:
        if gate.kind in (GateKind.BARRIER, GateKind.MEASURE, GateKind.RESET):
            return None
        try:
            return self.channels[(gate.kind, gate.qubits)]
        except KeyError:
            raise CalibrationError(f"no noise channel for {gate.kind.value} on {gate.qubits}") from None

    def readout(self, qubits: Iterable[int]) -> list[np.ndarray]:
        return [self.confusion.get(q, np.eye(2)) for q in qubits]

    def remapped(self, physical: Sequence[int]) -> NoiseModel:
        """The model seen from compact wires, where wire j is device qubit physical[j]."""
        index = {p: j for j, p in enumerate(physical)}
        channels = {
            (kind, tuple(index[q] for q in qubits)): ch
            for (kind, qubits), ch in self.channels.items()
            if all(q in index for q in qubits)
        }
        confusion = {index[q]: m for q, m in self.confusion.items() if q in index}
        return NoiseModel(self.xi, channels, confusion)


def build_noise_model(
    cal: CalibrationData,
    xi: float,
    pairs: Iterable[tuple[int, int]] | None = None,
) -> NoiseModel:
    """
    Channels for every native gate on every calibrated qubit. `pairs` limits
    the CX operand pairs (ordered); by default every ordered pair is built.
    """
    scaled = scale_calibration(cal, xi)
    n = scaled.n_qubits
    channels: dict[tuple[GateKind, tuple[int, ...]], QuantumChannel] = {}
    for q in range(n):
        for kind in SINGLE_QUBIT_KINDS:
            channels[(kind, (q,))] = gate_channel(scaled, kind, (q,))
    cx_pairs = list(pairs) if pairs is not None else list(itertools.permutations(range(n), 2))
    for pair in cx_pairs:
        channels[(GateKind.CX, tuple(pair))] = gate_channel(scaled, GateKind.CX, pair)

    for key, ch in channels.items():
        if not ch.is_cptp():
            raise ChannelError(f"channel for {key} is not CPTP ({ch.cptp_error():.3e})")
    confusion = {q: confusion_matrix(scaled.qubits[q]) for q in range(n)}
    logger.debug("noise model at xi=%g: %d gate channels", xi, len(channels))
    return NoiseModel(xi, channels, confusion)


def _entry_touching(cal: CalibrationData, kind: GateKind, qubit: int) -> GateCalibration:
    for entry in cal.gates:
        if entry.kind == kind.value and (entry.qubits is None or qubit in entry.qubits):
            return entry
    raise CalibrationError(f"no calibration for {kind.value} touching qubit {qubit}")


def error_source_ratio(cal: CalibrationData) -> float:
    """
    Mean of I_T / I_D over calibrated qubits and native gates, with
    I_D = I_gate - I_T. Gates without a depolarizing share (RZ is virtual)
    are left out. The CX thermal part pairs qubit q with a copy of itself.
    """
    ratios = []
    for q in range(cal.n_qubits):
        for kind in SINGLE_QUBIT_KINDS + (GateKind.CX,):
            operands = (q, q) if kind is GateKind.CX else (q,)
            entry = _entry_touching(cal, kind, q)
            thermal = _thermal_for(cal, operands, entry.time_ns)
            i_thermal = 1.0 - average_gate_fidelity(thermal)
            i_depol = entry.error - i_thermal
            if i_depol > 0:
                ratios.append(i_thermal / i_depol)
    if not ratios:
        raise CalibrationError("no gate has a depolarizing contribution")
    return float(np.mean(ratios))
