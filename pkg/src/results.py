# src/results.py
"""CSV tables and the JSON run manifest."""
from __future__ import annotations

import json
import logging
from dataclasses import dataclass
from importlib.metadata import PackageNotFoundError, version
from pathlib import Path
from typing import TYPE_CHECKING, Mapping

import pandas as pd

from src.errors import OutputError

if TYPE_CHECKING:
    from src.config import ExperimentConfig

logger = logging.getLogger(__name__)

DIST_NAME = "spin-boson-dqs"
FLOAT_FORMAT = "%.12g"


@dataclass(frozen=True)
class RunOutputs:
    csv: Path
    manifest: Path
    n_rows: int


def package_version() -> str:
    try:
        return version(DIST_NAME)
    except PackageNotFoundError:
        return "0+unknown"


def emit_csv(frame: pd.DataFrame, path: str | Path) -> Path:
    """Write `frame` with a header row and 12 significant digits; NaN is refused."""
    path = Path(path)
    missing = frame.isna()
    if missing.to_numpy().any():
        row, col = next(zip(*missing.to_numpy().nonzero()))
        raise OutputError(
            f"refusing to write NaN: column {frame.columns[col]!r}, row {row} of {path.name}"
        )
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        frame.to_csv(path, index=False, float_format=FLOAT_FORMAT, lineterminator="\n")
    except OSError as exc:
        raise OutputError(f"cannot write {path}: {exc}") from exc
    return path


def write_manifest(
    config: ExperimentConfig,
    files: Mapping[str, Path],
    n_rows: int,
    path: str | Path,
) -> Path:
    path = Path(path)
    manifest = {
        "kind": config.kind.value,
        "config": json.loads(config.model_dump_json()),
        "config_sha256": config.digest(),
        "version": package_version(),
        "convention": config.convention.value,
        "files": {name: Path(f).name for name, f in files.items()},
        "rows": n_rows,
    }
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    except OSError as exc:
        raise OutputError(f"cannot write {path}: {exc}") from exc
    logger.debug("manifest written to %s", path)
    return path
