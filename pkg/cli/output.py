"""
Writers for scenario outputs: CSV tables, the JSON summary and the run manifest.

Floats are written with Python's shortest round-trip repr, so values read back from a
CSV are bit-identical to the computed ones.
"""

import csv
import hashlib
import json
import logging
import math
from pathlib import Path
from typing import Any, Dict, List, Optional

import numpy as np

from dipolesim import settings
from dipolesim.version import get_cached_version
from scenarios.config import ScenarioConfig, config_hash, serialize_config
from scenarios.results import ScenarioResult, Table

logger = logging.getLogger(__name__)

SUMMARY_FILE = "summary.json"
MANIFEST_FILE = "manifest.json"
ERROR_FILE = "error.json"


def format_value(value: Any) -> str:
    if value is None:
        return ""
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    return str(value)


def jsonable(value: Any) -> Any:
    """Plain JSON types; NaN and infinities become null."""
    if isinstance(value, dict):
        return {str(k): jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple, np.ndarray)):
        return [jsonable(v) for v in value]
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        value = float(value)
        return value if math.isfinite(value) else None
    if isinstance(value, complex):
        return [value.real, value.imag]
    return value


def write_json(path: Path, obj: Any) -> None:
    path.write_text(json.dumps(jsonable(obj), ensure_ascii=False, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def write_table(directory: Path, table: Table) -> Path:
    path = directory / f"{table.name}.csv"
    with path.open("w", encoding="utf-8", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(table.columns)
        for row in table.rows:
            writer.writerow([format_value(row.get(column)) for column in table.columns])
    return path


def sha256_file(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def write_outputs(
    out_dir: Path,
    config: ScenarioConfig,
    result: ScenarioResult,
    wall_time: float,
    workers: int,
    seed: Optional[int] = None,
) -> Dict[str, Any]:
    """Write every table, summary.json and manifest.json; returns the manifest."""
    out_dir.mkdir(parents=True, exist_ok=True)
    paths: List[Path] = [write_table(out_dir, table) for table in result.tables]

    summary_path = out_dir / SUMMARY_FILE
    write_json(summary_path, {"preset": result.preset, "name": config.name, **result.summary})
    paths.append(summary_path)

    manifest = {
        "preset": config.preset,
        "name": config.name,
        "config_hash": config_hash(config),
        "config": serialize_config(config),
        "seed": seed,
        "seeds": result.seeds,
        "version": get_cached_version(),
        "wall_time_seconds": wall_time,
        "workers": workers,
        "tolerances": {
            "rel_tol": config.tolerances.rel_tol,
            "abs_tol": config.tolerances.abs_tol,
            "steady_state": config.tolerances.steady_state,
            "steady_state_default_per_dimension": settings.DEFAULT_STEADY_STATE_TOL,
            "method": config.tolerances.method,
            "max_time": config.tolerances.max_time or settings.MAX_INTEGRATION_TIME,
            "max_basis_dimension": settings.MAX_BASIS_DIMENSION,
            "max_liouvillian_dimension": settings.MAX_LIOUVILLIAN_DIMENSION,
        },
        "outputs": [{"file": p.name, "sha256": sha256_file(p), "bytes": p.stat().st_size} for p in paths],
    }
    write_json(out_dir / MANIFEST_FILE, manifest)
    logger.info(f"Wrote {len(paths)} output files to {out_dir}")
    return manifest
