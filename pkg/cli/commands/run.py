import json
import logging
import sys
import time
from pathlib import Path
from typing import Any, Dict, Optional, Sequence

from dipolesim.errors import ConfigError, DipoleSimError
from dipolesim.workers import resolve_workers
from scenarios.config import parse_config
from scenarios.presets import run_scenario

from ..output import ERROR_FILE, write_json, write_outputs

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_CONFIG = 2


def report_error(error: Dict[str, Any], out_dir: Optional[Path]) -> None:
    """Machine-readable error on stderr, and in error.json when the output directory is usable."""
    sys.stderr.write(json.dumps(error, default=str) + "\n")
    if out_dir is None:
        return
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
        write_json(out_dir / ERROR_FILE, error)
    except OSError as e:
        logger.error(f"Could not write {ERROR_FILE} to {out_dir}: {e}")


def run(
    config_path: Path,
    out_dir: Path,
    seed: Optional[int] = None,
    threads: Optional[int] = None,
    overrides: Sequence[str] = (),
) -> int:
    """Run one scenario config and write its outputs; returns the process exit code."""
    started = time.perf_counter()
    try:
        config = parse_config(config_path, overrides, seed)
        workers = resolve_workers(threads)
        logger.info(f"Loaded {config_path} (preset '{config.preset}'), {workers} worker(s)")
        result = run_scenario(config, workers)
        write_outputs(Path(out_dir), config, result, time.perf_counter() - started, workers, seed)
    except ConfigError as e:
        logger.error(f"Invalid config {config_path}: {e}")
        report_error(e.to_dict(), Path(out_dir))
        return EXIT_CONFIG
    except DipoleSimError as e:
        logger.error(f"Scenario failed: {e}")
        report_error(e.to_dict(), Path(out_dir))
        return EXIT_FAILURE
    except OSError as e:
        logger.error(f"I/O error: {e}")
        report_error({"error": "IOError", "message": str(e), "details": {"path": getattr(e, "filename", None)}}, None)
        return EXIT_FAILURE

    logger.info(f"Finished in {time.perf_counter() - started:.1f}s")
    return EXIT_OK
