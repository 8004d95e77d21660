"""
Monte Carlo averages over positional disorder.

Realization seeds are spawned from one SeedSequence per run, and the same child seeds
are reused for every disorder strength, so a realization index always names the same
random draw scaled by epsilon.
"""

import logging
from dataclasses import dataclass, field, replace
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from dipolesim.errors import DipoleSimError, DisorderAbortedError
from dipolesim.geometry import EmitterArray, apply_disorder
from dipolesim.hilbert import Drive
from dipolesim.observables import DetectorSpec
from dipolesim.telemetry import get_tracer
from dipolesim.workers import parallel_map

from .config import TolerancesConfig
from .evaluation import evaluate_configuration

logger = logging.getLogger(__name__)

MAX_FAILURE_FRACTION = 0.1


def realization_seeds(seed: int, n_realizations: int) -> List[int]:
    children = np.random.SeedSequence(seed).spawn(n_realizations)
    return [int(child.generate_state(1, dtype=np.uint64)[0]) for child in children]


@dataclass
class Realization:
    index: int
    epsilon: float
    seed: int
    gamma_out: float = float("nan")
    n_ex: float = float("nan")
    phi_max: float = float("nan")
    j_max: float = float("nan")
    g2: float = float("nan")
    error: Optional[Dict] = None

    @property
    def ok(self) -> bool:
        return self.error is None


@dataclass
class DisorderStatistics:
    epsilon: float
    realizations: List[Realization] = field(default_factory=list)

    @property
    def succeeded(self) -> List[Realization]:
        return [r for r in self.realizations if r.ok]

    @property
    def n_failed(self) -> int:
        return len(self.realizations) - len(self.succeeded)

    def _values(self, name: str) -> np.ndarray:
        return np.array([getattr(r, name) for r in self.succeeded], dtype=float)

    def mean_std(self, name: str) -> Tuple[float, float]:
        values = self._values(name)
        if values.size == 0:
            return float("nan"), float("nan")
        if np.all(values == values[0]):
            return float(values[0]), 0.0
        return float(np.mean(values)), float(np.std(values))

    @property
    def gamma_out(self) -> Tuple[float, float]:
        return self.mean_std("gamma_out")

    @property
    def g2(self) -> Tuple[float, float]:
        return self.mean_std("g2")


@dataclass(frozen=True)
class _WorkItem:
    index: int
    array: EmitterArray
    drive: Drive
    epsilon: float
    d: float
    seed: int
    phi_grid: Tuple[float, ...]
    detector: DetectorSpec
    tolerances: TolerancesConfig
    n_max: int


def _run_realization(item: _WorkItem) -> Realization:
    realization = Realization(item.index, item.epsilon, item.seed)
    try:
        disordered = apply_disorder(item.array, item.epsilon, item.d, seed=item.seed)
        result = evaluate_configuration(disordered, item.drive, item.phi_grid, item.detector, item.tolerances, item.n_max)
    except DipoleSimError as e:
        logger.warning(f"Disorder realization {item.index} (epsilon={item.epsilon:g}) failed: {e}")
        realization.error = e.to_dict()
        return realization
    realization.gamma_out = result.record.gamma_out
    realization.n_ex = result.record.n_ex
    realization.phi_max = result.phi_max
    realization.j_max = result.record.j_phi
    realization.g2 = result.record.g2
    return realization


def disorder_average(
    array: EmitterArray,
    drive: Drive,
    epsilon: float,
    d: float,
    n_realizations: int,
    seed: int,
    phi_grid: Sequence[float],
    detector: DetectorSpec,
    tolerances: TolerancesConfig,
    n_max: int = 2,
    workers: Optional[int] = None,
) -> DisorderStatistics:
    """
    Mean and standard deviation of Gamma_out and g2(0) over disordered copies of `array`.

    Each realization displaces the emitters in x and y by up to epsilon * d, solves for the
    steady state under the unchanged `drive` and measures g2 at its own emission maximum.

    Raises:
        DisorderAbortedError: when more than 10% of the realizations fail
    """
    if n_realizations < 1:
        raise DisorderAbortedError("disorder averaging needs at least one realization", {"n_realizations": n_realizations})
    seeds = realization_seeds(seed, n_realizations)
    grid = tuple(float(p) for p in phi_grid)
    items = [
        _WorkItem(i, array, drive, float(epsilon), d, s, grid, detector, tolerances, n_max) for i, s in enumerate(seeds)
    ]

    with get_tracer(__name__).start_as_current_span("disorder_average") as span:
        span.set_attribute("dipolesim.epsilon", float(epsilon))
        span.set_attribute("dipolesim.n_realizations", n_realizations)
        if epsilon == 0:
            # every draw reproduces the ordered array
            first = _run_realization(items[0])
            realizations = [first] + [replace(first, index=item.index, seed=item.seed) for item in items[1:]]
        else:
            realizations = parallel_map(_run_realization, items, workers)

    stats = DisorderStatistics(float(epsilon), realizations)
    if stats.n_failed > MAX_FAILURE_FRACTION * n_realizations:
        raise DisorderAbortedError(
            f"{stats.n_failed} of {n_realizations} disorder realizations failed at epsilon={epsilon:g}",
            {"epsilon": float(epsilon), "failed": stats.n_failed, "errors": [r.error for r in realizations if r.error]},
        )
    mean, std = stats.gamma_out
    logger.info(
        f"Disorder epsilon={epsilon:g}: {len(stats.succeeded)}/{n_realizations} realizations, "
        f"gamma_out {mean:.6g} +- {std:.3g}"
    )
    return stats
