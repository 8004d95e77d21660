"""
Truncated (n_max = 2) versus full (n_max = N) steady states of a short driven chain.
"""

import logging
from dataclasses import dataclass
from typing import List, Optional, Sequence

import numpy as np

from dipolesim import settings
from dipolesim.couplings import CouplingMatrices, coupling_matrices
from dipolesim.dynamics import steady_state
from dipolesim.errors import ResourceLimitError
from dipolesim.geometry import EmitterArray
from dipolesim.hilbert import Drive, EmitterSystem, build_basis
from dipolesim.observables import ObservableRecord, observe

logger = logging.getLogger(__name__)

TRUNCATED_N_MAX = 2


@dataclass
class ComparisonPoint:
    rabi: float
    truncated: ObservableRecord
    full: ObservableRecord

    @staticmethod
    def _relative(a: float, b: float) -> float:
        if a == b:
            return 0.0
        scale = max(abs(a), abs(b))
        return abs(a - b) / scale

    @property
    def n_ex_deviation(self) -> float:
        return self._relative(self.truncated.n_ex, self.full.n_ex)

    @property
    def gamma_out_deviation(self) -> float:
        return self._relative(self.truncated.gamma_out, self.full.gamma_out)


def _method_for(dimension: int, method: Optional[str]) -> str:
    if method is not None:
        return method
    return "null-space" if dimension <= settings.MAX_LIOUVILLIAN_DIMENSION else "integration"


def model_comparison(
    array: EmitterArray,
    drive: Drive,
    rabis: Sequence[float],
    couplings: Optional[CouplingMatrices] = None,
    method: Optional[str] = None,
    tol_ss: Optional[float] = None,
    rel_tol: Optional[float] = None,
    abs_tol: Optional[float] = None,
    max_time: Optional[float] = None,
) -> List[ComparisonPoint]:
    """
    Steady-state records of both models for each Rabi rate in `rabis`.

    The solver defaults to "null-space" when the basis fits the Liouvillian budget and to
    "integration" otherwise.

    Raises:
        ResourceLimitError: above DIPOLESIM_MAX_FULL_MODEL_EMITTERS emitters
    """
    n = array.n
    if n > settings.MAX_FULL_MODEL_EMITTERS:
        raise ResourceLimitError(
            f"the full model is limited to {settings.MAX_FULL_MODEL_EMITTERS} emitters, got {n}",
            "DIPOLESIM_MAX_FULL_MODEL_EMITTERS",
            settings.MAX_FULL_MODEL_EMITTERS,
            n,
        )
    couplings = couplings or coupling_matrices(array)
    systems = {
        "truncated": EmitterSystem(array, couplings, build_basis(n, min(TRUNCATED_N_MAX, n))),
        "full": EmitterSystem(array, couplings, build_basis(n, n)),
    }

    points = []
    for rabi in rabis:
        records = {}
        for label, system in systems.items():
            report = steady_state(
                array,
                couplings,
                drive.with_rabi(rabi),
                method=_method_for(system.basis.dimension, method),
                tol_ss=tol_ss,
                rel_tol=rel_tol,
                abs_tol=abs_tol,
                max_time=max_time,
                system=system,
            )
            records[label] = observe(report.state, couplings)
        point = ComparisonPoint(float(rabi), records["truncated"], records["full"])
        logger.info(
            f"Model comparison at rabi={rabi:g}: n_ex deviation {point.n_ex_deviation:.3e}, "
            f"gamma_out deviation {point.gamma_out_deviation:.3e}"
        )
        points.append(point)
    return points


def padded_manifolds(record: ObservableRecord, n_max: int) -> np.ndarray:
    out = np.zeros(n_max + 1)
    out[: len(record.manifolds)] = record.manifolds
    return out
