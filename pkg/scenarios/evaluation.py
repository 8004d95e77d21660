"""Steady-state evaluation of one emitter configuration, shared by presets and disorder runs."""

import logging
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from dipolesim.couplings import CouplingMatrices, coupling_matrices
from dipolesim.dynamics import SteadyStateReport, steady_state
from dipolesim.geometry import EmitterArray
from dipolesim.hilbert import Drive, EmitterSystem, build_basis
from dipolesim.observables import AngularScan, DetectorScanner, DetectorSpec, ObservableRecord, observe

from .config import DetectorConfig, TolerancesConfig

logger = logging.getLogger(__name__)


def detector_spec(config: DetectorConfig) -> DetectorSpec:
    return DetectorSpec(
        delta_phi=config.delta_phi_rad,
        r_far=config.r_far,
        n_quad=config.n_quad,
        g2_mode=config.g2_mode,
        polarization=config.polarization,
        far_field=config.far_field,
    )


def solve(
    array: EmitterArray,
    drive: Drive,
    tolerances: TolerancesConfig,
    n_max: int = 2,
    couplings: Optional[CouplingMatrices] = None,
) -> SteadyStateReport:
    couplings = couplings or coupling_matrices(array)
    system = EmitterSystem(array, couplings, build_basis(array.n, min(n_max, array.n)))
    return steady_state(
        array,
        couplings,
        drive,
        method=tolerances.method,
        tol_ss=tolerances.steady_state,
        rel_tol=tolerances.rel_tol,
        abs_tol=tolerances.abs_tol,
        max_time=tolerances.max_time,
        system=system,
    )


@dataclass
class EmissionMaximum:
    """Angular profile of one steady state, with g2(0) taken where J(phi) peaks."""

    record: ObservableRecord
    scan: AngularScan
    phi_max: float


def emission_maximum(
    report: SteadyStateReport,
    array: EmitterArray,
    couplings: CouplingMatrices,
    phi_grid: Sequence[float],
    detector: DetectorSpec,
    full_g2: bool = False,
) -> EmissionMaximum:
    """
    Scan J(phi) and evaluate g2(0) at the argmax of the scan.

    With `full_g2` the g2 column of the scan is filled at every angle as well.
    """
    record = observe(report.state, couplings)
    scanner = DetectorScanner(report.state, array, detector)
    scan = scanner.scan(phi_grid, with_g2=full_g2)
    index = scan.argmax_index
    phi_max = float(scan.phis[index])
    record.j_phi = float(scan.j[index])
    record.intensity = scanner.intensity(phi_max)
    record.g2 = float(scan.g2[index]) if full_g2 and not np.isnan(scan.g2[index]) else scanner.g2(phi_max)
    return EmissionMaximum(record, scan, phi_max)


def evaluate_configuration(
    array: EmitterArray,
    drive: Drive,
    phi_grid: Sequence[float],
    detector: DetectorSpec,
    tolerances: TolerancesConfig,
    n_max: int = 2,
    full_g2: bool = False,
) -> EmissionMaximum:
    couplings = coupling_matrices(array)
    report = solve(array, drive, tolerances, n_max, couplings)
    return emission_maximum(report, array, couplings, phi_grid, detector, full_g2)
