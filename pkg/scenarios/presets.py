"""
Preset experiments.

`run_scenario` dispatches a validated ScenarioConfig to one preset runner. Every runner
fills a ScenarioResult with fixed-schema tables and a summary dict; the CLI writes them.
"""

import logging
from dataclasses import dataclass
from typing import Callable, Dict, List, Optional, Tuple

import numpy as np

from dipolesim.couplings import CouplingMatrices, coupling_matrices
from dipolesim.dynamics import evolve
from dipolesim.eigenmodes import (
    MOST_SUBRADIANT,
    MOST_SUPERRADIANT,
    assign_spin_waves,
    chain_dispersion,
    effective_modes,
    spectral_decay,
    subradiant_scaling,
    target_detuning,
)
from dipolesim.errors import ResourceLimitError, SingularInputError, UnknownPresetError
from dipolesim.geometry import EmitterArray, make_chain, make_ring, make_ring_pair
from dipolesim.hilbert import DensityState, Drive, EmitterSystem, Pulse, build_basis
from dipolesim.observables import emitter_emission_rates, intensity_map, observe
from dipolesim.telemetry import get_tracer
from dipolesim.workers import parallel_map

from .comparison import model_comparison, padded_manifolds
from .config import PRESETS, DriveConfig, GeometryConfig, ScenarioConfig
from .disorder import disorder_average, realization_seeds
from .evaluation import detector_spec, emission_maximum, evaluate_configuration, solve
from .results import ScenarioResult, manifold_columns, manifold_values

logger = logging.getLogger(__name__)

MODE_TARGETS = {"superradiant": MOST_SUPERRADIANT, "subradiant": MOST_SUBRADIANT}

ANGULAR_COLUMNS = ("phi", "j", "j_norm", "g2")
SCALING_COLUMNS = (
    "variable",
    "value",
    "n_total",
    "detuning",
    "gamma_out",
    "n_ex",
    "phi_max",
    "j_max",
    "j_max_over_gamma_out",
    "g2_max",
)
ANGULAR_MAP_COLUMNS = ("value", "phi", "j", "j_norm")
MAP_COLUMNS = ("x", "y", "z", "intensity", "intensity_norm")


def build_array(geometry: GeometryConfig) -> EmitterArray:
    if geometry.kind == "chain":
        return make_chain(geometry.n, geometry.d, axis=geometry.axis, orientation=geometry.orientation)
    if geometry.kind == "ring":
        return make_ring(geometry.n, geometry.d, normal=geometry.normal, orientation=geometry.orientation)
    return make_ring_pair(
        geometry.n,
        geometry.n_undriven,
        geometry.d,
        geometry.center_separation,
        tilt_angle=geometry.tilt_angle,
        orientation_tilt_x=geometry.orientation_tilt_x,
    )


def resolve_detuning(config: DriveConfig, array: EmitterArray, couplings: CouplingMatrices) -> float:
    """Numeric detuning, or -shift of the targeted mode of the whole array or its driven ring."""
    if config.target_mode is None:
        return float(config.detuning)
    subset = array.group("driven") if config.detuning_reference == "driven" else None
    return target_detuning(couplings, MODE_TARGETS[config.target_mode], subset)


def build_drive(config: DriveConfig, array: EmitterArray, couplings: CouplingMatrices) -> Drive:
    pulse = None
    if config.pulse is not None:
        pulse = Pulse(config.pulse.amplitude, config.pulse.center, config.pulse.width)
    return Drive.plane_wave(
        config.rabi,
        resolve_detuning(config, array, couplings),
        direction=config.k_direction,
        polarization=config.polarization,
        lambda0=array.lambda0,
        pulse=pulse,
        targets=array.group("driven") if config.targets == "driven" else None,
    )


def apply_sweep_value(config: ScenarioConfig, value: float) -> ScenarioConfig:
    variable = config.sweep.variable
    if variable == "n":
        if config.preset == "tilted_polarization":
            return config.with_geometry(n=int(value), n_undriven=int(value))
        return config.with_geometry(n=int(value))
    if variable == "n_undriven":
        return config.with_geometry(n_undriven=int(value))
    if variable == "d":
        return config.with_geometry(d=float(value))
    if variable == "rabi":
        return config.with_drive(rabi=float(value))
    return config.with_drive(detuning=float(value))


def _intensity_map_table(result: ScenarioResult, config: ScenarioConfig, state: DensityState, array: EmitterArray):
    xs, ys = config.map.grid()
    grid = intensity_map(state, array, xs, ys, config.map.z)
    peak = np.nanmax(grid) if np.any(np.isfinite(grid)) else np.nan
    table = result.add_table("intensity_map", MAP_COLUMNS)
    for iy, y in enumerate(ys):
        for ix, x in enumerate(xs):
            value = float(grid[iy, ix])
            table.append(x=float(x), y=float(y), z=config.map.z, intensity=value, intensity_norm=value / peak)


@dataclass
class _SteadyPoint:
    """One steady-state configuration with its angular profile."""

    value: Optional[float]
    n_total: int
    detuning: float
    gamma_out: float
    n_ex: float
    manifolds: np.ndarray
    phis: np.ndarray
    j: np.ndarray
    g2: np.ndarray
    phi_max: float
    j_max: float
    g2_max: float
    residual: float
    state: Optional[DensityState] = None
    array: Optional[EmitterArray] = None

    def scaling_row(self, variable: str) -> Dict:
        return {
            "variable": variable,
            "value": self.value,
            "n_total": self.n_total,
            "detuning": self.detuning,
            "gamma_out": self.gamma_out,
            "n_ex": self.n_ex,
            "phi_max": self.phi_max,
            "j_max": self.j_max,
            "j_max_over_gamma_out": self.j_max / self.gamma_out if self.gamma_out > 0 else float("nan"),
            "g2_max": self.g2_max,
        }


def _steady_point(config: ScenarioConfig, value: Optional[float] = None, full_g2: bool = False, keep_state=False):
    array = build_array(config.geometry)
    couplings = coupling_matrices(array)
    drive = build_drive(config.drive, array, couplings)
    report = solve(array, drive, config.tolerances, config.effective_n_max, couplings)
    result = emission_maximum(
        report, array, couplings, config.detector.phi_grid(), detector_spec(config.detector), full_g2=full_g2
    )
    record = result.record
    return _SteadyPoint(
        value=value,
        n_total=array.n,
        detuning=drive.detuning,
        gamma_out=record.gamma_out,
        n_ex=record.n_ex,
        manifolds=record.manifolds,
        phis=result.scan.phis,
        j=result.scan.j,
        g2=result.scan.g2,
        phi_max=result.phi_max,
        j_max=record.j_phi,
        g2_max=record.g2,
        residual=report.residual,
        state=report.state if keep_state else None,
        array=array if keep_state else None,
    )


def _sweep_point(item: Tuple[ScenarioConfig, float]) -> _SteadyPoint:
    config, value = item
    return _steady_point(apply_sweep_value(config, value), value)


def _single_profile(result: ScenarioResult, config: ScenarioConfig) -> _SteadyPoint:
    point = _steady_point(config, full_g2=True, keep_state=True)
    table = result.add_table("angular_scan", ANGULAR_COLUMNS)
    for phi, j, g2 in zip(point.phis, point.j, point.g2):
        table.append(phi=float(phi), j=float(j), j_norm=float(j / point.j_max), g2=float(g2))
    result.summary.update(
        {
            "n_total": point.n_total,
            "detuning": point.detuning,
            "gamma_out": point.gamma_out,
            "gamma_out_over_single": point.gamma_out / 0.5,
            "n_ex": point.n_ex,
            "manifolds": point.manifolds.tolist(),
            "phi_max": point.phi_max,
            "j_max": point.j_max,
            "j_max_over_gamma_out": point.j_max / point.gamma_out if point.gamma_out > 0 else None,
            "g2_max": point.g2_max,
            "steady_state_residual": point.residual,
        }
    )
    if config.map is not None:
        _intensity_map_table(result, config, point.state, point.array)
    return point


def _sweep_profiles(result: ScenarioResult, config: ScenarioConfig, workers: Optional[int]) -> List[_SteadyPoint]:
    variable = config.sweep.variable
    points = parallel_map(_sweep_point, [(config, v) for v in config.sweep.values], workers)
    scaling = result.add_table("scaling", SCALING_COLUMNS)
    angular = result.add_table("angular_map", ANGULAR_MAP_COLUMNS)
    for point in points:
        scaling.append(**point.scaling_row(variable))
        for phi, j in zip(point.phis, point.j):
            angular.append(value=point.value, phi=float(phi), j=float(j), j_norm=float(j / point.j_max))
    result.summary["sweep"] = {"variable": variable, "values": list(config.sweep.values)}
    return points


def run_steady_profile(config: ScenarioConfig, result: ScenarioResult, workers: Optional[int] = None):
    """chain_steady, ring_pair and tilted_polarization: one angular profile or a parameter sweep."""
    if config.sweep is None:
        _single_profile(result, config)
    else:
        _sweep_profiles(result, config, workers)


def _statistics_point(item: Tuple[ScenarioConfig, float, str]) -> _SteadyPoint:
    config, d, target = item
    config = config.with_geometry(d=float(d))
    if target != "fixed":
        config = config.with_drive(detuning=target)
    return _steady_point(config, d)


def run_chain_statistics(config: ScenarioConfig, result: ScenarioResult, workers: Optional[int] = None):
    """Manifold populations and g2 versus spacing, for superradiant and subradiant driving."""
    spacings = config.sweep.values if config.sweep is not None else (config.geometry.d,)
    targets = ("superradiant", "subradiant") if config.drive.target_mode is not None else ("fixed",)
    items = [(config, d, target) for target in targets for d in spacings]
    points = parallel_map(_statistics_point, items, workers)

    n_max = config.effective_n_max
    statistics = result.add_table(
        "statistics",
        ("target", "d", "detuning", "gamma_out", "n_ex", "phi_max", "j_max", "g2_max") + tuple(manifold_columns(n_max)),
    )
    manifolds = result.add_table("manifolds", ("target", "d", "n", "population"))
    for (_, d, target), point in zip(items, points):
        statistics.append(
            target=target,
            d=float(d),
            detuning=point.detuning,
            gamma_out=point.gamma_out,
            n_ex=point.n_ex,
            phi_max=point.phi_max,
            j_max=point.j_max,
            g2_max=point.g2_max,
            **manifold_values(point.manifolds, n_max),
        )
        for n, population in enumerate(point.manifolds):
            manifolds.append(target=target, d=float(d), n=n, population=float(population))
    result.summary["targets"] = list(targets)


def run_pulse_subradiant(config: ScenarioConfig, result: ScenarioResult, workers: Optional[int] = None):
    """Gaussian-pulse preparation of a collective mode, sampled over [0, t_final]."""
    array = build_array(config.geometry)
    couplings = coupling_matrices(array)
    drive = build_drive(config.drive, array, couplings)
    n_max = config.effective_n_max
    system = EmitterSystem(array, couplings, build_basis(array.n, n_max))
    times = np.linspace(0.0, config.evolution.t_final, config.evolution.n_samples)
    last = {}

    def record(state: DensityState):
        last["state"] = state
        return observe(state, couplings)

    trajectory = evolve(
        DensityState.ground(system.basis),
        drive,
        (0.0, config.evolution.t_final),
        array,
        couplings,
        rel_tol=config.tolerances.rel_tol,
        abs_tol=config.tolerances.abs_tol,
        sample_times=times,
        observer=record,
        system=system,
    )

    table = result.add_table("trajectory", ("t", "envelope", "n_ex", "gamma_out") + tuple(manifold_columns(n_max)))
    for t, rec in zip(trajectory.times, trajectory.states):
        table.append(
            t=float(t),
            envelope=drive.amplitude(t),
            n_ex=rec.n_ex,
            gamma_out=rec.gamma_out,
            **manifold_values(rec.manifolds, n_max),
        )

    final = last["state"]
    rates = emitter_emission_rates(final, couplings)
    emitters = result.add_table("emitter_rates", ("emitter", "x", "y", "z", "rate"))
    for j, (position, rate) in enumerate(zip(array.positions, rates)):
        emitters.append(emitter=j, x=float(position[0]), y=float(position[1]), z=float(position[2]), rate=float(rate))

    end = trajectory.states[-1]
    result.records.append(end)
    result.summary.update(
        {
            "detuning": drive.detuning,
            "t_final": float(trajectory.times[-1]),
            "gamma_out": end.gamma_out,
            "n_ex": end.n_ex,
            "manifolds": end.manifolds.tolist(),
            "steps": trajectory.steps,
            "trace_correction": trajectory.trace_correction,
            "hermiticity_correction": trajectory.hermiticity_correction,
        }
    )
    if config.map is not None:
        _intensity_map_table(result, config, final, array)


def run_disorder_sweep(config: ScenarioConfig, result: ScenarioResult, workers: Optional[int] = None):
    """
    Gamma_out and g2 at the emission maximum, averaged over positional disorder.

    The detuning is fixed by the ordered chain of each length and kept for all realizations.
    """
    disorder = config.disorder
    lengths = config.sweep.values if config.sweep is not None else (config.geometry.n,)
    detector = detector_spec(config.detector)
    phi_grid = config.detector.phi_grid()

    summary_table = result.add_table(
        "disorder",
        (
            "n",
            "epsilon",
            "n_realizations",
            "n_failed",
            "gamma_out_mean",
            "gamma_out_std",
            "g2_mean",
            "g2_std",
            "ordered_gamma_out",
            "ordered_g2",
        ),
    )
    realizations = result.add_table(
        "realizations", ("n", "epsilon", "realization", "seed", "gamma_out", "n_ex", "phi_max", "j_max", "g2", "error")
    )

    for n in lengths:
        point = config.with_geometry(n=int(n))
        array = build_array(point.geometry)
        drive = build_drive(point.drive, array, coupling_matrices(array))
        n_max = point.effective_n_max
        ordered = evaluate_configuration(array, drive, phi_grid, detector, point.tolerances, n_max)
        for epsilon in disorder.epsilon:
            stats = disorder_average(
                array,
                drive,
                epsilon,
                point.geometry.d,
                disorder.n_realizations,
                disorder.seed,
                phi_grid,
                detector,
                point.tolerances,
                n_max,
                workers,
            )
            gamma_mean, gamma_std = stats.gamma_out
            g2_mean, g2_std = stats.g2
            summary_table.append(
                n=int(n),
                epsilon=float(epsilon),
                n_realizations=disorder.n_realizations,
                n_failed=stats.n_failed,
                gamma_out_mean=gamma_mean,
                gamma_out_std=gamma_std,
                g2_mean=g2_mean,
                g2_std=g2_std,
                ordered_gamma_out=ordered.record.gamma_out,
                ordered_g2=ordered.record.g2,
            )
            for r in stats.realizations:
                realizations.append(
                    n=int(n),
                    epsilon=r.epsilon,
                    realization=r.index,
                    seed=r.seed,
                    gamma_out=r.gamma_out,
                    n_ex=r.n_ex,
                    phi_max=r.phi_max,
                    j_max=r.j_max,
                    g2=r.g2,
                    error=r.error["error"] if r.error else "",
                )
    result.seeds = [disorder.seed] + realization_seeds(disorder.seed, disorder.n_realizations)
    result.summary.update({"seed": disorder.seed, "n_realizations": disorder.n_realizations})


def run_model_comparison(config: ScenarioConfig, result: ScenarioResult, workers: Optional[int] = None):
    """Truncated versus full model over a Rabi-rate sweep."""
    array = build_array(config.geometry)
    couplings = coupling_matrices(array)
    drive = build_drive(config.drive, array, couplings)
    rabis = config.sweep.values if config.sweep is not None else (config.drive.rabi,)
    tol = config.tolerances
    method = tol.method if tol.method != "integration" else None
    points = model_comparison(
        array, drive, rabis, couplings, method, tol.steady_state, tol.rel_tol, tol.abs_tol, tol.max_time
    )

    table = result.add_table(
        "model_comparison",
        (
            "rabi",
            "n_ex_truncated",
            "n_ex_full",
            "n_ex_deviation",
            "gamma_out_truncated",
            "gamma_out_full",
            "gamma_out_deviation",
        ),
    )
    manifolds = result.add_table("model_comparison_manifolds", ("rabi", "model", "n", "population"))
    for point in points:
        table.append(
            rabi=point.rabi,
            n_ex_truncated=point.truncated.n_ex,
            n_ex_full=point.full.n_ex,
            n_ex_deviation=point.n_ex_deviation,
            gamma_out_truncated=point.truncated.gamma_out,
            gamma_out_full=point.full.gamma_out,
            gamma_out_deviation=point.gamma_out_deviation,
        )
        for model, record in (("truncated", point.truncated), ("full", point.full)):
            for n, population in enumerate(padded_manifolds(record, array.n)):
                manifolds.append(rabi=point.rabi, model=model, n=n, population=float(population))
        result.records.extend([point.truncated, point.full])
    result.summary.update({"n": array.n, "detuning": drive.detuning, "rabis": list(rabis)})


def run_dispersion(config: ScenarioConfig, result: ScenarioResult, workers: Optional[int] = None):
    """Infinite-chain dispersion, finite-chain modes placed on it, and optional N^-p scaling."""
    geometry = config.geometry
    options = config.dispersion
    array = build_array(geometry)
    d = geometry.d

    def curve(k: float) -> complex:
        try:
            return chain_dispersion(
                k, d, orientation=geometry.orientation, j_max=options.j_max, tol=options.tol, lambda0=array.lambda0
            )
        except SingularInputError:
            logger.warning(f"k_y={k:.6g} lies on the light line, dispersion recorded as nan")
            return complex(np.nan, np.nan)

    table = result.add_table("dispersion", ("k_y", "k_norm", "shift", "decay"))
    for k in np.linspace(0.0, np.pi / d, options.k_points):
        value = curve(float(k))
        table.append(k_y=float(k), k_norm=float(k * d / np.pi), shift=value.real, decay=-2.0 * value.imag)

    modes = effective_modes(coupling_matrices(array))
    finite = result.add_table(
        "finite_modes",
        ("mode", "shift", "decay", "harmonic", "k_y", "overlap", "curve_shift", "curve_decay", "spectral_decay"),
    )
    for assignment in assign_spin_waves(array, modes):
        value = curve(min(assignment.k_y, np.pi / d))
        finite.append(
            mode=assignment.mode.label,
            shift=assignment.mode.shift,
            decay=assignment.mode.decay,
            harmonic=assignment.n,
            k_y=assignment.k_y,
            overlap=assignment.overlap,
            curve_shift=value.real,
            curve_decay=-2.0 * value.imag,
            spectral_decay=spectral_decay(array, assignment.mode),
        )
    result.summary.update({"n": array.n, "d": d, "light_line": array.k0})

    if options.scaling_ns:
        ns = [int(n) for n in options.scaling_ns]
        exponent, decays = subradiant_scaling(ns, d, geometry.orientation)
        scaling = result.add_table("subradiant_scaling", ("n", "min_decay"))
        for n, decay in zip(ns, decays):
            scaling.append(n=n, min_decay=float(decay))
        result.summary["subradiant_exponent"] = exponent


def _detuning_point(item: Tuple[ScenarioConfig, EmitterArray, Drive, float]):
    config, array, drive, detuning = item
    couplings = coupling_matrices(array)
    report = solve(array, drive.with_detuning(detuning), config.tolerances, config.effective_n_max, couplings)
    return observe(report.state, couplings)


def run_detuning_scan(config: ScenarioConfig, result: ScenarioResult, workers: Optional[int] = None):
    """Steady-state populations and emission rate versus laser detuning."""
    array = build_array(config.geometry)
    couplings = coupling_matrices(array)
    drive = build_drive(config.with_drive(detuning=0.0).drive, array, couplings)
    records = parallel_map(_detuning_point, [(config, array, drive, v) for v in config.sweep.values], workers)

    n_max = config.effective_n_max
    table = result.add_table("detuning_scan", ("detuning", "n_ex", "gamma_out") + tuple(manifold_columns(n_max)))
    for detuning, record in zip(config.sweep.values, records):
        table.append(
            detuning=float(detuning), n_ex=record.n_ex, gamma_out=record.gamma_out, **manifold_values(record.manifolds, n_max)
        )
    result.records.extend(records)
    result.summary["mode_detunings"] = [-mode.shift for mode in effective_modes(couplings)]
    result.summary["mode_decays"] = [mode.decay for mode in effective_modes(couplings)]


RUNNERS: Dict[str, Callable[[ScenarioConfig, ScenarioResult, Optional[int]], None]] = {
    "chain_steady": run_steady_profile,
    "chain_statistics": run_chain_statistics,
    "pulse_subradiant": run_pulse_subradiant,
    "ring_pair": run_steady_profile,
    "tilted_polarization": run_steady_profile,
    "disorder_sweep": run_disorder_sweep,
    "model_comparison": run_model_comparison,
    "dispersion": run_dispersion,
    "detuning_scan": run_detuning_scan,
}


def run_scenario(config: ScenarioConfig, workers: Optional[int] = None) -> ScenarioResult:
    """
    Run the preset named by `config.preset`.

    Raises:
        UnknownPresetError: for a preset without a runner
        ResourceLimitError: re-raised with the preset name when a budget is exceeded
    """
    runner = RUNNERS.get(config.preset)
    if runner is None:
        raise UnknownPresetError(f"unknown preset {config.preset!r}; available: {', '.join(PRESETS)}", field="preset")

    result = ScenarioResult(config.preset)
    logger.info(f"Running preset '{config.preset}' ({config.name or 'unnamed'}) with N={config.geometry.n_total}")
    with get_tracer(__name__).start_as_current_span("run_scenario") as span:
        span.set_attribute("dipolesim.preset", config.preset)
        span.set_attribute("dipolesim.n_emitters", config.geometry.n_total)
        try:
            runner(config, result, workers)
        except ResourceLimitError as e:
            raise ResourceLimitError(f"preset '{config.preset}': {e.message}", e.budget, e.limit, e.requested) from e
    return result

