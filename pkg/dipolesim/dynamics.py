"""
Time evolution and steady states of the collective master equation.

Trajectories are integrated with scipy's DOP853 stepper. After every accepted step the
state is re-symmetrized and renormalized to unit trace; the corrections are accumulated
and logged. Steady states come from long-time integration (default, finished by a linear
solve warm-started from the integrated state once the residual stalls), shifted inverse
iteration on the vectorized Liouvillian (small systems) or preconditioned GMRES.
"""

import logging
from dataclasses import dataclass, field
from typing import Any, Callable, List, Optional, Sequence, Tuple

import numpy as np
import scipy.linalg
import scipy.sparse as sp
from scipy.integrate import DOP853
from scipy.sparse.linalg import LinearOperator, gmres, splu

from . import settings
from .couplings import CouplingMatrices
from .errors import ConvergenceError, IntegrationError, InvalidArgumentError, NumericError, StiffnessError
from .geometry import EmitterArray
from .hilbert import Basis, DensityState, Drive, EmitterSystem, LindbladGenerator, check_liouvillian_budget
from .telemetry import get_tracer

logger = logging.getLogger(__name__)

STEADY_STATE_METHODS = ("integration", "null-space", "krylov")

# Per-step deviation that counts as a broken trajectory rather than rounding
INVARIANT_TOLERANCE = 1e-6

NULL_SPACE_SHIFT = 1e-8
NULL_SPACE_MAX_ITERATIONS = 50

KRYLOV_RTOL = 1e-12
KRYLOV_RESTART = 80
KRYLOV_MAX_CYCLES = 40
KRYLOV_REFINEMENTS = 4
KRYLOV_REGULARIZATION = 1e-2

# Integration hands over to a linear solve below this residual per basis state,
# or once the residual has not halved within PLATEAU_WINDOW accepted steps
HANDOFF_RESIDUAL = 1e-7
PLATEAU_FACTOR = 0.5
PLATEAU_WINDOW = 400
MAX_HANDOFFS = 3


@dataclass
class Trajectory:
    """Sampled states (or whatever the observer mapped them to) at increasing times."""

    times: np.ndarray
    states: List[Any]
    steps: int = 0
    trace_correction: float = 0.0
    hermiticity_correction: float = 0.0


@dataclass
class SteadyStateReport:
    state: DensityState
    method: str
    residual: float
    iterations: int
    tolerance: float
    details: dict = field(default_factory=dict)


def _hermitize(rho: np.ndarray) -> np.ndarray:
    rho = 0.5 * (rho + rho.conj().T)
    return rho / np.trace(rho).real


class _Stepper:
    """DOP853 stepping with per-step invariant restoration."""

    def __init__(self, generator: LindbladGenerator, rel_tol: float, abs_tol: float):
        self.generator = generator
        self.dimension = generator.dimension
        self.rel_tol = rel_tol
        self.abs_tol = abs_tol
        self.steps = 0
        self.trace_correction = 0.0
        self.hermiticity_correction = 0.0

    def _unvec(self, y: np.ndarray) -> np.ndarray:
        return y.reshape((self.dimension, self.dimension), order="F")

    def _restore(self, solver) -> None:
        rho = self._unvec(solver.y)
        herm = float(np.max(np.abs(rho - rho.conj().T)))
        trace_error = abs(np.trace(rho) - 1.0)
        if herm > INVARIANT_TOLERANCE or trace_error > INVARIANT_TOLERANCE:
            raise IntegrationError(
                f"trajectory broke density-matrix invariants at t={solver.t:.6g} "
                f"(hermiticity {herm:.3e}, trace {trace_error:.3e})",
                {"time": solver.t, "hermiticity": herm, "trace": trace_error},
            )
        self.hermiticity_correction += herm
        self.trace_correction += trace_error
        solver.y = _hermitize(rho).reshape(-1, order="F")
        # keep the first-same-as-last derivative consistent with the corrected state
        solver.f = solver.fun(solver.t, solver.y)

    def run(
        self,
        rho0: np.ndarray,
        t0: float,
        t1: float,
        sample_times: Sequence[float] = (),
        on_sample: Optional[Callable[[float, np.ndarray], None]] = None,
        stop: Optional[Callable[[Any], bool]] = None,
    ):
        """Integrate from t0 towards t1; returns the solver, stopped early when `stop` says so."""
        y0 = np.asarray(rho0, dtype=complex).reshape(-1, order="F")
        solver = DOP853(self.generator.rhs_vec, t0, y0, t1, rtol=self.rel_tol, atol=self.abs_tol)
        pending = list(sample_times)

        while pending and pending[0] <= t0:
            on_sample(pending.pop(0), _hermitize(self._unvec(y0.copy())))

        while solver.status == "running":
            message = solver.step()
            if solver.status == "failed":
                if message and "step size" in message:
                    raise StiffnessError(
                        f"step size underflow at t={solver.t:.6g}: {message}; "
                        f"try looser tolerances than rel_tol={self.rel_tol:g}, abs_tol={self.abs_tol:g}",
                        {"time": solver.t, "rel_tol": self.rel_tol, "abs_tol": self.abs_tol},
                    )
                raise IntegrationError(f"integrator failed at t={solver.t:.6g}: {message}", {"time": solver.t})
            self.steps += 1

            if pending and pending[0] <= solver.t:
                interpolant = solver.dense_output()
                while pending and pending[0] <= solver.t:
                    ts = pending.pop(0)
                    on_sample(ts, _hermitize(self._unvec(np.asarray(interpolant(ts)))))

            self._restore(solver)
            if self.steps % 1000 == 0:
                logger.debug(f"DOP853 step {self.steps}: t={solver.t:.4g}, |drho/dt|={np.linalg.norm(solver.f):.3e}")
            if stop is not None and stop(solver):
                break
        return solver


def _resolve_tolerances(rel_tol: Optional[float], abs_tol: Optional[float]) -> Tuple[float, float]:
    return (
        settings.DEFAULT_REL_TOL if rel_tol is None else rel_tol,
        settings.DEFAULT_ABS_TOL if abs_tol is None else abs_tol,
    )


def evolve(
    initial: DensityState,
    drive: Drive,
    t_span: Tuple[float, float],
    array: EmitterArray,
    couplings: CouplingMatrices,
    rel_tol: Optional[float] = None,
    abs_tol: Optional[float] = None,
    sample_times: Optional[Sequence[float]] = None,
    observer: Optional[Callable[[DensityState], Any]] = None,
    system: Optional[EmitterSystem] = None,
) -> Trajectory:
    """
    Integrate the master equation from `initial` over `t_span`.

    `sample_times` defaults to the end point. Each sample is passed through `observer`
    (identity by default), so long trajectories can keep derived records only.

    Raises:
        StiffnessError: when the step size underflows
        IntegrationError: when the trajectory breaks trace or Hermiticity by more than 1e-6
    """
    t0, t1 = float(t_span[0]), float(t_span[1])
    if t1 <= t0:
        raise InvalidArgumentError(f"t_span must be increasing, got ({t0}, {t1})")
    times = np.unique(np.asarray([t1] if sample_times is None else sample_times, dtype=float))
    if times.size == 0 or times[0] < t0 or times[-1] > t1:
        raise InvalidArgumentError(f"sample times must lie inside [{t0}, {t1}]")

    rel_tol, abs_tol = _resolve_tolerances(rel_tol, abs_tol)
    system = system or EmitterSystem(array, couplings, initial.basis)
    observe = observer or (lambda state: state)
    basis = initial.basis
    samples: List[Any] = []

    def on_sample(ts, rho):
        samples.append(observe(DensityState(rho, basis, ts)))

    with get_tracer(__name__).start_as_current_span("evolve") as span:
        span.set_attribute("dipolesim.n_emitters", basis.n_emitters)
        span.set_attribute("dipolesim.dimension", basis.dimension)
        stepper = _Stepper(system.generator(drive), rel_tol, abs_tol)
        stepper.run(initial.rho, t0, t1, times.tolist(), on_sample)

    logger.info(
        f"Trajectory t=[{t0:g}, {t1:g}] D={basis.dimension}: {stepper.steps} steps, "
        f"cumulative trace correction {stepper.trace_correction:.3e}, "
        f"hermiticity correction {stepper.hermiticity_correction:.3e}"
    )
    return Trajectory(times, samples, stepper.steps, stepper.trace_correction, stepper.hermiticity_correction)


def _residual(generator: LindbladGenerator, rho: np.ndarray) -> float:
    return float(np.linalg.norm(generator.rhs(0.0, rho)))


class _ResidualWatch:
    """
    Stop rule for long-time integration.

    Fires once |d rho/dt| drops below `tol` or the hand-off level, or when it has not
    halved over `window` accepted steps.
    """

    def __init__(self, tol: float, handoff: float, window: int = PLATEAU_WINDOW):
        self.tol = tol
        self.handoff = max(tol, handoff)
        self.window = window
        self.best = np.inf
        self.stalled = 0
        self.reason = None

    def __call__(self, solver) -> bool:
        residual = float(np.linalg.norm(solver.f))
        if residual < self.handoff:
            self.reason = "converged" if residual < self.tol else "handoff"
            return True
        if residual < PLATEAU_FACTOR * self.best:
            self.best = residual
            self.stalled = 0
        else:
            self.stalled += 1
        if self.stalled >= self.window:
            self.reason = "plateau"
            return True
        return False


def _polish(generator: LindbladGenerator, rho: np.ndarray, tol: float):
    """Finish an integrated state with a linear solve warm-started from it."""
    if generator.dimension <= settings.MAX_LIOUVILLIAN_DIMENSION:
        return _steady_by_null_space(generator, tol, initial=rho)
    return _gmres_refine(generator, tol, rho.reshape(-1, order="F"))


def _steady_by_integration(generator: LindbladGenerator, tol: float, rel_tol, abs_tol, max_time, initial=None):
    basis = generator.basis
    rho = DensityState.ground(basis).rho if initial is None else initial
    stepper = _Stepper(generator, rel_tol, abs_tol)
    t = 0.0
    residual = _residual(generator, rho)
    handoffs = 0

    while t < max_time:
        watch = _ResidualWatch(tol, HANDOFF_RESIDUAL * basis.dimension)
        solver = stepper.run(rho, t, max_time, stop=watch)
        rho = stepper._unvec(solver.y).copy()
        t = float(solver.t)
        residual = _residual(generator, rho)
        if residual < tol:
            logger.info(f"Steady state by integration reached at t={t:.4g} after {stepper.steps} steps")
            return rho, stepper.steps, {"t_final": t, "trace_correction": stepper.trace_correction}
        if watch.reason is None or handoffs >= MAX_HANDOFFS:
            break

        handoffs += 1
        logger.info(f"Integration {watch.reason} at t={t:.4g} (residual {residual:.3e}), polishing by linear solve")
        try:
            polished, iterations, details = _polish(generator, rho, tol)
        except ConvergenceError as e:
            logger.warning(f"Polish after t={t:.4g} failed ({e}), integrating further")
            continue
        details.update({"t_final": t, "trace_correction": stepper.trace_correction, "polish_iterations": iterations})
        return polished, stepper.steps + iterations, details

    raise ConvergenceError(
        f"steady-state integration did not converge by t={t:g} (residual {residual:.3e}, tolerance {tol:.3e})",
        residual,
        {"method": "integration", "t_final": t, "steps": stepper.steps, "handoffs": handoffs},
    )


def _steady_by_null_space(generator: LindbladGenerator, tol: float, max_dimension=None, initial=None):
    d = generator.dimension
    check_liouvillian_budget(d, max_dimension)
    liouvillian = generator.liouvillian(max_dimension=max_dimension)
    shifted = (liouvillian - NULL_SPACE_SHIFT * sp.identity(d * d, dtype=complex, format="csr")).tocsc()
    try:
        lu = splu(shifted)
    except RuntimeError as e:
        raise NumericError(f"sparse LU of the shifted Liouvillian failed: {e}") from e

    x = (np.eye(d, dtype=complex) / d if initial is None else initial).reshape(-1, order="F")
    residual = np.inf
    for iteration in range(1, NULL_SPACE_MAX_ITERATIONS + 1):
        x = lu.solve(x)
        x /= np.linalg.norm(x)
        rho = _hermitize(x.reshape((d, d), order="F") / np.trace(x.reshape((d, d), order="F")))
        residual = _residual(generator, rho)
        if residual < tol:
            return rho, iteration, {"shift": NULL_SPACE_SHIFT}
    raise ConvergenceError(
        f"shifted inverse iteration did not converge (residual {residual:.3e}, tolerance {tol:.3e})",
        residual,
        {"method": "null-space", "iterations": NULL_SPACE_MAX_ITERATIONS},
    )


def _eigenbasis_preconditioner(generator: LindbladGenerator) -> LinearOperator:
    """
    Inverse of rho -> -i (H_nh rho - rho H_nh^dagger) in the eigenbasis of H_nh.

    With H_nh = V diag(lambda) V^-1 that map is diagonal on Y = V^-1 rho V^-dagger with
    entries -i (lambda_a - conj(lambda_b)); small entries are clipped.
    """
    d = generator.dimension
    h_nh = generator.effective_hamiltonian().toarray()
    try:
        eigenvalues, vectors = scipy.linalg.eig(h_nh)
        inverse = scipy.linalg.inv(vectors)
    except (np.linalg.LinAlgError, ValueError) as e:
        raise NumericError(f"eigendecomposition of the effective Hamiltonian failed: {e}") from e

    denominators = -1j * (eigenvalues[:, None] - eigenvalues.conj()[None, :])
    small = np.abs(denominators) < KRYLOV_REGULARIZATION
    denominators[small] = -KRYLOV_REGULARIZATION
    vectors_h = vectors.conj().T
    inverse_h = inverse.conj().T

    def apply(v):
        x = np.asarray(v).reshape((d, d), order="F")
        y = (inverse @ x @ inverse_h) / denominators
        return (vectors @ y @ vectors_h).reshape(-1, order="F")

    return LinearOperator((d * d, d * d), matvec=apply, dtype=complex)


def _gmres_refine(generator: LindbladGenerator, tol: float, x0: np.ndarray):
    """
    Solve L x + (1/D) I tr(x) = (1/D) I with restarted GMRES, re-symmetrizing between passes.

    Raises ConvergenceError when the residual is still above `tol` after the last pass.
    """
    d = generator.dimension
    trace_row = np.eye(d, dtype=complex).reshape(-1, order="F")
    anchor = trace_row / d

    def matvec(x):
        x = np.asarray(x).reshape(-1)
        return generator.rhs_vec(0.0, x) + anchor * (trace_row @ x)

    operator = LinearOperator((d * d, d * d), matvec=matvec, dtype=complex)
    preconditioner = _eigenbasis_preconditioner(generator)

    inner = [0]

    def count(_):
        inner[0] += 1

    x = x0
    residual = np.inf
    for refinement in range(1, KRYLOV_REFINEMENTS + 1):
        x, info = gmres(
            operator,
            anchor,
            x0=x,
            rtol=KRYLOV_RTOL,
            atol=0.0,
            restart=KRYLOV_RESTART,
            maxiter=KRYLOV_MAX_CYCLES,
            M=preconditioner,
            callback=count,
            callback_type="pr_norm",
        )
        rho = _hermitize(x.reshape((d, d), order="F"))
        residual = _residual(generator, rho)
        logger.debug(f"GMRES pass {refinement}: info={info}, residual {residual:.3e}")
        if residual < tol:
            return rho, inner[0], {"refinements": refinement}
        x = rho.reshape(-1, order="F")
    raise ConvergenceError(
        f"GMRES did not converge (residual {residual:.3e}, tolerance {tol:.3e})",
        residual,
        {"method": "krylov", "refinements": KRYLOV_REFINEMENTS, "inner_iterations": inner[0]},
    )


def _steady_by_krylov(generator: LindbladGenerator, tol: float, rel_tol, abs_tol, max_time):
    try:
        return _gmres_refine(generator, tol, DensityState.ground(generator.basis).vec())
    except ConvergenceError as e:
        logger.info(f"{e}; falling back to integration")
    rho, steps, details = _steady_by_integration(generator, tol, rel_tol, abs_tol, max_time)
    details["refinements"] = KRYLOV_REFINEMENTS
    return rho, steps, details


def steady_state(
    array: EmitterArray,
    couplings: CouplingMatrices,
    drive: Drive,
    method: str = "integration",
    tol_ss: Optional[float] = None,
    basis: Optional[Basis] = None,
    rel_tol: Optional[float] = None,
    abs_tol: Optional[float] = None,
    max_time: Optional[float] = None,
    system: Optional[EmitterSystem] = None,
) -> SteadyStateReport:
    """
    Stationary state of a time-independent drive.

    The tolerance is on the Frobenius norm of d rho/dt and defaults to 1e-10 * D.

    Raises:
        InvalidArgumentError: for pulsed drives or unknown methods
        ResourceLimitError: for "null-space" above DIPOLESIM_MAX_LIOUVILLIAN_DIMENSION
        ConvergenceError: when the residual stays above the tolerance
    """
    if drive.is_pulsed:
        raise InvalidArgumentError("steady states need a time-independent drive")
    if method not in STEADY_STATE_METHODS:
        raise InvalidArgumentError(f"unknown steady-state method '{method}'", {"methods": list(STEADY_STATE_METHODS)})

    system = system or EmitterSystem(array, couplings, basis)
    d = system.basis.dimension
    tol = settings.DEFAULT_STEADY_STATE_TOL * d if tol_ss is None else tol_ss
    rel_tol, abs_tol = _resolve_tolerances(rel_tol, abs_tol)
    max_time = settings.MAX_INTEGRATION_TIME if max_time is None else max_time

    with get_tracer(__name__).start_as_current_span("steady_state") as span:
        span.set_attribute("dipolesim.method", method)
        span.set_attribute("dipolesim.n_emitters", system.basis.n_emitters)
        span.set_attribute("dipolesim.dimension", d)
        if method == "null-space":
            check_liouvillian_budget(d)
        generator = system.generator(drive)
        if method == "integration":
            rho, iterations, details = _steady_by_integration(generator, tol, rel_tol, abs_tol, max_time)
        elif method == "null-space":
            rho, iterations, details = _steady_by_null_space(generator, tol)
        else:
            rho, iterations, details = _steady_by_krylov(generator, tol, rel_tol, abs_tol, max_time)

    residual = _residual(generator, rho)
    logger.info(f"Steady state ({method}) for D={d}: residual {residual:.3e} after {iterations} iterations")
    return SteadyStateReport(DensityState(rho, system.basis), method, residual, iterations, tol, details)
