"""
Far-field observables: field coefficients, intensity, g2(0), detector-integrated
directional intensity, emission rates, excitation numbers and manifold populations.

Fields are in Green-units: E+(r) = sum_j c_j(r) sigma^-_j with c_j(r) = G(r - r_j).mu_j.
"""

import logging
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence

import numpy as np
import scipy.sparse as sp
from scipy.integrate import simpson

from . import settings
from .couplings import CouplingMatrices, greens_tensor_batch
from .errors import DipoleSimError, InvalidArgumentError, NumericError, SingularInputError, UndefinedCorrelationError
from .geometry import MIN_SEPARATION, EmitterArray
from .hilbert import DensityState, lowering_operators

logger = logging.getLogger(__name__)

INTENSITY_FLOOR = 1e-30
IMAGINARY_TOLERANCE = 1e-10
G2_MODES = ("total", "polarization-filtered")


@dataclass(frozen=True, eq=False)
class FieldCoefficients:
    """(N, 3) complex field amplitudes; (N, 1) after a polarization filter."""

    c: np.ndarray

    @property
    def n(self) -> int:
        return self.c.shape[0]

    def filtered(self, polarization: Sequence[complex]) -> "FieldCoefficients":
        """Amplitudes along the unit polarization e: (e* . c_j)."""
        e = np.asarray(polarization, dtype=complex)
        e = e / np.linalg.norm(e)
        return FieldCoefficients((self.c @ e.conj())[:, None])


@dataclass
class DetectorSpec:
    delta_phi: float = settings.DEFAULT_DELTA_PHI
    r_far: float = settings.DEFAULT_R_FAR
    n_quad: int = settings.DEFAULT_N_QUAD
    g2_mode: str = "total"
    polarization: Optional[Sequence[complex]] = None
    far_field: bool = False


@dataclass
class ObservableRecord:
    gamma_out: float
    n_ex: float
    manifolds: np.ndarray
    intensity: Optional[float] = None
    g2: Optional[float] = None
    j_phi: Optional[float] = None
    time: Optional[float] = None


def detector_direction(phi: float) -> np.ndarray:
    """Unit vector (sin phi, -cos phi, 0); phi = 0 looks back along -y."""
    return np.array([np.sin(phi), -np.cos(phi), 0.0])


def field_coefficients(array: EmitterArray, r: Sequence[float]) -> FieldCoefficients:
    r = np.asarray(r, dtype=float)
    displacements = r[None, :] - array.positions
    distances = np.linalg.norm(displacements, axis=1)
    if np.any(distances <= MIN_SEPARATION * array.lambda0):
        raise SingularInputError(f"field point {r.tolist()} coincides with an emitter")
    tensors = greens_tensor_batch(displacements, array.k0)
    return FieldCoefficients(np.einsum("jab,jb->ja", tensors, array.orientations))


def far_field_coefficients(array: EmitterArray, direction: Sequence[float], r: float) -> FieldCoefficients:
    """
    Leading 1/r term of the field at r * direction: e^{ik(r - r_hat.r_j)} (1 - r_hat r_hat).mu_j / (4 pi r).

    I r^2 and g2 computed from these do not depend on r. The exact coefficients approach them as
    O(L / r) for an array of extent L, from the 1/|r - r_j| amplitude spread across the array.
    """
    if r <= 0:
        raise InvalidArgumentError(f"detector distance must be positive, got {r}")
    r_hat = np.asarray(direction, dtype=float)
    r_hat = r_hat / np.linalg.norm(r_hat)
    transverse = np.eye(3) - np.outer(r_hat, r_hat)
    phases = np.exp(1j * array.k0 * (r - array.positions @ r_hat)) / (4.0 * np.pi * r)
    return FieldCoefficients(phases[:, None] * (array.orientations @ transverse))


def detector_coefficients(array: EmitterArray, phi: float, r_far: float, far_field: bool = False) -> FieldCoefficients:
    """Field coefficients at the in-plane detector angle phi, exact or in the far-field limit."""
    if far_field:
        return far_field_coefficients(array, detector_direction(phi), r_far)
    return field_coefficients(array, r_far * detector_direction(phi))


def correlation_matrix(state: DensityState) -> np.ndarray:
    """C_ij = <sigma^+_i sigma^-_j> = sum_t rho[t + j, t + i] over basis states t."""
    basis = state.basis
    d = basis.dimension
    padded = np.zeros((d + 1, d + 1), dtype=complex)
    padded[:d, :d] = state.rho
    table = basis.raise_table[basis.excitation_numbers < basis.n_max]
    blocks = padded[table[:, :, None], table[:, None, :]]
    return blocks.sum(axis=0).T


def _real(value: complex, scale: float, what: str) -> float:
    if abs(value.imag) > IMAGINARY_TOLERANCE * max(1.0, scale):
        raise NumericError(f"{what} has imaginary residue {value.imag:.3e}", {"imaginary": value.imag})
    return float(value.real)


def _intensity_from_correlations(correlations: np.ndarray, coeffs: FieldCoefficients) -> float:
    overlap = coeffs.c.conj() @ coeffs.c.T
    terms = overlap * correlations
    return _real(complex(terms.sum()), float(np.abs(terms).sum()), "intensity")


def intensity(state: DensityState, coeffs: FieldCoefficients) -> float:
    """I = sum_ij (c_i* . c_j) <sigma^+_i sigma^-_j>."""
    if coeffs.n != state.basis.n_emitters:
        raise InvalidArgumentError(f"coefficients for {coeffs.n} emitters do not match state of {state.basis.n_emitters}")
    return _intensity_from_correlations(correlation_matrix(state), coeffs)


class _FieldOperators:
    """Sparse lowering operators of one state's basis, reused across detector positions."""

    def __init__(self, state: DensityState):
        self.state = state
        self.lowering = lowering_operators(state.basis)

    def components(self, coeffs: FieldCoefficients) -> List[sp.csr_matrix]:
        ops = []
        for alpha in range(coeffs.c.shape[1]):
            op = sp.csr_matrix(self.lowering[0].shape, dtype=complex)
            for c_j, lower in zip(coeffs.c[:, alpha], self.lowering):
                if c_j != 0:
                    op = op + c_j * lower
            ops.append(op)
        return ops

    def second_order(self, coeffs: FieldCoefficients) -> float:
        """sum_ab <E-_a E-_b E+_b E+_a>; E+_b E+_a is symmetric in (a, b)."""
        rho = self.state.rho
        fields = self.components(coeffs)
        total = 0.0 + 0.0j
        for a in range(len(fields)):
            for b in range(a, len(fields)):
                pair = (fields[b] @ fields[a]).tocsr()
                if pair.nnz == 0:
                    continue
                value = complex(pair.conj().multiply(pair @ rho).sum())
                total += value if a == b else 2.0 * value
        return _real(total, abs(total), "g2 numerator")


def _g2(operators: _FieldOperators, correlations: np.ndarray, coeffs: FieldCoefficients) -> float:
    denominator = _intensity_from_correlations(correlations, coeffs)
    if denominator < INTENSITY_FLOOR:
        raise UndefinedCorrelationError(
            f"g2(0) is undefined where the intensity vanishes ({denominator:.3e})", {"intensity": denominator}
        )
    return max(0.0, operators.second_order(coeffs)) / denominator**2


def _detector_coefficients(coeffs: FieldCoefficients, mode: str, polarization) -> FieldCoefficients:
    if mode == "total":
        return coeffs
    if mode == "polarization-filtered":
        if polarization is None:
            raise InvalidArgumentError("polarization-filtered g2 needs a detector polarization")
        return coeffs.filtered(polarization)
    raise InvalidArgumentError(f"unknown g2 mode '{mode}'", {"modes": list(G2_MODES)})


def g2_zero(
    state: DensityState,
    coeffs: FieldCoefficients,
    mode: str = "total",
    polarization: Optional[Sequence[complex]] = None,
) -> float:
    """
    Normalized zero-delay second-order correlation.

    "total" sums the detector contraction over Cartesian components; "polarization-filtered"
    keeps the component along `polarization` in numerator and denominator.
    """
    coeffs = _detector_coefficients(coeffs, mode, polarization)
    return _g2(_FieldOperators(state), correlation_matrix(state), coeffs)


def directional_intensity(
    state: DensityState,
    array: EmitterArray,
    phi: float,
    delta_phi: float = settings.DEFAULT_DELTA_PHI,
    r_far: float = settings.DEFAULT_R_FAR,
    n_quad: int = settings.DEFAULT_N_QUAD,
    correlations: Optional[np.ndarray] = None,
    far_field: bool = False,
) -> float:
    """
    Square-detector signal J(phi) = (dOmega / 2 dphi) * integral of I over [phi - dphi, phi + dphi]
    with dOmega = (2 dphi)^2, so J / dOmega tends to I as dphi -> 0.
    """
    if n_quad < 5 or n_quad % 2 == 0:
        raise InvalidArgumentError(f"n_quad must be odd and at least 5, got {n_quad}")
    if delta_phi <= 0:
        raise InvalidArgumentError(f"delta_phi must be positive, got {delta_phi}")
    correlations = correlation_matrix(state) if correlations is None else correlations

    nodes = np.linspace(phi - delta_phi, phi + delta_phi, n_quad)
    values = [_intensity_from_correlations(correlations, detector_coefficients(array, p, r_far, far_field)) for p in nodes]
    solid_angle = (2.0 * delta_phi) ** 2
    return float(solid_angle * simpson(np.array(values), x=nodes) / (2.0 * delta_phi))


def total_emission_rate(state: DensityState, couplings: CouplingMatrices) -> float:
    """Gamma_out = sum_ij Gamma_ij <sigma^+_i sigma^-_j>."""
    return float(np.sum(emitter_emission_rates(state, couplings)))


def emitter_emission_rates(state: DensityState, couplings: CouplingMatrices) -> np.ndarray:
    """Per-emitter share Re sum_j Gamma_ij <sigma^+_i sigma^-_j>; sums to Gamma_out."""
    return np.real(np.sum(couplings.gamma * correlation_matrix(state), axis=1))


def excited_population(state: DensityState) -> float:
    return float(np.sum(state.basis.excitation_numbers * np.real(np.diag(state.rho))))


def manifold_populations(state: DensityState) -> np.ndarray:
    """p_n = Tr(P_n rho) for n = 0..n_max."""
    populations = np.real(np.diag(state.rho))
    return np.bincount(state.basis.excitation_numbers, weights=populations, minlength=state.basis.n_max + 1)


def intensity_map(
    state: DensityState,
    array: EmitterArray,
    xs: Sequence[float],
    ys: Sequence[float],
    z: float = 0.0,
) -> np.ndarray:
    """I on the plane at height z, shape (len(ys), len(xs)); NaN on top of an emitter."""
    correlations = correlation_matrix(state)
    grid = np.full((len(ys), len(xs)), np.nan)
    for iy, y in enumerate(ys):
        for ix, x in enumerate(xs):
            try:
                coeffs = field_coefficients(array, (x, y, z))
            except SingularInputError:
                continue
            grid[iy, ix] = _intensity_from_correlations(correlations, coeffs)
    return grid


def observe(state: DensityState, couplings: CouplingMatrices) -> ObservableRecord:
    """Detector-independent part of an ObservableRecord."""
    return ObservableRecord(
        gamma_out=total_emission_rate(state, couplings),
        n_ex=excited_population(state),
        manifolds=manifold_populations(state),
        time=state.time,
    )


@dataclass
class AngularScan:
    phis: np.ndarray
    j: np.ndarray
    g2: np.ndarray
    errors: List[Dict] = field(default_factory=list)

    @property
    def argmax_index(self) -> int:
        if np.all(np.isnan(self.j)):
            raise DipoleSimError("angular scan has no valid points", {"errors": self.errors})
        return int(np.nanargmax(self.j))

    @property
    def argmax_phi(self) -> float:
        return float(self.phis[self.argmax_index])

    @property
    def j_max(self) -> float:
        return float(self.j[self.argmax_index])

    @property
    def j_norm(self) -> np.ndarray:
        return self.j / self.j_max


class DetectorScanner:
    """Evaluates J(phi) and g2(0) for one state at many detector angles."""

    def __init__(self, state: DensityState, array: EmitterArray, detector: Optional[DetectorSpec] = None):
        self.state = state
        self.array = array
        self.detector = detector or DetectorSpec()
        self.correlations = correlation_matrix(state)
        self._operators = _FieldOperators(state)

    def j_phi(self, phi: float) -> float:
        det = self.detector
        return directional_intensity(
            self.state,
            self.array,
            phi,
            det.delta_phi,
            det.r_far,
            det.n_quad,
            correlations=self.correlations,
            far_field=det.far_field,
        )

    def intensity(self, phi: float) -> float:
        coeffs = detector_coefficients(self.array, phi, self.detector.r_far, self.detector.far_field)
        return _intensity_from_correlations(self.correlations, coeffs)

    def g2(self, phi: float) -> float:
        det = self.detector
        coeffs = detector_coefficients(self.array, phi, det.r_far, det.far_field)
        coeffs = _detector_coefficients(coeffs, det.g2_mode, det.polarization)
        return _g2(self._operators, self.correlations, coeffs)

    def scan(self, phi_grid: Sequence[float], with_g2: bool = True) -> AngularScan:
        phis = np.asarray(phi_grid, dtype=float)
        if phis.size == 0:
            raise InvalidArgumentError("angular scan needs a non-empty phi grid")
        js = np.full(phis.size, np.nan)
        g2s = np.full(phis.size, np.nan)
        errors = []
        for i, phi in enumerate(phis):
            try:
                js[i] = self.j_phi(phi)
                if with_g2:
                    g2s[i] = self.g2(phi)
            except DipoleSimError as e:
                logger.warning(f"Detector point phi={phi:.6g} failed: {e}")
                errors.append({"phi": float(phi), **e.to_dict()})
        return AngularScan(phis, js, g2s, errors)


def angular_scan(
    state: DensityState,
    array: EmitterArray,
    phi_grid: Sequence[float],
    detector: Optional[DetectorSpec] = None,
) -> AngularScan:
    """J(phi) and g2(0) over a phi grid; per-point failures are recorded, not raised."""
    return DetectorScanner(state, array, detector).scan(phi_grid)
