"""
Single-excitation collective modes.

Eigenvalues of Omega - i Gamma / 2 give mode shifts (real part) and decay rates
(-2 x imaginary part). Also: the infinite-chain spin-wave dispersion, ring angular
momentum modes, detuning targets and finite-chain spin-wave assignment.
"""

import logging
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple, Union

import mpmath
import numpy as np

from .couplings import CouplingMatrices, coupling_constant, coupling_matrices
from .errors import ConvergenceError, InvalidArgumentError, NumericError, SingularInputError
from .geometry import Z_AXIS, EmitterArray, make_chain, unit_vector

logger = logging.getLogger(__name__)

MOST_SUPERRADIANT = "most-superradiant"
MOST_SUBRADIANT = "most-subradiant"
TARGETS = (MOST_SUPERRADIANT, MOST_SUBRADIANT)

DISPERSION_START = 1024
DISPERSION_CAP = 2**20
# |theta mod 2 pi| below this counts as on the light line
LIGHT_LINE_TOLERANCE = 1e-12
# Gauss-Legendre nodes per light-line interval, on top of 2N
SPECTRAL_EXTRA_NODES = 32
CIRCULANT_TOLERANCE = 1e-9
TIE_TOLERANCE = 1e-12


@dataclass(frozen=True, eq=False)
class CollectiveMode:
    label: Union[int, float]
    shift: float
    decay: float
    vector: np.ndarray

    @property
    def eigenvalue(self) -> complex:
        return complex(self.shift, -0.5 * self.decay)


def effective_modes(couplings: CouplingMatrices) -> List[CollectiveMode]:
    """Modes sorted by decay rate, most superradiant first; labels are positions in that order."""
    matrix = couplings.effective
    try:
        eigenvalues, vectors = np.linalg.eig(matrix)
    except np.linalg.LinAlgError as e:
        raise NumericError(
            f"eigendecomposition of the effective Hamiltonian failed: {e}",
            {"condition_number": float(np.linalg.cond(matrix))},
        ) from e

    decays = -2.0 * eigenvalues.imag
    order = np.argsort(-decays, kind="stable")
    modes = []
    for label, k in enumerate(order):
        vector = vectors[:, k] / np.linalg.norm(vectors[:, k])
        modes.append(CollectiveMode(label, float(eigenvalues[k].real), float(decays[k]), vector))
    return modes


def select_mode(modes: Sequence[CollectiveMode], which: str) -> CollectiveMode:
    """Largest (or smallest) decay; ties go to the smallest |shift|, then to label order."""
    if which not in TARGETS:
        raise InvalidArgumentError(f"unknown mode target '{which}'", {"targets": list(TARGETS)})
    decays = np.array([m.decay for m in modes])
    best = decays.max() if which == MOST_SUPERRADIANT else decays.min()
    tied = [m for m in modes if abs(m.decay - best) <= TIE_TOLERANCE * max(1.0, abs(best))]
    return min(tied, key=lambda m: abs(m.shift))


def target_detuning(
    couplings: CouplingMatrices,
    which: str = MOST_SUPERRADIANT,
    subset: Optional[Sequence[int]] = None,
) -> float:
    """Detuning Delta_p = -shift that drives the selected mode on resonance."""
    if subset is not None:
        couplings = couplings.restrict(subset)
    mode = select_mode(effective_modes(couplings), which)
    return -mode.shift


def _light_line_factors(orientation: Sequence[float]) -> Tuple[float, float]:
    """Weights of the e^{ikr}/r and of the e^{ikr}/r^2, e^{ikr}/r^3 terms of mu.G.mu along y."""
    mu = unit_vector(orientation, "orientation")
    c2 = float(mu[1]) ** 2
    return 1.0 - c2, 3.0 * c2 - 1.0


def _polylog1(theta: float) -> complex:
    """sum_j e^{ij theta} / j for theta in (0, 2 pi)."""
    return complex(-np.log(2.0 * np.sin(0.5 * theta)), 0.5 * (np.pi - theta))


def _polylog2(theta: float) -> complex:
    """sum_j e^{ij theta} / j^2 for theta in [0, 2 pi]."""
    return complex(np.pi**2 / 6.0 - theta * (2.0 * np.pi - theta) / 4.0, float(mpmath.clsin(2, theta)))


def _check_zone(k_y, d: float):
    if d <= 0:
        raise InvalidArgumentError(f"spacing must be positive, got {d}")
    if np.any(np.abs(k_y) > np.pi / d * (1.0 + 1e-12)):
        raise InvalidArgumentError(f"k_y must lie in [-pi/d, pi/d], got {k_y}")


def chain_dispersion(
    k_y: float,
    d: float,
    orientation: Sequence[float] = Z_AXIS,
    j_max: int = DISPERSION_CAP,
    tol: float = 1e-8,
    gamma0: float = 1.0,
    lambda0: float = 1.0,
) -> complex:
    """
    omega(k_y) - omega_0 for an infinite chain along y.

    With theta = (k_0 +- k_y) d the lattice sum -i Gamma_0/2 + 2 sum_{j>=1} cos(k_y j d) (Omega_0j - i Gamma_0j / 2)
    splits into sum_j e^{ij theta} / j^p for p = 1, 2, 3. The p = 1, 2 parts carry the slowly decaying
    tail and are taken in closed form (logarithm, Bernoulli polynomial, Clausen function). The
    near-field p = 3 part is summed directly, doubling the window from 1024 sites until two sums
    agree within `tol`. The shift diverges logarithmically on the light line.

    Raises:
        SingularInputError: for k_y on the light line (k_0 +- k_y) d = 0 mod 2 pi
        ConvergenceError: when the near-field sum is not settled within `j_max` sites
    """
    _check_zone(k_y, d)
    transverse, near = _light_line_factors(orientation)
    k0 = 2.0 * np.pi / lambda0
    prefactor = coupling_constant(gamma0, k0) / (4.0 * np.pi)
    thetas = np.mod([(k0 + k_y) * d, (k0 - k_y) * d], 2.0 * np.pi)
    if transverse != 0.0 and np.any(np.minimum(thetas, 2.0 * np.pi - thetas) < LIGHT_LINE_TOLERANCE):
        raise SingularInputError(
            f"chain dispersion diverges on the light line (k_y={k_y:g}, k_0={k0:g})", {"k_y": k_y, "k0": k0}
        )

    closed = 0j
    for theta in thetas:
        if transverse != 0.0:
            closed += transverse / d * _polylog1(theta)
        closed += -1j * near / (k0 * d**2) * _polylog2(theta)

    def near_field(window: int) -> complex:
        j = np.arange(1, window + 1, dtype=float)
        total = 0j
        for theta in thetas:
            total += complex(np.sum(np.exp(1j * theta * j) / j**3))
        return near / (k0**2 * d**3) * total

    window = min(DISPERSION_START, j_max)
    previous = near_field(window)
    change = float("nan")
    while window < j_max:
        window = min(2 * window, j_max)
        current = near_field(window)
        change = abs(prefactor * (current - previous))
        if change < tol:
            return complex(-0.5j * gamma0 - prefactor * (closed + current))
        previous = current

    raise ConvergenceError(
        f"chain dispersion at k_y={k_y:g} did not converge within {j_max} sites",
        change,
        {"k_y": k_y, "j_max": j_max},
    )


def chain_decay_rate(
    k_y: Union[float, np.ndarray],
    d: float,
    orientation: Sequence[float] = Z_AXIS,
    gamma0: float = 1.0,
    lambda0: float = 1.0,
) -> np.ndarray:
    """
    Decay rate -2 Im(omega(k_y) - omega_0) of the infinite chain, vectorized over k_y.

    All three lattice series have elementary imaginary parts on the unit circle, so the rate is a
    piecewise polynomial in k_y: (3 pi Gamma_0 / (2 k_0 d)) (1 - c^2 + (3 c^2 - 1)(1 - k_y^2/k_0^2) / 2)
    inside the light cone (c = mu.y, d < lambda_0 / 2) and zero outside. On the light line the
    series midpoint value is returned.
    """
    k_y = np.asarray(k_y, dtype=float)
    _check_zone(k_y, d)
    transverse, near = _light_line_factors(orientation)
    k0 = 2.0 * np.pi / lambda0
    prefactor = coupling_constant(gamma0, k0) / (4.0 * np.pi)
    thetas = np.mod(np.stack([(k0 + k_y) * d, (k0 - k_y) * d]), 2.0 * np.pi)

    im_polylog1 = np.where(thetas == 0.0, 0.0, 0.5 * (np.pi - thetas))
    re_polylog2 = np.pi**2 / 6.0 - thetas * (2.0 * np.pi - thetas) / 4.0
    im_polylog3 = np.pi**2 * thetas / 6.0 - np.pi * thetas**2 / 4.0 + thetas**3 / 12.0
    series = transverse / d * im_polylog1 - near / (k0 * d**2) * re_polylog2 + near / (k0**2 * d**3) * im_polylog3
    return gamma0 + 2.0 * prefactor * series.sum(axis=0)


def dispersion_curve(ks: Sequence[float], d: float, **kwargs) -> np.ndarray:
    return np.array([chain_dispersion(k, d, **kwargs) for k in ks])


def allowed_ring_momenta(n: int) -> List[int]:
    top = int(np.ceil((n - 1) / 2.0))
    return list(range(-top, top + 1))


def ring_mode(ring: EmitterArray, m: int, couplings: Optional[CouplingMatrices] = None) -> CollectiveMode:
    """
    Angular-momentum mode v_j = exp(i m phi_j) / sqrt(N) of a ring from make_ring.

    The eigenvalue is v^dagger (Omega - i Gamma / 2) v, exact for the circulant couplings of
    a uniform ring.
    """
    n = ring.n
    if m not in allowed_ring_momenta(n):
        raise InvalidArgumentError(f"ring momentum m={m} outside {allowed_ring_momenta(n)}")
    couplings = couplings or coupling_matrices(ring)
    matrix = couplings.effective
    first_row = matrix[0]
    for i in range(1, n):
        if not np.allclose(matrix[i], np.roll(first_row, i), atol=CIRCULANT_TOLERANCE, rtol=0.0):
            raise InvalidArgumentError("couplings are not circulant; ring_mode needs a uniform ring")

    phases = 2.0 * np.pi * np.arange(n) / n
    vector = np.exp(1j * m * phases) / np.sqrt(n)
    eigenvalue = complex(vector.conj() @ matrix @ vector)
    return CollectiveMode(m, eigenvalue.real, -2.0 * eigenvalue.imag, vector)


@dataclass(frozen=True, eq=False)
class SpinWaveAssignment:
    mode: CollectiveMode
    n: int
    k_y: float
    overlap: float


def chain_spacing(array: EmitterArray) -> Tuple[np.ndarray, float]:
    """Site order along the chain axis and the mean spacing."""
    if array.n < 2:
        raise InvalidArgumentError("a chain needs at least two emitters")
    axis = array.positions[-1] - array.positions[0]
    axis = axis / np.linalg.norm(axis)
    projection = array.positions @ axis
    order = np.argsort(projection)
    spacing = float(np.mean(np.diff(projection[order])))
    return order, spacing


def assign_spin_waves(array: EmitterArray, modes: Sequence[CollectiveMode]) -> List[SpinWaveAssignment]:
    """
    Quasi-momentum of finite-chain modes by maximal overlap with standing waves
    sqrt(2/(N+1)) sin(n pi j/(N+1)), k_y = n pi / ((N+1) d).
    """
    order, spacing = chain_spacing(array)
    n = array.n
    sites = np.arange(1, n + 1)
    harmonics = np.arange(1, n + 1)
    standing = np.sqrt(2.0 / (n + 1)) * np.sin(np.outer(harmonics, sites) * np.pi / (n + 1))

    assignments = []
    for mode in modes:
        vector = mode.vector[order]
        overlaps = np.abs(standing @ vector) ** 2 / np.vdot(vector, vector).real
        best = int(np.argmax(overlaps))
        assignments.append(
            SpinWaveAssignment(
                mode, int(harmonics[best]), harmonics[best] * np.pi / ((n + 1) * spacing), float(overlaps[best])
            )
        )
    return assignments


def spectral_decay(array: EmitterArray, mode: CollectiveMode) -> float:
    """
    Infinite-chain decay rate averaged over the quasi-momentum content of a finite-chain mode.

    The weight is |sum_j v_j e^{-i k j d}|^2 over the Brillouin zone. For an eigenvector of
    Omega - i Gamma / 2 the decay equals v^dagger Gamma v / |v|^2, which is exactly this average,
    so finite-size smearing across the light line is accounted for. The zone is split at the
    light lines, where the rate jumps, and each piece integrated by Gauss-Legendre quadrature.
    """
    order, spacing = chain_spacing(array)
    axis = array.positions[order[-1]] - array.positions[order[0]]
    axis = axis / np.linalg.norm(axis)
    c = float(np.clip(array.orientations[0] @ axis, -1.0, 1.0))
    orientation = (0.0, c, np.sqrt(1.0 - c**2))
    vector = mode.vector[order]
    sites = np.arange(array.n) * spacing

    zone = np.pi / spacing
    period = 2.0 * np.pi / spacing
    k0 = array.k0
    reach = int(np.ceil((k0 + zone) / period)) + 1
    cuts = {s * k0 + m * period for m in range(-reach, reach + 1) for s in (-1.0, 1.0)}
    edges = np.array(sorted({-zone, zone} | {k for k in cuts if -zone < k < zone}))

    nodes, weights = np.polynomial.legendre.leggauss(2 * array.n + SPECTRAL_EXTRA_NODES)
    norm = weighted = 0.0
    for lo, hi in zip(edges[:-1], edges[1:]):
        ks = 0.5 * (hi - lo) * nodes + 0.5 * (hi + lo)
        w = 0.5 * (hi - lo) * weights
        spectrum = np.abs(np.exp(-1j * np.outer(ks, sites)) @ vector) ** 2
        rates = chain_decay_rate(ks, spacing, orientation, array.gamma0, array.lambda0)
        norm += float(w @ spectrum)
        weighted += float(w @ (spectrum * rates))
    return weighted / norm


def subradiant_scaling(
    ns: Sequence[int], d: float, orientation: Sequence[float] = Z_AXIS
) -> Tuple[float, np.ndarray]:
    """Exponent p of min decay ~ N^-p from a log-log least-squares fit over chain lengths."""
    ns = np.asarray(ns, dtype=int)
    if ns.size < 2:
        raise InvalidArgumentError("subradiant scaling needs at least two chain lengths")
    decays = np.array(
        [min(m.decay for m in effective_modes(coupling_matrices(make_chain(int(n), d, orientation=orientation)))) for n in ns]
    )
    if np.any(decays <= 0):
        raise NumericError("non-positive subradiant decay rate, cannot fit a power law", {"decays": decays.tolist()})
    slope, _ = np.polyfit(np.log(ns), np.log(decays), 1)
    logger.info(f"Subradiant decay exponent {-slope:.3f} over N={ns.tolist()}")
    return float(-slope), decays
