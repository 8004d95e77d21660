"""
Excitation-truncated product basis, spin operators, driven Hamiltonian and Lindblad generator.

Basis states are tuples of excited emitter indices (0-based), ordered by excitation
number and then lexicographically. Density matrices are dense; operators are scipy
sparse matrices. Superoperators act on column-major vectorized density matrices:
vec(rho)[a + D*b] = rho[a, b], so vec(A X B) = (B^T kron A) vec(X).
"""

import logging
from dataclasses import dataclass, field, replace
from functools import cached_property
from itertools import combinations
from math import comb
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
import scipy.sparse as sp

from . import settings
from .couplings import CouplingMatrices
from .errors import IntegrationError, InvalidArgumentError, ResourceLimitError
from .geometry import Y_AXIS, Z_AXIS, EmitterArray, unit_vector

logger = logging.getLogger(__name__)

DEFAULT_N_MAX = 2
POLARIZATION_TOLERANCE = 1e-9
RABI_COUPLING = 0.5


def basis_dimension(n: int, n_max: int) -> int:
    return sum(comb(n, k) for k in range(n_max + 1))


@dataclass(frozen=True, eq=False)
class Basis:
    n_emitters: int
    n_max: int
    states: Tuple[Tuple[int, ...], ...]

    @property
    def dimension(self) -> int:
        return len(self.states)

    @property
    def is_full(self) -> bool:
        return self.n_max == self.n_emitters

    @cached_property
    def index(self) -> Dict[Tuple[int, ...], int]:
        return {state: i for i, state in enumerate(self.states)}

    @cached_property
    def excitation_numbers(self) -> np.ndarray:
        return np.array([len(state) for state in self.states], dtype=int)

    @cached_property
    def bit_patterns(self) -> Tuple[int, ...]:
        """States as integers with bit j set when emitter j is excited."""
        return tuple(sum(1 << j for j in state) for state in self.states)

    def block(self, n: int) -> slice:
        """Contiguous index range of the n-excitation manifold."""
        if not 0 <= n <= self.n_max:
            raise InvalidArgumentError(f"manifold {n} outside 0..{self.n_max}")
        start = basis_dimension(self.n_emitters, n - 1) if n > 0 else 0
        return slice(start, start + comb(self.n_emitters, n))

    @cached_property
    def lowering_table(self) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Every non-zero sigma^-_e element as parallel arrays (emitter, source, target)."""
        emitters, sources, targets = [], [], []
        index = self.index
        for source, state in enumerate(self.states):
            for e in state:
                emitters.append(e)
                sources.append(source)
                targets.append(index[tuple(x for x in state if x != e)])
        order = np.lexsort((sources, emitters))
        return (
            np.asarray(emitters, dtype=int)[order],
            np.asarray(sources, dtype=int)[order],
            np.asarray(targets, dtype=int)[order],
        )

    @cached_property
    def raise_table(self) -> np.ndarray:
        """(D, N) table of sigma^+_j targets; entries equal to D mark a vanishing result."""
        table = np.full((self.dimension, self.n_emitters), self.dimension, dtype=int)
        emitters, sources, targets = self.lowering_table
        table[targets, emitters] = sources
        return table


def build_basis(n: int, n_max: int = DEFAULT_N_MAX, max_dimension: Optional[int] = None) -> Basis:
    """Canonical basis with at most `n_max` excitations among `n` emitters."""
    if n < 1:
        raise InvalidArgumentError(f"basis needs at least one emitter, got {n}")
    if not 1 <= n_max <= n:
        raise InvalidArgumentError(f"n_max must satisfy 1 <= n_max <= {n}, got {n_max}")

    limit = settings.MAX_BASIS_DIMENSION if max_dimension is None else max_dimension
    dimension = basis_dimension(n, n_max)
    if dimension > limit:
        raise ResourceLimitError(
            f"basis dimension {dimension} for N={n}, n_max={n_max} exceeds DIPOLESIM_MAX_BASIS_DIMENSION={limit}",
            budget="DIPOLESIM_MAX_BASIS_DIMENSION",
            limit=limit,
            requested=dimension,
        )

    states = tuple(state for k in range(n_max + 1) for state in combinations(range(n), k))
    return Basis(n, n_max, states)


def default_basis(n: int, n_max: Optional[int] = None) -> Basis:
    return build_basis(n, min(DEFAULT_N_MAX if n_max is None else n_max, n))


def lowering_operator(basis: Basis, j: int) -> sp.csr_matrix:
    """sigma^-_j (0-based emitter index) in the canonical basis."""
    if not 0 <= j < basis.n_emitters:
        raise InvalidArgumentError(f"emitter index {j} outside 0..{basis.n_emitters - 1}")
    emitters, sources, targets = basis.lowering_table
    mask = emitters == j
    d = basis.dimension
    data = np.ones(int(mask.sum()), dtype=complex)
    return sp.csr_matrix((data, (targets[mask], sources[mask])), shape=(d, d))


def lowering_operators(basis: Basis) -> List[sp.csr_matrix]:
    return [lowering_operator(basis, j) for j in range(basis.n_emitters)]


def number_operator(basis: Basis) -> sp.csr_matrix:
    """Total excitation number sum_j sigma^+_j sigma^-_j."""
    return sp.diags(basis.excitation_numbers.astype(complex), format="csr")


def collective_operator(basis: Basis, matrix: np.ndarray) -> sp.csr_matrix:
    """sum_ij M_ij sigma^+_i sigma^-_j."""
    matrix = np.asarray(matrix)
    stacked = sp.vstack(lowering_operators(basis), format="csr")
    mixing = sp.kron(sp.csr_matrix(matrix), sp.identity(basis.dimension, format="csr"), format="csr")
    return (stacked.T @ mixing @ stacked).tocsr()


def recycling_superoperator(basis: Basis, gamma: np.ndarray) -> sp.csr_matrix:
    """Superoperator of rho -> sum_ij Gamma_ij sigma^-_i rho sigma^+_j on vec(rho)."""
    emitters, sources, targets = basis.lowering_table
    d = basis.dimension
    n_pairs = len(emitters)
    left = np.repeat(np.arange(n_pairs), n_pairs)
    right = np.tile(np.arange(n_pairs), n_pairs)

    rows = targets[left] + d * targets[right]
    cols = sources[left] + d * sources[right]
    values = np.asarray(gamma, dtype=complex)[emitters[left], emitters[right]]
    keep = values != 0
    return sp.csr_matrix((values[keep], (rows[keep], cols[keep])), shape=(d * d, d * d))


@dataclass(frozen=True)
class Pulse:
    """Gaussian envelope amplitude * exp(-(t - center)^2 / width^2)."""

    amplitude: float
    center: float
    width: float

    def __post_init__(self):
        if self.width <= 0:
            raise InvalidArgumentError(f"pulse width must be positive, got {self.width}")

    def envelope(self, t: float) -> float:
        return self.amplitude * float(np.exp(-(((t - self.center) / self.width) ** 2)))


@dataclass(frozen=True, eq=False)
class Drive:
    """
    Plane-wave coherent drive.

    `rabi` is the constant Rabi rate; when `pulse` is set the pulse envelope replaces it.
    `targets` limits the drive to a subset of emitters (all emitters when None).
    """

    rabi: float
    detuning: float = 0.0
    k_vec: np.ndarray = field(default_factory=lambda: 2.0 * np.pi * np.asarray(Y_AXIS))
    polarization: np.ndarray = field(default_factory=lambda: np.asarray(Z_AXIS, dtype=complex))
    pulse: Optional[Pulse] = None
    targets: Optional[Tuple[int, ...]] = None

    def __post_init__(self):
        k_vec = np.array(self.k_vec, dtype=float, copy=True)
        polarization = np.array(self.polarization, dtype=complex, copy=True)
        if k_vec.shape != (3,) or polarization.shape != (3,):
            raise InvalidArgumentError("k_vec and polarization must be 3-vectors")
        if abs(np.linalg.norm(polarization) - 1.0) > POLARIZATION_TOLERANCE:
            raise InvalidArgumentError("drive polarization must have unit norm")
        k_vec.setflags(write=False)
        polarization.setflags(write=False)
        object.__setattr__(self, "k_vec", k_vec)
        object.__setattr__(self, "polarization", polarization)
        if self.targets is not None:
            object.__setattr__(self, "targets", tuple(int(i) for i in self.targets))

    @classmethod
    def plane_wave(
        cls,
        rabi: float,
        detuning: float = 0.0,
        direction: Sequence[float] = Y_AXIS,
        polarization: Sequence[complex] = Z_AXIS,
        lambda0: float = 1.0,
        pulse: Optional[Pulse] = None,
        targets: Optional[Sequence[int]] = None,
    ) -> "Drive":
        """Drive with |k| = 2 pi / lambda0 along `direction`; the polarization is normalized."""
        polarization = np.asarray(polarization, dtype=complex)
        norm = np.linalg.norm(polarization)
        if norm == 0:
            raise InvalidArgumentError("drive polarization must be non-zero")
        k_vec = 2.0 * np.pi / lambda0 * unit_vector(direction, "direction")
        return cls(rabi, detuning, k_vec, polarization / norm, pulse, None if targets is None else tuple(targets))

    @property
    def is_pulsed(self) -> bool:
        return self.pulse is not None

    def amplitude(self, t: float) -> float:
        return self.pulse.envelope(t) if self.pulse is not None else self.rabi

    def with_detuning(self, detuning: float) -> "Drive":
        return replace(self, detuning=float(detuning))

    def with_rabi(self, rabi: float) -> "Drive":
        return replace(self, rabi=float(rabi))

    def emitter_coefficients(self, array: EmitterArray) -> np.ndarray:
        """(eps . mu_j) exp(-i k . r_j), zero for emitters outside `targets`."""
        coefficients = (array.orientations @ self.polarization) * np.exp(-1j * (array.positions @ self.k_vec))
        if self.targets is not None:
            mask = np.zeros(array.n, dtype=bool)
            mask[list(self.targets)] = True
            coefficients = np.where(mask, coefficients, 0.0)
        return coefficients


class Dissipator:
    """Collective decay: anticommutator operator sum Gamma_ij s+_i s-_j and the recycling superoperator."""

    def __init__(self, basis: Basis, couplings: CouplingMatrices):
        if couplings.n != basis.n_emitters:
            raise InvalidArgumentError(f"couplings for {couplings.n} emitters do not match basis of {basis.n_emitters}")
        self.basis = basis
        self.decay = collective_operator(basis, couplings.gamma)
        self.recycling = recycling_superoperator(basis, couplings.gamma)


class LindbladGenerator:
    """
    d rho/dt = -i (H_nh rho - rho H_nh^dagger) + sum_ij Gamma_ij s-_i rho s+_j
    with H_nh(t) = H_static + f(t) V - (i/2) sum_ij Gamma_ij s+_i s-_j.
    """

    def __init__(
        self,
        static_hamiltonian: sp.spmatrix,
        dissipator: Dissipator,
        drive_operator: Optional[sp.spmatrix] = None,
        envelope: Optional[Callable[[float], float]] = None,
    ):
        self.basis = dissipator.basis
        self.dimension = self.basis.dimension
        self.static_hamiltonian = sp.csr_matrix(static_hamiltonian)
        self.drive_operator = None if drive_operator is None else sp.csr_matrix(drive_operator)
        self.envelope = envelope
        self.recycling = dissipator.recycling
        self._static_nh = (self.static_hamiltonian - 0.5j * dissipator.decay).tocsr()

    @property
    def time_dependent(self) -> bool:
        return self.drive_operator is not None

    def hamiltonian(self, t: float = 0.0) -> sp.csr_matrix:
        if self.drive_operator is None:
            return self.static_hamiltonian
        return (self.static_hamiltonian + self.envelope(t) * self.drive_operator).tocsr()

    def effective_hamiltonian(self, t: float = 0.0) -> sp.csr_matrix:
        if self.drive_operator is None:
            return self._static_nh
        return (self._static_nh + self.envelope(t) * self.drive_operator).tocsr()

    def _apply_nh(self, t: float, rho: np.ndarray) -> np.ndarray:
        out = self._static_nh @ rho
        if self.drive_operator is not None:
            amplitude = self.envelope(t)
            if amplitude != 0.0:
                out = out + amplitude * (self.drive_operator @ rho)
        return out

    def rhs(self, t: float, rho: np.ndarray) -> np.ndarray:
        d = self.dimension
        coherent = self._apply_nh(t, rho) - self._apply_nh(t, rho.conj().T).conj().T
        jumps = (self.recycling @ rho.reshape(-1, order="F")).reshape((d, d), order="F")
        return -1j * coherent + jumps

    def rhs_vec(self, t: float, y: np.ndarray) -> np.ndarray:
        d = self.dimension
        return self.rhs(t, y.reshape((d, d), order="F")).reshape(-1, order="F")

    def liouvillian(self, t: float = 0.0, max_dimension: Optional[int] = None) -> sp.csr_matrix:
        return _liouvillian_from_parts(self.effective_hamiltonian(t), self.recycling, max_dimension)


def check_liouvillian_budget(d: int, max_dimension: Optional[int] = None):
    limit = settings.MAX_LIOUVILLIAN_DIMENSION if max_dimension is None else max_dimension
    if d > limit:
        raise ResourceLimitError(
            f"vectorized Liouvillian needs D <= {limit} (DIPOLESIM_MAX_LIOUVILLIAN_DIMENSION), got D={d}",
            budget="DIPOLESIM_MAX_LIOUVILLIAN_DIMENSION",
            limit=limit,
            requested=d,
        )


def _liouvillian_from_parts(h_nh: sp.spmatrix, recycling: sp.spmatrix, max_dimension: Optional[int]) -> sp.csr_matrix:
    d = h_nh.shape[0]
    check_liouvillian_budget(d, max_dimension)
    identity = sp.identity(d, dtype=complex, format="csr")
    return (-1j * sp.kron(identity, h_nh) + 1j * sp.kron(h_nh.conj(), identity) + recycling).tocsr()


class EmitterSystem:
    """Operators of one emitter array on one basis; drive-independent parts are built once."""

    def __init__(self, array: EmitterArray, couplings: CouplingMatrices, basis: Optional[Basis] = None):
        if couplings.n != array.n:
            raise InvalidArgumentError(f"couplings for {couplings.n} emitters do not match array of {array.n}")
        self.array = array
        self.couplings = couplings
        self.basis = basis if basis is not None else default_basis(array.n)
        if self.basis.n_emitters != array.n:
            raise InvalidArgumentError(f"basis for {self.basis.n_emitters} emitters does not match array of {array.n}")

    @cached_property
    def lowering(self) -> List[sp.csr_matrix]:
        return lowering_operators(self.basis)

    @cached_property
    def number(self) -> sp.csr_matrix:
        return number_operator(self.basis)

    @cached_property
    def hopping(self) -> sp.csr_matrix:
        return collective_operator(self.basis, self.couplings.omega)

    @cached_property
    def dissipator(self) -> Dissipator:
        return Dissipator(self.basis, self.couplings)

    def drive_operator(self, drive: Drive) -> sp.csr_matrix:
        """
        (1/2) sum_j a_j s+_j + h.c. for unit Rabi rate.

        The Rabi rate is the full Rabi frequency, so a lone resonant emitter saturates as
        Omega^2 / (4 Delta^2 + Gamma_0^2 + 2 Omega^2).
        """
        coefficients = RABI_COUPLING * drive.emitter_coefficients(self.array)
        raising = sp.csr_matrix((self.basis.dimension, self.basis.dimension), dtype=complex)
        for a_j, lower in zip(coefficients, self.lowering):
            if a_j != 0:
                raising = raising + a_j * lower.T
        return (raising + raising.conj().T).tocsr()

    def static_hamiltonian(self, drive: Drive) -> sp.csr_matrix:
        return (drive.detuning * self.number + self.hopping).tocsr()

    def hamiltonian(self, drive: Drive, t: float = 0.0) -> sp.csr_matrix:
        return (self.static_hamiltonian(drive) + drive.amplitude(t) * self.drive_operator(drive)).tocsr()

    def generator(self, drive: Drive) -> LindbladGenerator:
        static = self.static_hamiltonian(drive)
        if drive.is_pulsed:
            return LindbladGenerator(static, self.dissipator, self.drive_operator(drive), drive.amplitude)
        if drive.rabi != 0.0:
            static = static + drive.rabi * self.drive_operator(drive)
        return LindbladGenerator(static, self.dissipator)


def hamiltonian(
    array: EmitterArray,
    couplings: CouplingMatrices,
    drive: Drive,
    t: float = 0.0,
    basis: Optional[Basis] = None,
) -> sp.csr_matrix:
    """Driven Hamiltonian H(t) projected on `basis` (n_max = min(2, N) by default)."""
    return EmitterSystem(array, couplings, basis).hamiltonian(drive, t)


def lindblad_rhs(state: "DensityState", H: sp.spmatrix, couplings: CouplingMatrices) -> np.ndarray:
    """-i[H, rho] + sum_ij (Gamma_ij / 2)(2 s-_i rho s+_j - s+_i s-_j rho - rho s+_i s-_j)."""
    H = sp.csr_matrix(H)
    if H.shape != state.rho.shape:
        raise InvalidArgumentError(f"Hamiltonian shape {H.shape} does not match state {state.rho.shape}")
    generator = LindbladGenerator(H, Dissipator(state.basis, couplings))
    return generator.rhs(state.time, state.rho)


def vectorized_liouvillian(
    H: sp.spmatrix,
    couplings: CouplingMatrices,
    basis: Basis,
    max_dimension: Optional[int] = None,
) -> sp.csr_matrix:
    """Sparse L with L vec(rho) = vec(lindblad_rhs(rho)), column-major vectorization."""
    check_liouvillian_budget(basis.dimension, max_dimension)
    generator = LindbladGenerator(sp.csr_matrix(H), Dissipator(basis, couplings))
    return generator.liouvillian(max_dimension=max_dimension)


@dataclass(eq=False)
class DensityState:
    rho: np.ndarray
    basis: Basis
    time: float = 0.0

    def __post_init__(self):
        self.rho = np.asarray(self.rho, dtype=complex)
        d = self.basis.dimension
        if self.rho.shape != (d, d):
            raise InvalidArgumentError(f"density matrix shape {self.rho.shape} does not match basis dimension {d}")

    @classmethod
    def ground(cls, basis: Basis, time: float = 0.0) -> "DensityState":
        rho = np.zeros((basis.dimension, basis.dimension), dtype=complex)
        rho[0, 0] = 1.0
        return cls(rho, basis, time)

    @classmethod
    def pure(cls, basis: Basis, amplitudes: np.ndarray, time: float = 0.0) -> "DensityState":
        psi = np.asarray(amplitudes, dtype=complex)
        if psi.shape != (basis.dimension,):
            raise InvalidArgumentError(f"state vector length {psi.shape} does not match basis dimension")
        psi = psi / np.linalg.norm(psi)
        return cls(np.outer(psi, psi.conj()), basis, time)

    @classmethod
    def product(cls, basis: Basis, excited: Sequence[int], time: float = 0.0) -> "DensityState":
        """Product state with the listed emitters excited."""
        key = tuple(sorted(int(e) for e in excited))
        if key not in basis.index:
            raise InvalidArgumentError(f"state {key} is outside the truncated basis")
        psi = np.zeros(basis.dimension, dtype=complex)
        psi[basis.index[key]] = 1.0
        return cls.pure(basis, psi, time)

    @classmethod
    def single_excitation(
        cls, basis: Basis, vector: Sequence[complex], ground_weight: float = 0.0, time: float = 0.0
    ) -> "DensityState":
        """sqrt(g)|G> + sqrt(1 - g) sum_j v_j |j> with v normalized."""
        vector = np.asarray(vector, dtype=complex)
        if vector.shape != (basis.n_emitters,):
            raise InvalidArgumentError("single-excitation amplitudes need one entry per emitter")
        psi = np.zeros(basis.dimension, dtype=complex)
        psi[0] = np.sqrt(ground_weight)
        psi[basis.block(1)] = np.sqrt(1.0 - ground_weight) * vector / np.linalg.norm(vector)
        return cls.pure(basis, psi, time)

    @property
    def trace(self) -> complex:
        return complex(np.trace(self.rho))

    def hermiticity_error(self) -> float:
        return float(np.max(np.abs(self.rho - self.rho.conj().T)))

    def eigenvalues(self) -> np.ndarray:
        return np.linalg.eigvalsh(0.5 * (self.rho + self.rho.conj().T))

    def validate(self, hermitian_tol: float = 1e-10, trace_tol: float = 1e-9, positivity_tol: float = 1e-8):
        """Raise IntegrationError when the density-matrix invariants are broken."""
        herm = self.hermiticity_error()
        if herm > hermitian_tol:
            raise IntegrationError(f"density matrix is not Hermitian (deviation {herm:.3e})", {"hermiticity": herm})
        trace_error = abs(self.trace - 1.0)
        if trace_error > trace_tol:
            raise IntegrationError(f"density matrix trace deviates from 1 by {trace_error:.3e}", {"trace": trace_error})
        lowest = float(self.eigenvalues().min())
        if lowest < -positivity_tol:
            raise IntegrationError(f"density matrix has negative eigenvalue {lowest:.3e}", {"lowest_eigenvalue": lowest})

    def vec(self) -> np.ndarray:
        return self.rho.reshape(-1, order="F")

    @classmethod
    def from_vec(cls, y: np.ndarray, basis: Basis, time: float = 0.0) -> "DensityState":
        d = basis.dimension
        return cls(np.array(y, dtype=complex).reshape((d, d), order="F"), basis, time)

    def hermitized(self) -> "DensityState":
        """Hermitian part rescaled to unit trace."""
        rho = 0.5 * (self.rho + self.rho.conj().T)
        return DensityState(rho / np.trace(rho).real, self.basis, self.time)


def trace_distance(a: DensityState, b: DensityState) -> float:
    diff = a.rho - b.rho
    return 0.5 * float(np.sum(np.abs(np.linalg.eigvalsh(0.5 * (diff + diff.conj().T)))))
