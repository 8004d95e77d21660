"""
Free-space dyadic Green's tensor and the collective coupling matrices derived from it.

Conventions: G(r) contracted with a unit dipole mu gives
    e^{ikr}/(4 pi r) [ (r x mu) x r + (1/(kr)^2 - i/(kr)) (3 r (r.mu) - mu) ]
with r the unit displacement. Couplings are
    Omega_ij = -C Re(mu_i.G.mu_j),  Gamma_ij = 2 C Im(mu_i.G.mu_j),  C = 3 pi Gamma_0 / k_0,
which gives Gamma_ii = Gamma_0 in the r -> 0 limit. The self-term is placed on the
diagonal analytically (Omega_ii = 0, Gamma_ii = Gamma_0).
"""

import logging
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import InvalidArgumentError, NumericError, SingularInputError
from .geometry import EmitterArray

logger = logging.getLogger(__name__)

PSD_TOLERANCE = 1e-9


@dataclass(frozen=True, eq=False)
class GreensTensor:
    """3x3 complex dyadic in Green-units."""

    value: np.ndarray

    def contract(self, mu_left: Sequence[float], mu_right: Sequence[float]) -> complex:
        return complex(np.asarray(mu_left) @ self.value @ np.asarray(mu_right))

    def apply(self, mu: Sequence[float]) -> np.ndarray:
        return self.value @ np.asarray(mu)


def greens_tensor_batch(displacements: np.ndarray, k0: float) -> np.ndarray:
    """Green's tensors for an (..., 3) stack of non-zero displacements, shape (..., 3, 3)."""
    r_vec = np.asarray(displacements, dtype=float)
    r = np.linalg.norm(r_vec, axis=-1)
    if np.any(r == 0.0):
        raise SingularInputError("Green's tensor is singular at zero displacement")

    r_hat = r_vec / r[..., None]
    outer = r_hat[..., :, None] * r_hat[..., None, :]
    identity = np.eye(3)
    kr = k0 * r
    near = 1.0 / kr**2 - 1j / kr
    prefactor = np.exp(1j * kr) / (4.0 * np.pi * r)
    return prefactor[..., None, None] * ((identity - outer) + near[..., None, None] * (3.0 * outer - identity))


def greens_tensor(r: Sequence[float], k0: float) -> GreensTensor:
    """G(r, omega_0) for a single displacement vector."""
    r = np.asarray(r, dtype=float)
    if r.shape != (3,):
        raise InvalidArgumentError(f"displacement must be a 3-vector, got shape {r.shape}")
    return GreensTensor(greens_tensor_batch(r, k0))


def coupling_constant(gamma0: float, k0: float) -> float:
    return 3.0 * np.pi * gamma0 / k0


@dataclass(frozen=True, eq=False)
class CouplingMatrices:
    """Coherent (omega) and dissipative (gamma) N x N coupling rates in units of Gamma_0."""

    omega: np.ndarray
    gamma: np.ndarray
    gamma0: float = 1.0

    def __post_init__(self):
        for name in ("omega", "gamma"):
            arr = np.array(getattr(self, name), dtype=float, copy=True)
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        if self.omega.shape != self.gamma.shape or self.omega.ndim != 2 or self.omega.shape[0] != self.omega.shape[1]:
            raise InvalidArgumentError("omega and gamma must be square matrices of equal shape")

    @property
    def n(self) -> int:
        return self.omega.shape[0]

    @property
    def effective(self) -> np.ndarray:
        """Single-excitation effective Hamiltonian Omega - i Gamma / 2."""
        return self.omega - 0.5j * self.gamma

    def restrict(self, indices: Sequence[int]) -> "CouplingMatrices":
        idx = np.asarray(indices, dtype=int)
        if idx.size == 0:
            raise InvalidArgumentError("cannot restrict couplings to an empty emitter set")
        return CouplingMatrices(self.omega[np.ix_(idx, idx)], self.gamma[np.ix_(idx, idx)], self.gamma0)

    def gamma_eigenvalues(self) -> np.ndarray:
        return np.linalg.eigvalsh(self.gamma)


def coupling_matrices(array: EmitterArray) -> CouplingMatrices:
    """Collective couplings of an emitter array; Gamma is checked to be positive semi-definite."""
    n = array.n
    omega = np.zeros((n, n))
    gamma = np.diag(np.full(n, array.gamma0))

    if n > 1:
        i, j = np.triu_indices(n, k=1)
        displacements = array.positions[i] - array.positions[j]
        tensors = greens_tensor_batch(displacements, array.k0)
        projected = np.einsum("pa,pab,pb->p", array.orientations[i], tensors, array.orientations[j])
        scale = coupling_constant(array.gamma0, array.k0)
        omega[i, j] = omega[j, i] = -scale * projected.real
        gamma[i, j] = gamma[j, i] = 2.0 * scale * projected.imag

    couplings = CouplingMatrices(omega, gamma, array.gamma0)
    lowest = float(couplings.gamma_eigenvalues().min())
    if lowest < -PSD_TOLERANCE * array.gamma0:
        raise NumericError(
            f"dissipative coupling matrix is not positive semi-definite (lowest eigenvalue {lowest:.3e})",
            {"lowest_eigenvalue": lowest},
        )
    logger.debug(f"Coupling matrices for {n} emitters, lowest Gamma eigenvalue {lowest:.3e}")
    return couplings
