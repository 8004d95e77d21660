"""
Emitter configurations: chains, rings, ring pairs and positional disorder.

Lengths are in units of lambda_0. Every constructor returns an immutable EmitterArray.
"""

import logging
from dataclasses import dataclass, field
from typing import Dict, Iterable, Optional, Sequence, Tuple

import numpy as np
from scipy.spatial.distance import pdist
from scipy.spatial.transform import Rotation

from .errors import InvalidArgumentError

logger = logging.getLogger(__name__)

MIN_SEPARATION = 1e-9
ORIENTATION_TOLERANCE = 1e-12
MAX_DISORDER_ATTEMPTS = 100

X_AXIS = (1.0, 0.0, 0.0)
Y_AXIS = (0.0, 1.0, 0.0)
Z_AXIS = (0.0, 0.0, 1.0)


def unit_vector(vector: Sequence[float], name: str = "vector") -> np.ndarray:
    """Normalize a real 3-vector; a zero vector is an invalid argument."""
    arr = np.asarray(vector, dtype=float)
    if arr.shape != (3,):
        raise InvalidArgumentError(f"{name} must be a 3-vector, got shape {arr.shape}")
    norm = np.linalg.norm(arr)
    if not np.isfinite(norm) or norm == 0.0:
        raise InvalidArgumentError(f"{name} must be a non-zero finite vector")
    return arr / norm


def _frozen(arr: np.ndarray) -> np.ndarray:
    arr = np.array(arr, dtype=float, copy=True)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class EmitterArray:
    """
    Positions, dipole orientations and single-emitter constants of N emitters.

    `groups` tags sub-arrays by name (for example the driven and undriven rings of a
    ring pair) as tuples of emitter indices.
    """

    positions: np.ndarray
    orientations: np.ndarray
    gamma0: float = 1.0
    lambda0: float = 1.0
    groups: Dict[str, Tuple[int, ...]] = field(default_factory=dict)

    def __post_init__(self):
        positions = np.asarray(self.positions, dtype=float)
        orientations = np.asarray(self.orientations, dtype=float)
        if positions.ndim != 2 or positions.shape[1] != 3 or positions.shape[0] < 1:
            raise InvalidArgumentError(f"positions must be an (N, 3) array with N >= 1, got {positions.shape}")
        if orientations.shape != positions.shape:
            raise InvalidArgumentError(
                f"orientations shape {orientations.shape} does not match positions {positions.shape}"
            )
        if not (np.all(np.isfinite(positions)) and np.all(np.isfinite(orientations))):
            raise InvalidArgumentError("positions and orientations must be finite")
        norms = np.linalg.norm(orientations, axis=1)
        if np.any(np.abs(norms - 1.0) > ORIENTATION_TOLERANCE):
            raise InvalidArgumentError("every dipole orientation must have unit norm")
        if self.gamma0 <= 0 or self.lambda0 <= 0:
            raise InvalidArgumentError("gamma0 and lambda0 must be positive")
        if len(positions) > 1:
            closest = float(pdist(positions).min())
            if closest <= MIN_SEPARATION * self.lambda0:
                raise InvalidArgumentError(
                    f"emitter positions must be pairwise distinct (closest pair {closest:.3e})",
                    {"min_separation": closest},
                )

        n = len(positions)
        groups = {}
        for name, indices in dict(self.groups).items():
            indices = tuple(int(i) for i in indices)
            if any(i < 0 or i >= n for i in indices):
                raise InvalidArgumentError(f"group '{name}' references an emitter outside 0..{n - 1}")
            groups[name] = indices

        object.__setattr__(self, "positions", _frozen(positions))
        object.__setattr__(self, "orientations", _frozen(orientations))
        object.__setattr__(self, "gamma0", float(self.gamma0))
        object.__setattr__(self, "lambda0", float(self.lambda0))
        object.__setattr__(self, "groups", groups)

    @property
    def n(self) -> int:
        return len(self.positions)

    @property
    def k0(self) -> float:
        return 2.0 * np.pi / self.lambda0

    def min_separation(self) -> float:
        if self.n == 1:
            return float("inf")
        return float(pdist(self.positions).min())

    def group(self, name: str) -> Tuple[int, ...]:
        if name not in self.groups:
            raise InvalidArgumentError(f"unknown emitter group '{name}'", {"groups": sorted(self.groups)})
        return self.groups[name]

    def replace_positions(self, positions: np.ndarray) -> "EmitterArray":
        return EmitterArray(positions, self.orientations, self.gamma0, self.lambda0, self.groups)


def concatenate(arrays: Iterable[EmitterArray]) -> EmitterArray:
    """Join arrays into one; groups of later arrays are shifted by the preceding sizes."""
    arrays = list(arrays)
    if not arrays:
        raise InvalidArgumentError("concatenate needs at least one array")
    gamma0, lambda0 = arrays[0].gamma0, arrays[0].lambda0
    if any(a.gamma0 != gamma0 or a.lambda0 != lambda0 for a in arrays):
        raise InvalidArgumentError("arrays with different emitter constants cannot be joined")

    groups: Dict[str, Tuple[int, ...]] = {}
    offset = 0
    for array in arrays:
        for name, indices in array.groups.items():
            groups[name] = groups.get(name, ()) + tuple(i + offset for i in indices)
        offset += array.n
    return EmitterArray(
        np.vstack([a.positions for a in arrays]),
        np.vstack([a.orientations for a in arrays]),
        gamma0,
        lambda0,
        groups,
    )


def make_chain(
    n: int,
    d: float,
    axis: Sequence[float] = Y_AXIS,
    orientation: Sequence[float] = Z_AXIS,
    centered: bool = True,
    gamma0: float = 1.0,
    lambda0: float = 1.0,
) -> EmitterArray:
    """Regular chain r_j = j * d * axis, centred on the origin unless `centered` is False."""
    if n < 1:
        raise InvalidArgumentError(f"a chain needs n >= 1 emitters, got {n}")
    if d <= 0:
        raise InvalidArgumentError(f"chain spacing must be positive, got {d}")
    axis = unit_vector(axis, "axis")
    orientation = unit_vector(orientation, "orientation")

    offsets = np.arange(n, dtype=float)
    if centered:
        offsets -= (n - 1) / 2.0
    positions = np.outer(offsets * d, axis)
    orientations = np.tile(orientation, (n, 1))
    return EmitterArray(positions, orientations, gamma0, lambda0)


def _plane_basis(normal: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """Two orthonormal in-plane vectors; (x, y) for the z normal."""
    if np.allclose(np.abs(normal), Z_AXIS):
        e1 = np.array(X_AXIS)
    else:
        e1 = np.cross(Z_AXIS, normal)
        e1 /= np.linalg.norm(e1)
    e2 = np.cross(normal, e1)
    return e1, e2


def make_ring(
    n: int,
    d: float,
    normal: Sequence[float] = Z_AXIS,
    orientation: Sequence[float] = Z_AXIS,
    center: Sequence[float] = (0.0, 0.0, 0.0),
    gamma0: float = 1.0,
    lambda0: float = 1.0,
) -> EmitterArray:
    """
    Regular polygon with nearest-neighbour chord length `d`.

    Emitter j (0-based) sits at angle 2*pi*j/n on a circle of radius d / (2 sin(pi/n)).
    """
    if n < 2:
        raise InvalidArgumentError(f"a ring needs n >= 2 emitters, got {n}")
    if d <= 0:
        raise InvalidArgumentError(f"ring spacing must be positive, got {d}")
    normal = unit_vector(normal, "normal")
    orientation = unit_vector(orientation, "orientation")

    radius = d / (2.0 * np.sin(np.pi / n))
    angles = 2.0 * np.pi * np.arange(n) / n
    e1, e2 = _plane_basis(normal)
    positions = np.asarray(center, dtype=float) + radius * (np.outer(np.cos(angles), e1) + np.outer(np.sin(angles), e2))
    orientations = np.tile(orientation, (n, 1))
    return EmitterArray(positions, orientations, gamma0, lambda0)


def ring_radius(n: int, d: float) -> float:
    return d / (2.0 * np.sin(np.pi / n))


def make_ring_pair(
    n_driven: int,
    n_undriven: int,
    d: float,
    center_separation: float,
    tilt_angle: float = 0.0,
    orientation_tilt_x: float = 0.0,
    gamma0: float = 1.0,
    lambda0: float = 1.0,
) -> EmitterArray:
    """
    Two rings in the xy-plane with centres at (-s/2, 0, 0) and (+s/2, 0, 0).

    The second (undriven) ring is rotated by `tilt_angle` about the y axis through its
    centre. Dipoles of the driven ring point along normalize((eps, 0, 1)); the undriven
    ring keeps z dipoles. `n_undriven` may be 0 for a lone driven ring.
    """
    if n_undriven == 1 or n_undriven < 0:
        raise InvalidArgumentError(f"the undriven ring needs 0 or at least 2 emitters, got {n_undriven}")

    half = center_separation / 2.0
    driven = make_ring(
        n_driven,
        d,
        orientation=(orientation_tilt_x, 0.0, 1.0),
        center=(-half, 0.0, 0.0),
        gamma0=gamma0,
        lambda0=lambda0,
    )
    driven = EmitterArray(
        driven.positions, driven.orientations, gamma0, lambda0, {"driven": range(n_driven), "undriven": ()}
    )
    if n_undriven == 0:
        return driven

    undriven = make_ring(n_undriven, d, gamma0=gamma0, lambda0=lambda0)
    rotation = Rotation.from_rotvec([0.0, tilt_angle, 0.0])
    undriven_positions = rotation.apply(undriven.positions) + np.array([half, 0.0, 0.0])
    undriven = EmitterArray(undriven_positions, undriven.orientations, gamma0, lambda0, {"undriven": range(n_undriven)})

    # EmitterArray validation reports coincident emitters between the rings
    return concatenate([driven, undriven])


def apply_disorder(
    array: EmitterArray,
    epsilon: float,
    d: float,
    seed: Optional[int] = None,
    rng: Optional[np.random.Generator] = None,
    max_attempts: int = MAX_DISORDER_ATTEMPTS,
) -> EmitterArray:
    """
    Displace every emitter in x and y by independent uniform draws from [-d*eps, d*eps].

    Draws come from `rng` when given, else from numpy's default generator seeded with `seed`.
    Configurations with coincident emitters are redrawn up to `max_attempts` times.
    """
    if epsilon < 0:
        raise InvalidArgumentError(f"disorder strength must be non-negative, got {epsilon}")
    if epsilon == 0:
        return array
    if rng is None:
        if seed is None:
            raise InvalidArgumentError("apply_disorder needs a seed or a random generator")
        rng = np.random.default_rng(seed)

    width = d * epsilon
    for attempt in range(1, max_attempts + 1):
        positions = np.array(array.positions, copy=True)
        positions[:, :2] += rng.uniform(-width, width, size=(array.n, 2))
        if array.n == 1 or pdist(positions).min() > MIN_SEPARATION * array.lambda0:
            if attempt > 1:
                logger.info(f"Disorder draw accepted after {attempt} attempts")
            return array.replace_positions(positions)
        logger.warning(f"Disorder draw {attempt} produced coincident emitters, resampling")

    raise InvalidArgumentError(
        f"could not draw a disordered configuration without coincident emitters in {max_attempts} attempts",
        {"epsilon": epsilon, "d": d},
    )
