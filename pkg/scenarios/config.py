"""
Scenario configuration: declarative, strictly validated dataclasses read from JSON.

Unknown keys are rejected at every level. Rates are in units of Gamma_0, lengths in
lambda_0 and times in 1/Gamma_0.
"""

import hashlib
import json
import math
from dataclasses import dataclass, field, fields, replace
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from dipolesim.dynamics import STEADY_STATE_METHODS
from dipolesim.errors import ConfigError, UnknownPresetError
from dipolesim.observables import G2_MODES

PRESETS = (
    "chain_steady",
    "chain_statistics",
    "pulse_subradiant",
    "ring_pair",
    "tilted_polarization",
    "disorder_sweep",
    "model_comparison",
    "dispersion",
    "detuning_scan",
)

GEOMETRY_KINDS = ("chain", "ring", "ring_pair")
DETUNING_TARGETS = ("superradiant", "subradiant")
DETUNING_REFERENCES = ("all", "driven")
DRIVE_TARGETS = ("all", "driven")
PHI_UNITS = ("pi", "rad")

CHAIN_PRESETS = ("chain_steady", "chain_statistics", "pulse_subradiant", "disorder_sweep", "model_comparison", "dispersion")

# Sweep variables each preset understands
SWEEP_VARIABLES = {
    "chain_steady": ("n", "d"),
    "chain_statistics": ("d",),
    "pulse_subradiant": (),
    "ring_pair": ("n_undriven",),
    "tilted_polarization": ("n",),
    "disorder_sweep": ("n",),
    "model_comparison": ("rabi",),
    "dispersion": (),
    "detuning_scan": ("detuning",),
}

Vector = Tuple[float, float, float]
ComplexVector = Tuple[complex, complex, complex]


class _Section:
    """Strict reader over one JSON object."""

    def __init__(self, data: Any, path: str, allowed: Sequence[str]):
        if not isinstance(data, dict):
            raise ConfigError(f"'{path}' must be a JSON object", field=path)
        unknown = sorted(set(data) - set(allowed))
        if unknown:
            raise ConfigError(f"unknown key '{self._join(path, unknown[0])}'", field=self._join(path, unknown[0]))
        self.data = data
        self.path = path

    @staticmethod
    def _join(path: str, key: str) -> str:
        return f"{path}.{key}" if path else key

    def where(self, key: str) -> str:
        return self._join(self.path, key)

    def has(self, key: str) -> bool:
        return self.data.get(key) is not None

    def raw(self, key: str, default=None):
        return self.data.get(key, default)

    def number(self, key: str, default: Optional[float], minimum: Optional[float] = None, positive: bool = False):
        value = self.data.get(key, default)
        if value is None:
            return None
        if isinstance(value, bool) or not isinstance(value, (int, float)) or not math.isfinite(value):
            raise ConfigError(f"'{self.where(key)}' must be a finite number", field=self.where(key))
        if positive and value <= 0:
            raise ConfigError(f"'{self.where(key)}' must be positive", field=self.where(key))
        if minimum is not None and value < minimum:
            raise ConfigError(f"'{self.where(key)}' must be >= {minimum}", field=self.where(key))
        return float(value)

    def integer(self, key: str, default: Optional[int], minimum: Optional[int] = None):
        value = self.data.get(key, default)
        if value is None:
            return None
        if isinstance(value, bool) or not isinstance(value, int):
            raise ConfigError(f"'{self.where(key)}' must be an integer", field=self.where(key))
        if minimum is not None and value < minimum:
            raise ConfigError(f"'{self.where(key)}' must be >= {minimum}", field=self.where(key))
        return int(value)

    def flag(self, key: str, default: bool) -> bool:
        value = self.data.get(key, default)
        if not isinstance(value, bool):
            raise ConfigError(f"'{self.where(key)}' must be true or false", field=self.where(key))
        return value

    def choice(self, key: str, default: str, choices: Sequence[str]) -> str:
        value = self.data.get(key, default)
        if value not in choices:
            raise ConfigError(f"'{self.where(key)}' must be one of {list(choices)}, got {value!r}", field=self.where(key))
        return value

    def vector(self, key: str, default: Sequence[float]) -> Vector:
        value = self.data.get(key, default)
        if not isinstance(value, (list, tuple)) or len(value) != 3:
            raise ConfigError(f"'{self.where(key)}' must be a list of 3 numbers", field=self.where(key))
        result = []
        for item in value:
            if isinstance(item, bool) or not isinstance(item, (int, float)) or not math.isfinite(item):
                raise ConfigError(f"'{self.where(key)}' must contain finite numbers", field=self.where(key))
            result.append(float(item))
        if not any(result):
            raise ConfigError(f"'{self.where(key)}' must be a non-zero vector", field=self.where(key))
        return tuple(result)

    def complex_vector(self, key: str, default: Sequence[complex]) -> ComplexVector:
        value = self.data.get(key)
        if value is None:
            return tuple(complex(v) for v in default)
        if not isinstance(value, (list, tuple)) or len(value) != 3:
            raise ConfigError(f"'{self.where(key)}' must be a list of 3 components", field=self.where(key))
        result = []
        for item in value:
            if isinstance(item, (int, float)) and not isinstance(item, bool):
                result.append(complex(float(item), 0.0))
            elif isinstance(item, (list, tuple)) and len(item) == 2 and all(isinstance(x, (int, float)) for x in item):
                result.append(complex(float(item[0]), float(item[1])))
            else:
                raise ConfigError(
                    f"'{self.where(key)}' components must be numbers or [re, im] pairs", field=self.where(key)
                )
        if not any(result):
            raise ConfigError(f"'{self.where(key)}' must be a non-zero vector", field=self.where(key))
        return tuple(result)

    def numbers(self, key: str, default=None, minimum: Optional[float] = None) -> Optional[Tuple[float, ...]]:
        """A number or a non-empty list of numbers, returned as a tuple."""
        value = self.data.get(key, default)
        if value is None:
            return None
        items = value if isinstance(value, (list, tuple)) else [value]
        if not items:
            raise ConfigError(f"'{self.where(key)}' must not be empty", field=self.where(key))
        result = []
        for item in items:
            if isinstance(item, bool) or not isinstance(item, (int, float)) or not math.isfinite(item):
                raise ConfigError(f"'{self.where(key)}' must contain finite numbers", field=self.where(key))
            if minimum is not None and item < minimum:
                raise ConfigError(f"'{self.where(key)}' values must be >= {minimum}", field=self.where(key))
            result.append(float(item))
        return tuple(result)


def _keys(cls) -> List[str]:
    return [f.name for f in fields(cls)]


@dataclass(frozen=True)
class GeometryConfig:
    kind: str = "chain"
    n: int = 1
    d: float = 0.05
    axis: Vector = (0.0, 1.0, 0.0)
    orientation: Vector = (0.0, 0.0, 1.0)
    normal: Vector = (0.0, 0.0, 1.0)
    n_undriven: int = 4
    center_separation: float = 0.7
    tilt_angle: float = math.pi / 4
    orientation_tilt_x: float = 0.0

    @property
    def n_total(self) -> int:
        return self.n + self.n_undriven if self.kind == "ring_pair" else self.n

    @classmethod
    def from_dict(cls, data, path="geometry"):
        s = _Section(data, path, _keys(cls))
        kind = s.choice("kind", "chain", GEOMETRY_KINDS)
        minimum = 1 if kind == "chain" else 2
        config = cls(
            kind=kind,
            n=s.integer("n", cls.n, minimum=minimum),
            d=s.number("d", cls.d, positive=True),
            axis=s.vector("axis", cls.axis),
            orientation=s.vector("orientation", cls.orientation),
            normal=s.vector("normal", cls.normal),
            n_undriven=s.integer("n_undriven", cls.n_undriven, minimum=0),
            center_separation=s.number("center_separation", cls.center_separation, positive=True),
            tilt_angle=s.number("tilt_angle", cls.tilt_angle),
            orientation_tilt_x=s.number("orientation_tilt_x", cls.orientation_tilt_x),
        )
        if config.n < minimum:
            raise ConfigError(f"'{path}.n' must be >= {minimum} for a {kind}", field=f"{path}.n")
        if kind == "ring_pair" and config.n_undriven == 1:
            raise ConfigError(f"'{path}.n_undriven' must be 0 or >= 2", field=f"{path}.n_undriven")
        return config


@dataclass(frozen=True)
class PulseConfig:
    amplitude: float = 1.0
    center: float = 50.0
    width: float = 25.0

    @classmethod
    def from_dict(cls, data, path="drive.pulse"):
        s = _Section(data, path, _keys(cls))
        return cls(
            amplitude=s.number("amplitude", cls.amplitude, minimum=0.0),
            center=s.number("center", cls.center),
            width=s.number("width", cls.width, positive=True),
        )


@dataclass(frozen=True)
class DriveConfig:
    """`detuning` is a rate or the name of the single-excitation mode to drive on resonance."""

    rabi: float = 1.0
    detuning: Union[float, str] = "superradiant"
    detuning_reference: str = "all"
    k_direction: Vector = (0.0, 1.0, 0.0)
    polarization: ComplexVector = (0j, 0j, 1 + 0j)
    pulse: Optional[PulseConfig] = None
    targets: str = "all"

    @property
    def target_mode(self) -> Optional[str]:
        return self.detuning if isinstance(self.detuning, str) else None

    @classmethod
    def from_dict(cls, data, path="drive"):
        s = _Section(data, path, _keys(cls))
        detuning = s.raw("detuning", cls.detuning)
        if isinstance(detuning, str):
            detuning = s.choice("detuning", cls.detuning, DETUNING_TARGETS)
        else:
            detuning = s.number("detuning", None)
        return cls(
            rabi=s.number("rabi", cls.rabi, minimum=0.0),
            detuning=detuning,
            detuning_reference=s.choice("detuning_reference", cls.detuning_reference, DETUNING_REFERENCES),
            k_direction=s.vector("k_direction", cls.k_direction),
            polarization=s.complex_vector("polarization", cls.polarization),
            pulse=PulseConfig.from_dict(s.raw("pulse"), f"{path}.pulse") if s.has("pulse") else None,
            targets=s.choice("targets", cls.targets, DRIVE_TARGETS),
        )


@dataclass(frozen=True)
class DetectorConfig:
    """Angles are in units of pi unless `phi_unit` is "rad"."""

    phi_start: float = -1.0
    phi_stop: float = 1.0
    phi_num: int = 201
    phi_unit: str = "pi"
    delta_phi: float = 0.01
    r_far: float = 100.0
    n_quad: int = 5
    g2_mode: str = "total"
    polarization: Optional[ComplexVector] = None
    far_field: bool = False

    @property
    def scale(self) -> float:
        return math.pi if self.phi_unit == "pi" else 1.0

    def phi_grid(self) -> np.ndarray:
        return np.linspace(self.phi_start, self.phi_stop, self.phi_num) * self.scale

    @property
    def delta_phi_rad(self) -> float:
        return self.delta_phi * self.scale

    @classmethod
    def from_dict(cls, data, path="detector"):
        s = _Section(data, path, _keys(cls))
        config = cls(
            phi_start=s.number("phi_start", cls.phi_start),
            phi_stop=s.number("phi_stop", cls.phi_stop),
            phi_num=s.integer("phi_num", cls.phi_num, minimum=1),
            phi_unit=s.choice("phi_unit", cls.phi_unit, PHI_UNITS),
            delta_phi=s.number("delta_phi", cls.delta_phi, positive=True),
            r_far=s.number("r_far", cls.r_far, positive=True),
            n_quad=s.integer("n_quad", cls.n_quad, minimum=5),
            g2_mode=s.choice("g2_mode", cls.g2_mode, G2_MODES),
            polarization=s.complex_vector("polarization", (0, 0, 1)) if s.has("polarization") else None,
            far_field=s.flag("far_field", cls.far_field),
        )
        if config.n_quad % 2 == 0:
            raise ConfigError(f"'{path}.n_quad' must be odd", field=f"{path}.n_quad")
        if config.g2_mode == "polarization-filtered" and config.polarization is None:
            raise ConfigError(f"'{path}.polarization' is required for polarization-filtered g2", field=f"{path}.polarization")
        return config


@dataclass(frozen=True)
class SweepConfig:
    variable: str
    values: Tuple[float, ...]

    @classmethod
    def from_dict(cls, data, path="sweep"):
        s = _Section(data, path, _keys(cls))
        if not s.has("variable") or not isinstance(s.raw("variable"), str):
            raise ConfigError(f"'{path}.variable' is required", field=f"{path}.variable")
        values = s.numbers("values")
        if values is None:
            raise ConfigError(f"'{path}.values' is required", field=f"{path}.values")
        return cls(s.raw("variable"), values)


@dataclass(frozen=True)
class DisorderConfig:
    seed: int
    epsilon: Tuple[float, ...] = (0.0,)
    n_realizations: int = 100

    @classmethod
    def from_dict(cls, data, path="disorder"):
        s = _Section(data, path, _keys(cls))
        if not s.has("seed"):
            raise ConfigError(f"'{path}.seed' is required when disorder is configured", field=f"{path}.seed")
        return cls(
            seed=s.integer("seed", None, minimum=0),
            epsilon=s.numbers("epsilon", list(cls.epsilon), minimum=0.0),
            n_realizations=s.integer("n_realizations", cls.n_realizations, minimum=1),
        )


@dataclass(frozen=True)
class TolerancesConfig:
    """`steady_state` and `max_time` fall back to the DIPOLESIM_* settings when unset."""

    method: str = "integration"
    rel_tol: float = 1e-8
    abs_tol: float = 1e-10
    steady_state: Optional[float] = None
    max_time: Optional[float] = None

    @classmethod
    def from_dict(cls, data, path="tolerances"):
        s = _Section(data, path, _keys(cls))
        return cls(
            method=s.choice("method", cls.method, STEADY_STATE_METHODS),
            rel_tol=s.number("rel_tol", cls.rel_tol, positive=True),
            abs_tol=s.number("abs_tol", cls.abs_tol, positive=True),
            steady_state=s.number("steady_state", None, positive=True),
            max_time=s.number("max_time", None, positive=True),
        )


@dataclass(frozen=True)
class EvolutionConfig:
    t_final: float = 150.0
    n_samples: int = 151

    @classmethod
    def from_dict(cls, data, path="evolution"):
        s = _Section(data, path, _keys(cls))
        return cls(
            t_final=s.number("t_final", cls.t_final, positive=True),
            n_samples=s.integer("n_samples", cls.n_samples, minimum=2),
        )


@dataclass(frozen=True)
class MapConfig:
    """Planar intensity grid: x and y as [start, stop, num], plane at height z."""

    x: Tuple[float, float, int] = (-2.0, 2.0, 41)
    y: Tuple[float, float, int] = (-2.0, 2.0, 41)
    z: float = 2.5

    @staticmethod
    def _axis(s: _Section, key: str, default):
        value = s.raw(key, list(default))
        ok = isinstance(value, (list, tuple)) and len(value) == 3
        ok = ok and all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in value[:2])
        ok = ok and isinstance(value[2], int) and not isinstance(value[2], bool) and value[2] >= 1
        if not ok:
            raise ConfigError(f"'{s.where(key)}' must be [start, stop, num]", field=s.where(key))
        return (float(value[0]), float(value[1]), int(value[2]))

    def grid(self) -> Tuple[np.ndarray, np.ndarray]:
        return np.linspace(*self.x[:2], self.x[2]), np.linspace(*self.y[:2], self.y[2])

    @classmethod
    def from_dict(cls, data, path="map"):
        s = _Section(data, path, _keys(cls))
        return cls(x=cls._axis(s, "x", cls.x), y=cls._axis(s, "y", cls.y), z=s.number("z", cls.z))


@dataclass(frozen=True)
class DispersionConfig:
    """k grid over [0, pi/d] for the infinite-chain curve, plus optional subradiant scaling lengths."""

    k_points: int = 101
    j_max: int = 2**20
    tol: float = 1e-8
    scaling_ns: Tuple[float, ...] = ()

    @classmethod
    def from_dict(cls, data, path="dispersion"):
        s = _Section(data, path, _keys(cls))
        scaling = s.numbers("scaling_ns", None, minimum=2) if s.raw("scaling_ns") != [] else ()
        return cls(
            k_points=s.integer("k_points", cls.k_points, minimum=2),
            j_max=s.integer("j_max", cls.j_max, minimum=2048),
            tol=s.number("tol", cls.tol, positive=True),
            scaling_ns=scaling if scaling is not None else (),
        )


@dataclass(frozen=True)
class ScenarioConfig:
    preset: str = "chain_steady"
    name: Optional[str] = None
    geometry: GeometryConfig = field(default_factory=GeometryConfig)
    drive: DriveConfig = field(default_factory=DriveConfig)
    n_max: int = 2
    detector: DetectorConfig = field(default_factory=DetectorConfig)
    sweep: Optional[SweepConfig] = None
    disorder: Optional[DisorderConfig] = None
    tolerances: TolerancesConfig = field(default_factory=TolerancesConfig)
    evolution: EvolutionConfig = field(default_factory=EvolutionConfig)
    map: Optional[MapConfig] = None
    dispersion: DispersionConfig = field(default_factory=DispersionConfig)

    @property
    def effective_n_max(self) -> int:
        return min(self.n_max, self.geometry.n_total)

    def with_geometry(self, **changes) -> "ScenarioConfig":
        return replace(self, geometry=replace(self.geometry, **changes))

    def with_drive(self, **changes) -> "ScenarioConfig":
        return replace(self, drive=replace(self.drive, **changes))

    @classmethod
    def from_dict(cls, data) -> "ScenarioConfig":
        s = _Section(data, "", _keys(cls))
        preset = s.raw("preset", cls.preset)
        if preset not in PRESETS:
            raise UnknownPresetError(f"unknown preset {preset!r}; available: {', '.join(PRESETS)}", field="preset")
        name = s.raw("name")
        if name is not None and not isinstance(name, str):
            raise ConfigError("'name' must be a string", field="name")

        def section(key, parser, default=None):
            return parser(s.raw(key), key) if s.has(key) else default

        config = cls(
            preset=preset,
            name=name,
            geometry=section("geometry", GeometryConfig.from_dict, GeometryConfig()),
            drive=section("drive", DriveConfig.from_dict, DriveConfig()),
            n_max=s.integer("n_max", cls.n_max, minimum=1),
            detector=section("detector", DetectorConfig.from_dict, DetectorConfig()),
            sweep=section("sweep", SweepConfig.from_dict),
            disorder=section("disorder", DisorderConfig.from_dict),
            tolerances=section("tolerances", TolerancesConfig.from_dict, TolerancesConfig()),
            evolution=section("evolution", EvolutionConfig.from_dict, EvolutionConfig()),
            map=section("map", MapConfig.from_dict),
            dispersion=section("dispersion", DispersionConfig.from_dict, DispersionConfig()),
        )
        config.validate()
        return config

    def validate(self):
        """Cross-section checks that depend on the preset."""
        allowed = SWEEP_VARIABLES[self.preset]
        if self.sweep is not None and self.sweep.variable not in allowed:
            raise ConfigError(
                f"preset '{self.preset}' cannot sweep '{self.sweep.variable}' (allowed: {list(allowed)})",
                field="sweep.variable",
            )
        if self.sweep is not None and self.sweep.variable == "n":
            minimum = 1 if self.geometry.kind == "chain" else 2
            if any(v != int(v) or v < minimum for v in self.sweep.values):
                raise ConfigError(f"'n' sweeps need integer values >= {minimum}", field="sweep.values")
        if self.sweep is not None and self.sweep.variable == "n_undriven":
            if any(v != int(v) or v < 0 or v == 1 for v in self.sweep.values):
                raise ConfigError("'n_undriven' sweeps need integer values of 0 or >= 2", field="sweep.values")
        if self.sweep is not None and self.sweep.variable in ("rabi", "d"):
            if any(v < 0 or (self.sweep.variable == "d" and v == 0) for v in self.sweep.values):
                raise ConfigError(f"'{self.sweep.variable}' sweep values out of range", field="sweep.values")
        if self.preset == "detuning_scan" and self.sweep is None:
            raise ConfigError("preset 'detuning_scan' needs a sweep over 'detuning'", field="sweep")

        if self.preset == "pulse_subradiant":
            if self.drive.pulse is None:
                raise ConfigError("preset 'pulse_subradiant' needs 'drive.pulse'", field="drive.pulse")
        elif self.drive.pulse is not None:
            raise ConfigError(f"preset '{self.preset}' solves for steady states and cannot take a pulse", field="drive.pulse")

        if self.preset == "disorder_sweep" and self.disorder is None:
            raise ConfigError("preset 'disorder_sweep' needs a 'disorder' section", field="disorder")
        if self.preset in ("ring_pair", "tilted_polarization") and self.geometry.kind != "ring_pair":
            raise ConfigError(f"preset '{self.preset}' needs geometry.kind 'ring_pair'", field="geometry.kind")
        if self.preset in CHAIN_PRESETS and self.geometry.kind != "chain":
            raise ConfigError(f"preset '{self.preset}' needs geometry.kind 'chain'", field="geometry.kind")
        if self.preset == "dispersion" and self.geometry.n < 2:
            raise ConfigError("preset 'dispersion' needs a chain of at least two emitters", field="geometry.n")
        if self.preset == "dispersion" and (self.geometry.axis[0] != 0 or self.geometry.axis[2] != 0):
            raise ConfigError("preset 'dispersion' needs a chain along y", field="geometry.axis")

        if self.geometry.kind != "ring_pair" and "driven" in (self.drive.targets, self.drive.detuning_reference):
            raise ConfigError("'driven' targets need a ring_pair geometry", field="drive.targets")


def _encode(value):
    if isinstance(value, complex):
        return [value.real, value.imag]
    if isinstance(value, (tuple, list)):
        return [_encode(v) for v in value]
    if isinstance(value, dict):
        return {k: _encode(v) for k, v in value.items() if v is not None}
    return value


def serialize_config(config: ScenarioConfig) -> Dict[str, Any]:
    """Plain JSON-ready dict; unset optional sections are omitted."""
    out = {}
    for f in fields(config):
        value = getattr(config, f.name)
        if value is None:
            continue
        if hasattr(value, "__dataclass_fields__"):
            value = {g.name: getattr(value, g.name) for g in fields(value)}
            value = {
                k: ({h.name: getattr(v, h.name) for h in fields(v)} if hasattr(v, "__dataclass_fields__") else v)
                for k, v in value.items()
            }
        out[f.name] = _encode(value)
    return out


def canonical_json(config: ScenarioConfig) -> str:
    return json.dumps(serialize_config(config), sort_keys=True, separators=(",", ":"))


def config_hash(config: ScenarioConfig) -> str:
    return hashlib.sha256(canonical_json(config).encode("utf-8")).hexdigest()


def load_config_data(path: Union[str, Path]) -> Dict[str, Any]:
    """Read a JSON config; syntax errors are reported with line and column."""
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as e:
        raise ConfigError(f"cannot read config file {path}: {e.strerror or e}", field="") from e
    try:
        return json.loads(text)
    except json.JSONDecodeError as e:
        raise ConfigError(f"invalid JSON in {path}: {e.msg}", line=e.lineno, column=e.colno) from e


def parse_value(text: str):
    """JSON when it parses, otherwise the raw string."""
    try:
        return json.loads(text)
    except json.JSONDecodeError:
        return text


def apply_overrides(data: Dict[str, Any], overrides: Sequence[str]) -> Dict[str, Any]:
    """Apply `dotted.key=value` overrides to raw config data (validated afterwards)."""
    data = json.loads(json.dumps(data))
    for override in overrides:
        if "=" not in override:
            raise ConfigError(f"override {override!r} must look like key=value", field=override)
        key, text = override.split("=", 1)
        parts = [p for p in key.strip().split(".") if p]
        if not parts:
            raise ConfigError(f"override {override!r} has an empty key", field=override)
        target = data
        for part in parts[:-1]:
            node = target.get(part)
            if node is None:
                node = target[part] = {}
            if not isinstance(node, dict):
                raise ConfigError(f"override {override!r} descends into a non-object", field=key)
            target = node
        target[parts[-1]] = parse_value(text.strip())
    return data


def config_from_dict(data: Dict[str, Any]) -> ScenarioConfig:
    return ScenarioConfig.from_dict(data)


def parse_config(path: Union[str, Path], overrides: Sequence[str] = (), seed: Optional[int] = None) -> ScenarioConfig:
    """Load, override and validate a scenario config; `seed` replaces disorder.seed when a disorder section exists."""
    data = load_config_data(path)
    if not isinstance(data, dict):
        raise ConfigError("config root must be a JSON object", field="")
    if overrides:
        data = apply_overrides(data, overrides)
    if seed is not None and isinstance(data.get("disorder"), dict):
        data = apply_overrides(data, [f"disorder.seed={int(seed)}"])
    return config_from_dict(data)
