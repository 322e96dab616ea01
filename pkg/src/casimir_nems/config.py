"""Run configuration: YAML scenario files with unit-suffixed quantities.

Dimensional values are written as strings with an explicit unit, e.g.
``"20 um"``, ``"2.979 kPa"``, ``"0.1 nm"``, ``"300 K"``, and normalized to SI
at parse time. ``RunConfig.canonical()`` re-serializes a parsed config in SI
units; parsing the canonical form yields the same canonical form, which makes
``config_hash`` stable.
"""

from __future__ import annotations

import copy
import hashlib
import json
import os
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np
import yaml

from . import materials as mat
from .constants import ev_to_rad_per_s
from .errors import ConfigurationError
from .lifshitz import HalfSpacePair, LifshitzConfig
from .roughness import DEFAULT_VALIDITY_RATIO, ElectrostaticSpec, RoughnessSpec
from .sensor import SearchSettings, SensorGeometry, SensorScenario

__all__ = [
    "UNITS",
    "parse_quantity",
    "apply_overrides",
    "MaterialSpec",
    "VoltageCalibration",
    "SweepSpec",
    "RunConfig",
    "load_config",
    "parse_config",
]

UNITS: dict[str, dict[str, float]] = {
    "length": {"m": 1.0, "cm": 1e-2, "mm": 1e-3, "um": 1e-6, "µm": 1e-6, "μm": 1e-6, "nm": 1e-9, "pm": 1e-12},
    "pressure": {"Pa": 1.0, "hPa": 1e2, "kPa": 1e3, "MPa": 1e6, "mPa": 1e-3},
    "voltage": {"V": 1.0, "mV": 1e-3, "uV": 1e-6, "kV": 1e3},
    "temperature": {"K": 1.0, "mK": 1e-3},
    "stiffness": {"N/m": 1.0},
    "frequency": {"rad/s": 1.0, "eV": float(ev_to_rad_per_s(1.0)), "meV": float(ev_to_rad_per_s(1e-3))},
}
_SI_UNIT = {"length": "m", "pressure": "Pa", "voltage": "V", "temperature": "K", "stiffness": "N/m", "frequency": "rad/s"}
_QUANTITY = re.compile(r"^\s*([-+]?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?)\s*([^\d\s].*?)?\s*$")


def parse_quantity(value: Any, kind: str, path: str) -> float:
    """``"2.979 kPa"`` -> 2979.0; a bare number is rejected for dimensional fields."""
    if isinstance(value, bool) or not isinstance(value, (str, int, float)):
        raise ConfigurationError(f"expected a {kind} with unit, got {value!r}", field=path)
    if not isinstance(value, str):
        raise ConfigurationError(f"missing unit for {kind} value {value!r} (e.g. '{value} {_SI_UNIT[kind]}')",
                                 field=path)
    match = _QUANTITY.match(value)
    if not match or match.group(2) is None:
        raise ConfigurationError(f"cannot parse {kind} {value!r}", field=path)
    number, unit = float(match.group(1)), match.group(2)
    try:
        return number * UNITS[kind][unit]
    except KeyError:
        known = ", ".join(UNITS[kind])
        raise ConfigurationError(f"unknown {kind} unit {unit!r} (known: {known})", field=path) from None


def _si(value: float, kind: str) -> str:
    return f"{value!r} {_SI_UNIT[kind]}"


def apply_overrides(raw: dict, assignments: list[str]) -> dict:
    """Apply ``key.sub=value`` overrides; values are read as YAML scalars."""
    raw = copy.deepcopy(raw)
    for item in assignments:
        if "=" not in item:
            raise ConfigurationError(f"override {item!r} is not of the form key=value", field="--set")
        key, text = item.split("=", 1)
        parts = key.strip().split(".")
        if not all(parts):
            raise ConfigurationError(f"bad override key {key!r}", field="--set")
        node = raw
        for part in parts[:-1]:
            child = node.get(part)
            if child is None or not isinstance(child, dict):
                if isinstance(child, str):
                    child = {"model": child}
                else:
                    child = {}
                node[part] = child
            node = child
        node[parts[-1]] = yaml.safe_load(text) if text.strip() else None
    return raw


class _Reader:
    """Typed access to a nested mapping with field-path error messages."""

    def __init__(self, data: Any, path: str):
        if data is None:
            data = {}
        if not isinstance(data, dict):
            raise ConfigurationError(f"expected a mapping, got {type(data).__name__}", field=path or "<root>")
        self.data = data
        self.path = path
        self.used: set[str] = set()

    def _key(self, key: str) -> str:
        return f"{self.path}.{key}" if self.path else key

    def has(self, key: str) -> bool:
        return self.data.get(key) is not None

    def raw(self, key: str, default: Any = None) -> Any:
        self.used.add(key)
        return self.data.get(key, default)

    def quantity(self, key: str, kind: str, default: float | None = None, required: bool = False) -> float | None:
        value = self.raw(key)
        if value is None:
            if required:
                raise ConfigurationError("required field is missing", field=self._key(key))
            return default
        return parse_quantity(value, kind, self._key(key))

    def number(self, key: str, default: float) -> float:
        value = self.raw(key, default)
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigurationError(f"expected a number, got {value!r}", field=self._key(key))
        return float(value)

    def integer(self, key: str, default: int) -> int:
        value = self.raw(key, default)
        if isinstance(value, bool) or not isinstance(value, int):
            raise ConfigurationError(f"expected an integer, got {value!r}", field=self._key(key))
        return value

    def boolean(self, key: str, default: bool) -> bool:
        value = self.raw(key, default)
        if not isinstance(value, bool):
            raise ConfigurationError(f"expected true/false, got {value!r}", field=self._key(key))
        return value

    def choice(self, key: str, options: tuple[str, ...], default: str) -> str:
        value = self.raw(key, default)
        if value not in options:
            raise ConfigurationError(f"expected one of {options}, got {value!r}", field=self._key(key))
        return value

    def child(self, key: str) -> "_Reader":
        self.used.add(key)
        return _Reader(self.data.get(key), self._key(key))

    def finish(self) -> None:
        unknown = sorted(set(self.data) - self.used)
        if unknown:
            raise ConfigurationError(f"unknown field(s): {', '.join(unknown)}", field=self.path or "<root>")


_MODELS = ("si", "au", "ideal-metal", "tabulated")


@dataclass(frozen=True)
class MaterialSpec:
    """Declarative description of a body's dielectric response."""

    model: str
    static_permittivity: float = mat.SI_STATIC_PERMITTIVITY
    resonance_frequency: float = mat.SI_RESONANCE_FREQUENCY
    plasma_frequency: float = mat.AU_PLASMA_FREQUENCY
    relaxation: float = mat.AU_RELAXATION_FREQUENCY
    extrapolation: str = "none"
    permittivity: float = 1e12
    path: str | None = None
    units: str = "ev"
    tail: str = "constant-cubic"

    @classmethod
    def parse(cls, value: Any, path: str, base_dir: Path) -> "MaterialSpec":
        if isinstance(value, str):
            value = {"model": value}
        r = _Reader(value, path)
        model = r.choice("model", _MODELS, None)
        if model == "si":
            spec = cls(model, static_permittivity=r.number("static_permittivity", mat.SI_STATIC_PERMITTIVITY),
                       resonance_frequency=r.quantity("resonance_frequency", "frequency", mat.SI_RESONANCE_FREQUENCY))
        elif model == "au":
            spec = cls(model, plasma_frequency=r.quantity("plasma_frequency", "frequency", mat.AU_PLASMA_FREQUENCY),
                       relaxation=r.quantity("relaxation", "frequency", mat.AU_RELAXATION_FREQUENCY),
                       extrapolation=r.choice("extrapolation", ("drude", "plasma"), "drude"))
        elif model == "ideal-metal":
            spec = cls(model, permittivity=r.number("permittivity", 1e12))
        else:
            raw_path = r.raw("path")
            if not isinstance(raw_path, str):
                raise ConfigurationError("tabulated material needs a data file path", field=f"{path}.path")
            data_path = (base_dir / raw_path).resolve()
            if not data_path.is_file():
                raise ConfigurationError(f"data file {str(data_path)!r} does not exist", field=f"{path}.path")
            spec = cls(model, path=str(data_path),
                       units=r.choice("units", ("ev", "rad/s"), "ev"),
                       tail=r.choice("tail", tuple(t.value for t in mat.TailPolicy), "constant-cubic"),
                       extrapolation=r.choice("extrapolation", ("none", "drude", "plasma"), "none"),
                       plasma_frequency=r.quantity("plasma_frequency", "frequency", mat.AU_PLASMA_FREQUENCY),
                       relaxation=r.quantity("relaxation", "frequency", mat.AU_RELAXATION_FREQUENCY))
        r.finish()
        return spec

    def build(self) -> mat.MaterialResponse:
        if self.model == "si":
            return mat.silicon(self.static_permittivity, self.resonance_frequency)
        if self.model == "au":
            return mat.gold(self.extrapolation, self.plasma_frequency, self.relaxation)
        if self.model == "ideal-metal":
            return mat.ideal_metal_proxy(self.permittivity)
        table = mat.load_optical_data(self.path, self.units)
        name = Path(self.path).stem
        return mat.from_table(name, table, self.extrapolation, self.tail, self.plasma_frequency, self.relaxation)

    def canonical(self) -> dict:
        if self.model == "si":
            return {"model": "si", "static_permittivity": self.static_permittivity,
                    "resonance_frequency": _si(self.resonance_frequency, "frequency")}
        if self.model == "au":
            return {"model": "au", "extrapolation": self.extrapolation,
                    "plasma_frequency": _si(self.plasma_frequency, "frequency"),
                    "relaxation": _si(self.relaxation, "frequency")}
        if self.model == "ideal-metal":
            return {"model": "ideal-metal", "permittivity": self.permittivity}
        return {"model": "tabulated", "path": self.path, "units": self.units, "tail": self.tail,
                "extrapolation": self.extrapolation,
                "plasma_frequency": _si(self.plasma_frequency, "frequency"),
                "relaxation": _si(self.relaxation, "frequency")}


@dataclass(frozen=True)
class VoltageCalibration:
    """Pin U0 so the stable root sits at ``stable_root`` for the ``reference`` roughness."""

    stable_root: float
    reference: RoughnessSpec | None = None


@dataclass(frozen=True)
class SweepSpec:
    z: tuple[float, ...]

    @classmethod
    def parse(cls, r: _Reader) -> "SweepSpec":
        if r.has("z"):
            values = r.raw("z")
            if not isinstance(values, list):
                raise ConfigurationError("expected a list of lengths", field=f"{r.path}.z")
            z = tuple(parse_quantity(v, "length", f"{r.path}.z[{i}]") for i, v in enumerate(values))
        else:
            z_min = r.quantity("z_min", "length", required=True)
            z_max = r.quantity("z_max", "length", required=True)
            points = r.integer("points", 81)
            spacing = r.choice("spacing", ("linear", "log"), "linear")
            if points < 1:
                raise ConfigurationError("must be >= 1", field=f"{r.path}.points")
            if points > 1 and not z_max > z_min:
                raise ConfigurationError("z_max must exceed z_min", field=f"{r.path}.z_max")
            grid = np.linspace(z_min, z_max, points) if spacing == "linear" else np.geomspace(z_min, z_max, points)
            z = tuple(float(v) for v in grid)
        r.finish()
        if not z:
            raise ConfigurationError("z grid is empty", field=f"{r.path}.z")
        return cls(z)

    def canonical(self) -> dict:
        return {"z": [_si(v, "length") for v in self.z]}


@dataclass(frozen=True)
class RunConfig:
    name: str
    geometry: SensorGeometry
    membrane: MaterialSpec
    plate: MaterialSpec
    roughness: RoughnessSpec
    measured_pressure: float
    lifshitz: LifshitzConfig
    search: SearchSettings
    include_casimir: bool = True
    voltage: float = 0.0
    calibration: VoltageCalibration | None = None
    sweep: SweepSpec | None = None
    source: str | None = field(default=None, compare=False)

    def pair(self) -> HalfSpacePair:
        return HalfSpacePair(self.membrane.build(), self.plate.build())

    def scenario(self, voltage: float | None = None, pair: HalfSpacePair | None = None) -> SensorScenario:
        return SensorScenario(
            geometry=self.geometry,
            pair=pair or self.pair(),
            roughness=self.roughness,
            electrostatic=ElectrostaticSpec(self.voltage if voltage is None else voltage),
            measured_pressure=self.measured_pressure,
            lifshitz_config=self.lifshitz,
            include_casimir=self.include_casimir,
        )

    def canonical(self) -> dict:
        g = self.geometry
        out: dict[str, Any] = {
            "name": self.name,
            "geometry": {
                "length": _si(g.length, "length"),
                "width": _si(g.width, "length"),
                "thickness": _si(g.thickness, "length"),
                "suspension_height": _si(g.suspension_height, "length"),
                "calibration_pressure": _si(g.calibration_pressure, "pressure"),
                "spring_constant": _si(g.spring_constant, "stiffness"),
            },
            "materials": {"membrane": self.membrane.canonical(), "plate": self.plate.canonical()},
            "roughness": _roughness_canonical(self.roughness),
            "measured_pressure": _si(self.measured_pressure, "pressure"),
            "temperature": _si(self.lifshitz.temperature, "temperature"),
            "include_casimir": self.include_casimir,
            "electrostatics": {"voltage": _si(self.voltage, "voltage")},
            "solver": {
                "matsubara_rel_tolerance": self.lifshitz.matsubara_rel_tolerance,
                "matsubara_max_terms": int(self.lifshitz.matsubara_max_terms),
                "quadrature_rel_tolerance": self.lifshitz.quadrature_rel_tolerance,
                "quadrature_scheme": self.lifshitz.quadrature_scheme.value,
                "z_min": _si(self.search.z_min, "length"),
                "grid_points": self.search.grid_points,
                "root_xtol": _si(self.search.root_xtol, "length"),
                "residual_tolerance": _si(self.search.residual_tolerance, "pressure"),
                "collapse_tolerance": _si(self.search.collapse_tolerance, "pressure"),
            },
        }
        if self.calibration is not None:
            cal: dict[str, Any] = {"stable_root": _si(self.calibration.stable_root, "length")}
            if self.calibration.reference is not None:
                cal["roughness"] = _roughness_canonical(self.calibration.reference)
            out["electrostatics"]["calibrate"] = cal
        if self.sweep is not None:
            out["sweep"] = self.sweep.canonical()
        return out

    @property
    def config_hash(self) -> str:
        text = json.dumps(self.canonical(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(text.encode()).hexdigest()[:16]


def _roughness_canonical(r: RoughnessSpec) -> dict:
    out = {"membrane": _si(r.delta1, "length"), "plate": _si(r.delta2, "length"),
           "validity_ratio": r.validity_ratio}
    if r.correlation_length is not None:
        out["correlation_length"] = _si(r.correlation_length, "length")
    return out


def _parse_roughness(r: _Reader) -> RoughnessSpec:
    spec = RoughnessSpec(
        delta1=r.quantity("membrane", "length", 0.0),
        delta2=r.quantity("plate", "length", 0.0),
        validity_ratio=r.number("validity_ratio", DEFAULT_VALIDITY_RATIO),
        correlation_length=r.quantity("correlation_length", "length"),
    )
    r.finish()
    return spec


def _in_section(section: str, cls, root_fields: tuple[str, ...] = (), **kwargs):
    """Construct ``cls`` and re-raise its validation errors under ``section``."""
    try:
        return cls(**kwargs)
    except ConfigurationError as exc:
        if exc.field in root_fields:
            raise
        field = f"{section}.{exc.field}" if exc.field else section
        raise ConfigurationError(exc.detail, field=field) from None


def parse_config(raw: dict, base_dir: str | os.PathLike = ".", source: str | None = None) -> RunConfig:
    """Validate a raw mapping into a :class:`RunConfig`."""
    base = Path(base_dir)
    root = _Reader(raw, "")
    name = root.raw("name", "scenario")
    if not isinstance(name, str):
        raise ConfigurationError("expected a string", field="name")

    g = root.child("geometry")
    geometry = SensorGeometry(
        length=g.quantity("length", "length", 1000e-6),
        width=g.quantity("width", "length", 200e-6),
        thickness=g.quantity("thickness", "length", 30e-6),
        suspension_height=g.quantity("suspension_height", "length", 20e-6),
        calibration_pressure=g.quantity("calibration_pressure", "pressure", 3e3),
        spring_constant=g.quantity("spring_constant", "stiffness"),
    )
    g.finish()

    m = root.child("materials")
    if not m.has("membrane") or not m.has("plate"):
        raise ConfigurationError("both membrane and plate materials are required", field="materials")
    membrane = MaterialSpec.parse(m.raw("membrane"), "materials.membrane", base)
    plate = MaterialSpec.parse(m.raw("plate"), "materials.plate", base)
    m.finish()

    roughness = _parse_roughness(root.child("roughness"))
    measured = root.quantity("measured_pressure", "pressure", required=True)
    temperature = root.quantity("temperature", "temperature", 300.0)
    include_casimir = root.boolean("include_casimir", True)

    e = root.child("electrostatics")
    voltage = e.quantity("voltage", "voltage", 0.0)
    calibration = None
    if e.has("calibrate"):
        c = e.child("calibrate")
        target = c.quantity("stable_root", "length", required=True)
        reference = _parse_roughness(c.child("roughness")) if c.has("roughness") else None
        c.finish()
        calibration = VoltageCalibration(target, reference)
    e.finish()

    s = root.child("solver")
    lifshitz = _in_section(
        "solver", LifshitzConfig, ("temperature",),
        temperature=temperature,
        matsubara_rel_tolerance=s.number("matsubara_rel_tolerance", 1e-6),
        matsubara_max_terms=s.integer("matsubara_max_terms", 2000),
        quadrature_rel_tolerance=s.number("quadrature_rel_tolerance", 1e-6),
        quadrature_scheme=s.choice("quadrature_scheme", ("gauss-laguerre", "adaptive"), "gauss-laguerre"),
    )
    search = _in_section(
        "solver", SearchSettings,
        z_min=s.quantity("z_min", "length", 20e-9),
        grid_points=s.integer("grid_points", 200),
        root_xtol=s.quantity("root_xtol", "length", 1e-13),
        residual_tolerance=s.quantity("residual_tolerance", "pressure", 1e-3),
        collapse_tolerance=s.quantity("collapse_tolerance", "pressure", 1e-2),
    )
    s.finish()

    sweep = SweepSpec.parse(root.child("sweep")) if root.has("sweep") else None
    root.used.add("sweep")
    root.finish()

    if not 0 <= measured < geometry.contact_pressure:
        raise ConfigurationError(
            f"must satisfy 0 <= P < k h / (L D) = {geometry.contact_pressure:.6g} Pa", field="measured_pressure"
        )
    return RunConfig(name, geometry, membrane, plate, roughness, measured, lifshitz, search,
                     include_casimir, voltage, calibration, sweep, source)


def load_config(path: str | os.PathLike | None, overrides: list[str] | None = None) -> RunConfig:
    raw: dict = {}
    base = Path(".")
    if path is not None:
        p = Path(path)
        if not p.is_file():
            raise ConfigurationError(f"config file {str(p)!r} not found", field="--config")
        try:
            raw = yaml.safe_load(p.read_text(encoding="utf-8")) or {}
        except yaml.YAMLError as exc:
            raise ConfigurationError(f"invalid YAML: {exc}", field="--config") from None
        base = p.parent
    raw = apply_overrides(raw, overrides or [])
    return parse_config(raw, base, str(path) if path else None)
