"""Equilibria of a spring-suspended membrane pressed towards a ground plate.

The membrane at height ``z`` is in equilibrium when the elastic pressure
minus the measured pressure,

    f(z) = k (h - z) / (L D) - P,

equals the total attractive pressure P_tot(z) (roughness-corrected Casimir
plus electrostatic). Roots of g(z) = f(z) - P_tot(z) where g rises through
zero are unstable (a small approach lets the attraction win); roots where g
falls through zero are stable.
"""

from __future__ import annotations

import enum
import math
import warnings
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np
from scipy import optimize

from .constants import EPSILON_0
from .errors import ConfigurationError, DomainError, RoughnessValidityWarning, SearchError
from .lifshitz import HalfSpacePair, LifshitzConfig
from .roughness import (
    SMOOTH,
    ElectrostaticSpec,
    RoughnessSpec,
    electric_roughness_factor,
    rough_casimir_pressure,
    rough_electric_pressure,
)

__all__ = [
    "SensorGeometry",
    "SensorScenario",
    "SearchSettings",
    "Stability",
    "Equilibrium",
    "BracketDiagnostics",
    "EquilibriumReport",
    "BalanceTable",
    "calibrate_spring",
    "elastic_lhs",
    "total_rough_pressure",
    "find_equilibria",
    "find_collapse_pressure",
    "sweep_balance_curves",
    "calibrate_voltage",
]


def calibrate_spring(P0: float, h: float, L: float, D: float) -> float:
    """Spring constant k = P0 L D / h (N/m) that brings the membrane to contact at P = P0."""
    for name, value in (("P0", P0), ("h", h), ("L", L), ("D", D)):
        if not value > 0:
            raise DomainError(f"{name} must be positive, got {value!r}")
    return P0 * L * D / h


@dataclass(frozen=True)
class SensorGeometry:
    """Membrane of ``length`` x ``width`` x ``thickness`` suspended at ``suspension_height``.

    ``spring_constant`` defaults to the calibrated value P0 L D / h.
    The thickness does not enter the balance.
    """

    length: float = 1000e-6
    width: float = 200e-6
    thickness: float = 30e-6
    suspension_height: float = 20e-6
    calibration_pressure: float = 3e3
    spring_constant: float | None = None

    def __post_init__(self):
        for name in ("length", "width", "thickness", "suspension_height", "calibration_pressure"):
            if not getattr(self, name) > 0:
                raise ConfigurationError("must be positive", field=f"geometry.{name}")
        if self.spring_constant is None:
            k = calibrate_spring(self.calibration_pressure, self.suspension_height, self.length, self.width)
            object.__setattr__(self, "spring_constant", k)
        elif not self.spring_constant > 0:
            raise ConfigurationError("must be positive", field="geometry.spring_constant")

    @property
    def area(self) -> float:
        return self.length * self.width

    @property
    def stiffness_per_area(self) -> float:
        """k / (L D) in Pa/m."""
        return self.spring_constant / self.area

    @property
    def contact_pressure(self) -> float:
        """Measured pressure that closes the gap in the absence of attraction, k h / (L D)."""
        geo = (self.suspension_height, self.length, self.width)
        if self.spring_constant == calibrate_spring(self.calibration_pressure, *geo):
            return self.calibration_pressure  # exact, without rounding through k
        return self.stiffness_per_area * self.suspension_height


@dataclass(frozen=True)
class SensorScenario:
    geometry: SensorGeometry
    pair: HalfSpacePair
    roughness: RoughnessSpec = SMOOTH
    electrostatic: ElectrostaticSpec = field(default_factory=ElectrostaticSpec)
    measured_pressure: float = 0.0
    lifshitz_config: LifshitzConfig = field(default_factory=LifshitzConfig)
    include_casimir: bool = True

    def __post_init__(self):
        p0 = self.geometry.contact_pressure
        if not 0 <= self.measured_pressure < p0:
            raise ConfigurationError(
                f"must satisfy 0 <= P < {p0:.6g} Pa, got {self.measured_pressure!r}", field="measured_pressure"
            )

    @property
    def temperature(self) -> float:
        return self.lifshitz_config.temperature

    def smooth(self) -> "SensorScenario":
        return replace(self, roughness=SMOOTH)

    def evolve(self, **changes) -> "SensorScenario":
        return replace(self, **changes)


@dataclass(frozen=True)
class SearchSettings:
    """Root search parameters (lengths in m, pressures in Pa)."""

    z_min: float = 20e-9
    grid_points: int = 200
    root_xtol: float = 1e-13
    residual_tolerance: float = 1e-3
    derivative_step: float = 1e-3  # relative to z
    floor_extension: float = 1e-3  # search down to z_min * floor_extension if g(z_min) > 0
    collapse_tolerance: float = 1e-2

    def __post_init__(self):
        if not self.z_min > 0 or self.grid_points < 3:
            raise ConfigurationError("need z_min > 0 and at least 3 grid points")
        if not 0 < self.floor_extension <= 1:
            raise ConfigurationError("floor_extension must be in (0, 1]")


class Stability(str, enum.Enum):
    STABLE = "stable"
    UNSTABLE = "unstable"


@dataclass(frozen=True)
class Equilibrium:
    z: float
    stability: Stability
    slope_margin: float  # -dg/dz in Pa/m; positive for stable roots
    residual: float  # g(z) in Pa
    perturbative: bool = True


@dataclass(frozen=True)
class BracketDiagnostics:
    z_min: float
    z_max: float
    grid_points: int
    evaluations: int
    searched_below_floor: bool = False
    tangency_checks: int = 0


@dataclass(frozen=True)
class EquilibriumReport:
    roots: tuple[Equilibrium, ...]
    diagnostics: BracketDiagnostics

    @property
    def root_count(self) -> int:
        return len(self.roots)

    @property
    def collapse(self) -> bool:
        return not self.roots

    def _first(self, stability: Stability) -> Equilibrium | None:
        return next((r for r in self.roots if r.stability is stability), None)

    @property
    def unstable(self) -> Equilibrium | None:
        return self._first(Stability.UNSTABLE)

    @property
    def stable(self) -> Equilibrium | None:
        return self._first(Stability.STABLE)


def elastic_lhs(scenario: SensorScenario, z: float) -> float:
    """f(z) = k (h - z) / (L D) - P."""
    geo = scenario.geometry
    if not 0 < z <= geo.suspension_height:
        raise DomainError(f"z must lie in (0, h], got {z!r}")
    return geo.stiffness_per_area * (geo.suspension_height - z) - scenario.measured_pressure


def total_rough_pressure(scenario: SensorScenario, z: float) -> float:
    """Roughness-corrected Casimir plus electrostatic pressure (Pa)."""
    if not z > 0:
        raise DomainError(f"separation must be positive, got {z!r}")
    total = 0.0
    if scenario.include_casimir:
        total += rough_casimir_pressure(scenario.pair, scenario.roughness, z, scenario.lifshitz_config)
    if scenario.electrostatic.voltage:
        total += rough_electric_pressure(scenario.electrostatic, scenario.roughness, z)
    return total


class _Balance:
    """Caches P_tot(z) so that root counting for many P is cheap."""

    def __init__(self, scenario: SensorScenario):
        self.scenario = scenario
        self.geo = scenario.geometry
        self._cache: dict[float, float] = {}
        self._tangent: dict[tuple[float, float], float] = {}

    def pressure(self, z: float) -> float:
        z = float(z)
        hit = self._cache.get(z)
        if hit is None:
            with warnings.catch_warnings():
                # validity is judged at the reported roots, not along the scan
                warnings.simplefilter("ignore", RoughnessValidityWarning)
                hit = total_rough_pressure(self.scenario, z)
            self._cache[z] = hit
        return hit

    def spring(self, z: float) -> float:
        """F(z) = k (h - z) / (L D) - P_tot(z); g = F - P."""
        return self.geo.stiffness_per_area * (self.geo.suspension_height - z) - self.pressure(z)

    def tangent_max(self, a: float, b: float, xtol: float) -> tuple[float, float]:
        """Location and value of the maximum of F on [a, b]."""
        key = (a, b)
        if key not in self._tangent:
            res = optimize.minimize_scalar(lambda z: -self.spring(z), bounds=(a, b), method="bounded",
                                           options={"xatol": xtol})
            self._tangent[key] = float(res.x)
        zt = self._tangent[key]
        return zt, self.spring(zt)

    def pressure_slope(self, z: float, rel_step: float) -> float:
        """dP_tot/dz by Richardson-extrapolated central differences."""
        h = rel_step * z
        d1 = (self.pressure(z + h) - self.pressure(z - h)) / (2 * h)
        d2 = (self.pressure(z + h / 2) - self.pressure(z - h / 2)) / h
        return (4 * d2 - d1) / 3

    @property
    def evaluations(self) -> int:
        return len(self._cache)


def _brackets(balance: _Balance, P: float, settings: SearchSettings) -> tuple[list[tuple[float, float]], bool, int]:
    """Sign-change brackets of g = F - P, including close pairs hidden inside one grid cell."""
    h = balance.geo.suspension_height
    grid = np.geomspace(settings.z_min, h, settings.grid_points)
    g = np.array([balance.spring(z) for z in grid]) - P
    brackets: list[tuple[float, float]] = []
    below = False
    tangency = 0

    if g[0] > 0 or g[1] < g[0]:
        # a root may lie below the floor: either the line is still above the
        # curve there, or g keeps rising towards smaller z (weak attraction)
        below = True
        upper, g_upper = settings.z_min, g[0]
        for z in np.geomspace(settings.z_min, settings.z_min * settings.floor_extension, 61)[1:]:
            gz = balance.spring(z) - P
            if (gz > 0) != (g_upper > 0):
                brackets.append((float(z), float(upper)))
                break
            upper, g_upper = z, gz

    for i in range(len(grid) - 1):
        if (g[i] > 0) != (g[i + 1] > 0):
            brackets.append((float(grid[i]), float(grid[i + 1])))
        elif g[i] <= 0 and g[i + 1] <= 0 and 0 < i and g[i] >= g[i - 1] and g[i] >= g[i + 1]:
            # local maximum below zero: the curve may poke above the line inside the cell
            tangency += 1
            a, b = float(grid[i - 1]), float(grid[i + 1])
            zt, ft = balance.tangent_max(a, b, settings.root_xtol)
            if ft - P > 0:
                brackets.extend([(a, zt), (zt, b)])
    brackets.sort()
    return brackets, below, tangency


def find_equilibria(scenario: SensorScenario, settings: SearchSettings | None = None,
                    _balance: _Balance | None = None) -> EquilibriumReport:
    """All equilibrium heights on (0, h], ordered by z, with stability labels."""
    settings = settings or SearchSettings()
    balance = _balance or _Balance(scenario)
    P = scenario.measured_pressure
    brackets, below, tangency = _brackets(balance, P, settings)

    def g(z):
        return balance.spring(z) - P

    roots = []
    for a, b in brackets:
        z = optimize.brentq(g, a, b, xtol=settings.root_xtol, rtol=4 * np.finfo(float).eps)
        dg = -balance.geo.stiffness_per_area - balance.pressure_slope(z, settings.derivative_step)
        stability = Stability.STABLE if dg < 0 else Stability.UNSTABLE
        roots.append(Equilibrium(z, stability, -dg, g(z), scenario.roughness.is_perturbative(z)))

    for root in roots:
        if not root.perturbative:
            warnings.warn(
                f"equilibrium at z = {root.z:.4g} m lies where the roughness correction is not perturbative",
                RoughnessValidityWarning,
                stacklevel=2,
            )
    diag = BracketDiagnostics(settings.z_min, balance.geo.suspension_height, settings.grid_points,
                              balance.evaluations, below, tangency)
    return EquilibriumReport(tuple(roots), diag)


def _root_count(balance: _Balance, P: float, settings: SearchSettings) -> int:
    return len(_brackets(balance, P, settings)[0])


def find_collapse_pressure(template: SensorScenario, settings: SearchSettings | None = None) -> float:
    """Largest measured pressure (Pa) for which an equilibrium still exists.

    Bisects on P between 0 (equilibria present) and the contact pressure
    k h / (L D) (none); ``template.measured_pressure`` is ignored.
    """
    settings = settings or SearchSettings()
    balance = _Balance(template)
    lo, hi = 0.0, template.geometry.contact_pressure
    if _root_count(balance, lo, settings) == 0:
        raise SearchError("no equilibrium even at zero measured pressure")
    if _root_count(balance, hi, settings) != 0:
        raise SearchError("equilibria persist at the contact pressure")
    while hi - lo > settings.collapse_tolerance:
        mid = 0.5 * (lo + hi)
        if _root_count(balance, mid, settings):
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


@dataclass(frozen=True)
class BalanceTable:
    """Per-point f(z), P_tot with roughness and P_tot for smooth surfaces."""

    z: np.ndarray
    f: np.ndarray
    p_tot_rough: np.ndarray
    p_tot_smooth: np.ndarray

    def __len__(self) -> int:
        return self.z.size

    def rows(self):
        return zip(self.z, self.f, self.p_tot_rough, self.p_tot_smooth)


def sweep_balance_curves(scenario: SensorScenario, z_grid: Sequence[float]) -> BalanceTable:
    z = np.asarray(z_grid, dtype=float)
    h = scenario.geometry.suspension_height
    if z.ndim != 1 or z.size == 0:
        raise ConfigurationError("z grid must be a non-empty 1-D sequence", field="sweep.z_grid")
    if np.any(z <= 0) or np.any(z > h):
        raise ConfigurationError("z grid must lie in (0, h]", field="sweep.z_grid")
    if np.any(np.diff(z) <= 0):
        raise ConfigurationError("z grid must be strictly ascending", field="sweep.z_grid")
    rough = _Balance(scenario)
    smooth = _Balance(scenario.smooth())
    f = np.array([elastic_lhs(scenario, zi) for zi in z])
    pr = np.array([rough.pressure(zi) for zi in z])
    ps = pr.copy() if scenario.roughness.is_smooth else np.array([smooth.pressure(zi) for zi in z])
    return BalanceTable(z, f, pr, ps)


def calibrate_voltage(scenario: SensorScenario, stable_root: float,
                      settings: SearchSettings | None = None) -> float:
    """Voltage U0 (V) that places the stable equilibrium of ``scenario`` at ``stable_root``.

    Solves f(z*) = P_C(z*) + P_el(z*; U0) for U0 in closed form, then checks
    that z* is indeed the stable root of the resulting balance.
    """
    z = stable_root
    no_field = scenario.evolve(electrostatic=ElectrostaticSpec(0.0))
    needed = elastic_lhs(no_field, z) - total_rough_pressure(no_field, z)
    if needed < 0:
        raise SearchError(f"Casimir pressure alone exceeds the elastic balance at z = {z:.4g} m")
    factor = 1.0 if scenario.roughness.is_smooth else electric_roughness_factor(scenario.roughness, z)
    voltage = math.sqrt(2.0 * z * z * needed / (EPSILON_0 * factor))
    report = find_equilibria(scenario.evolve(electrostatic=ElectrostaticSpec(voltage)), settings)
    stable = report.stable
    if stable is None or abs(stable.z - z) > 1e-3 * z:
        raise SearchError(f"z = {z:.4g} m is not a stable equilibrium for any voltage")
    return voltage
