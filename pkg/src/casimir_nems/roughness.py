"""Perturbative roughness corrections to the Casimir and electrostatic pressures.

Both corrections depend on the two r.m.s. amplitudes only through
s = delta1**2 + delta2**2 and are fourth-order polynomials in sqrt(s) / z:

    Casimir:        1 + 10 s / z^2 + 105 s^2 / z^4
    electrostatic:  1 +  3 s / z^2 +   5 s^2 / z^4
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

from .constants import EPSILON_0
from .errors import ConfigurationError, DomainError, RoughnessValidityWarning
from .lifshitz import HalfSpacePair, LifshitzConfig, casimir_pressure

__all__ = [
    "DEFAULT_VALIDITY_RATIO",
    "RoughnessSpec",
    "ElectrostaticSpec",
    "casimir_roughness_factor",
    "electric_roughness_factor",
    "rough_casimir_pressure",
    "rough_electric_pressure",
    "smooth_electric_pressure",
]

DEFAULT_VALIDITY_RATIO = 0.2


@dataclass(frozen=True)
class RoughnessSpec:
    """r.m.s. roughness of the membrane (``delta1``) and of the plate (``delta2``), in m.

    ``correlation_length`` is metadata only; the expansion assumes it is much
    larger than the separation but that cannot be checked from these inputs.
    """

    delta1: float = 0.0
    delta2: float = 0.0
    validity_ratio: float = DEFAULT_VALIDITY_RATIO
    correlation_length: float | None = None

    def __post_init__(self):
        if not (self.delta1 >= 0 and self.delta2 >= 0):
            raise ConfigurationError("roughness amplitudes must be >= 0")
        if not self.validity_ratio > 0:
            raise ConfigurationError("validity ratio must be positive")

    @property
    def variance_sum(self) -> float:
        return self.delta1**2 + self.delta2**2

    @property
    def is_smooth(self) -> bool:
        return self.delta1 == 0 and self.delta2 == 0

    def is_perturbative(self, z: float) -> bool:
        return math.sqrt(self.variance_sum) / z <= self.validity_ratio


SMOOTH = RoughnessSpec()


@dataclass(frozen=True)
class ElectrostaticSpec:
    voltage: float = 0.0

    def __post_init__(self):
        if not self.voltage >= 0:
            raise ConfigurationError("voltage must be >= 0", field="voltage")


def _check(rough: RoughnessSpec, z: float) -> float:
    if not z > 0:
        raise DomainError(f"separation must be positive, got {z!r}")
    if not rough.is_perturbative(z):
        warnings.warn(
            f"roughness sqrt(d1^2 + d2^2) = {math.sqrt(rough.variance_sum):.3g} m is not small "
            f"compared with z = {z:.3g} m; perturbative correction may be unreliable",
            RoughnessValidityWarning,
            stacklevel=3,
        )
    return rough.variance_sum / (z * z)


def casimir_roughness_factor(rough: RoughnessSpec, z: float) -> float:
    u = _check(rough, z)
    return 1.0 + 10.0 * u + 105.0 * u * u


def electric_roughness_factor(rough: RoughnessSpec, z: float) -> float:
    u = _check(rough, z)
    return 1.0 + 3.0 * u + 5.0 * u * u


def rough_casimir_pressure(
    pair: HalfSpacePair, rough: RoughnessSpec, z: float, config: LifshitzConfig | None = None
) -> float:
    """Casimir pressure magnitude (Pa) with the roughness factor applied."""
    smooth = casimir_pressure(pair, z, config)
    if rough.is_smooth:
        return smooth
    return smooth * casimir_roughness_factor(rough, z)


def smooth_electric_pressure(elec: ElectrostaticSpec, z: float) -> float:
    """Parallel-plate pressure eps0 U^2 / (2 z^2)."""
    if not z > 0:
        raise DomainError(f"separation must be positive, got {z!r}")
    return EPSILON_0 * elec.voltage**2 / (2.0 * z * z)


def rough_electric_pressure(elec: ElectrostaticSpec, rough: RoughnessSpec, z: float) -> float:
    base = smooth_electric_pressure(elec, z)
    if rough.is_smooth:
        return base
    return base * electric_roughness_factor(rough, z)
