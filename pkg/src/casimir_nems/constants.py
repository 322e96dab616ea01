"""Physical constants (CODATA 2018, SI), unit conversions and the Matsubara grid."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError

__all__ = [
    "PhysicalConstants",
    "CONSTANTS",
    "BOLTZMANN",
    "HBAR",
    "SPEED_OF_LIGHT",
    "EPSILON_0",
    "ELEMENTARY_CHARGE",
    "ev_to_rad_per_s",
    "rad_per_s_to_ev",
    "matsubara_frequency",
    "MatsubaraGrid",
]


@dataclass(frozen=True)
class PhysicalConstants:
    boltzmann_constant: float = 1.380649e-23  # J/K (exact)
    reduced_planck_constant: float = 1.054571817e-34  # J s
    speed_of_light: float = 299792458.0  # m/s (exact)
    vacuum_permittivity: float = 8.8541878128e-12  # F/m
    elementary_charge: float = 1.602176634e-19  # C (exact)


CONSTANTS = PhysicalConstants()

BOLTZMANN = CONSTANTS.boltzmann_constant
HBAR = CONSTANTS.reduced_planck_constant
SPEED_OF_LIGHT = CONSTANTS.speed_of_light
EPSILON_0 = CONSTANTS.vacuum_permittivity
ELEMENTARY_CHARGE = CONSTANTS.elementary_charge


def ev_to_rad_per_s(energy_ev):
    """Photon energy in eV to angular frequency, omega = E / hbar."""
    return np.asarray(energy_ev, dtype=float) * ELEMENTARY_CHARGE / HBAR


def rad_per_s_to_ev(omega):
    return np.asarray(omega, dtype=float) * HBAR / ELEMENTARY_CHARGE


def _check_temperature(temperature: float) -> None:
    if not temperature > 0:
        raise DomainError(f"temperature must be positive, got {temperature!r} K")


def matsubara_frequency(l: int, temperature: float) -> float:
    """Return the Matsubara frequency xi_l = 2 pi k_B T l / hbar in rad/s."""
    _check_temperature(temperature)
    if l < 0:
        raise DomainError(f"Matsubara index must be non-negative, got {l}")
    return 2.0 * math.pi * BOLTZMANN * temperature * l / HBAR


@dataclass(frozen=True)
class MatsubaraGrid:
    """The first ``l_max + 1`` Matsubara frequencies at a given temperature.

    The ``l = 0`` term of the Matsubara sum carries half weight; ``weights``
    exposes this as ``[0.5, 1, 1, ...]``.
    """

    temperature: float
    l_max: int
    half_weight_zero_term: bool = field(default=True, init=False)

    def __post_init__(self):
        _check_temperature(self.temperature)
        if self.l_max < 0:
            raise DomainError(f"l_max must be non-negative, got {self.l_max}")

    @property
    def spacing(self) -> float:
        return matsubara_frequency(1, self.temperature)

    @property
    def indices(self) -> np.ndarray:
        return np.arange(self.l_max + 1)

    @property
    def frequencies(self) -> np.ndarray:
        return self.indices * self.spacing

    @property
    def weights(self) -> np.ndarray:
        w = np.ones(self.l_max + 1)
        w[0] = 0.5
        return w

    def __len__(self) -> int:
        return self.l_max + 1
