"""Lifshitz pressure between two material half-spaces at finite temperature.

The magnitude of the pressure at separation ``z`` is

    P(z, T) = (k_B T / pi) * sum'_l int_0^inf q k dk
              sum_{TM, TE} r1 r2 exp(-2 z q) / (1 - r1 r2 exp(-2 z q)),

with q^2 = k^2 + xi_l^2 / c^2 and the l = 0 term halved. Substituting
y = 2 z q turns each frequency term into

    exp(-y0) / (8 z^3) * int_0^inf exp(-t) y^2 sum r1 r2 / (1 - r1 r2 exp(-y)) dt,

y = t + y0, y0 = 2 z xi_l / c, which is evaluated by Gauss-Laguerre
quadrature. In these variables the reflection coefficients depend only on
y and A = (2 z / c)^2 (eps - 1) xi^2, which stays finite at xi = 0 for Drude
and plasma metals.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import integrate

from .constants import BOLTZMANN, SPEED_OF_LIGHT, matsubara_frequency
from .errors import ConfigurationError, ConvergenceError, DomainError
from .materials import MaterialResponse

__all__ = [
    "QuadratureScheme",
    "LifshitzConfig",
    "HalfSpacePair",
    "LifshitzResult",
    "reflection_tm",
    "reflection_te",
    "casimir_pressure",
    "casimir_pressure_details",
]

_BLOCK = 64
_MIN_NODES = 32
_MAX_NODES = 256


class QuadratureScheme(str, enum.Enum):
    GAUSS_LAGUERRE = "gauss-laguerre"
    ADAPTIVE = "adaptive"


@dataclass(frozen=True)
class LifshitzConfig:
    temperature: float = 300.0
    matsubara_rel_tolerance: float = 1e-6
    matsubara_max_terms: int = 2000
    quadrature_rel_tolerance: float = 1e-6
    quadrature_scheme: QuadratureScheme = QuadratureScheme.GAUSS_LAGUERRE

    def __post_init__(self):
        object.__setattr__(self, "quadrature_scheme", QuadratureScheme(self.quadrature_scheme))
        if not self.temperature > 0:
            raise ConfigurationError("must be positive", field="temperature")
        for name in ("matsubara_rel_tolerance", "quadrature_rel_tolerance"):
            value = getattr(self, name)
            if not 0 < value <= 1e-2:
                raise ConfigurationError(f"must lie in (0, 1e-2], got {value}", field=name)
        if int(self.matsubara_max_terms) != self.matsubara_max_terms or self.matsubara_max_terms < 10:
            raise ConfigurationError("must be an integer >= 10", field="matsubara_max_terms")


@dataclass(frozen=True)
class HalfSpacePair:
    """Membrane (``body1``) facing the plate (``body2``)."""

    body1: MaterialResponse
    body2: MaterialResponse


@dataclass(frozen=True)
class LifshitzResult:
    pressure: float
    terms: int
    nodes: int
    last_term_ratio: float


def _wave_numbers(eps, xi, k_perp):
    eps = np.asarray(eps, dtype=float)
    xi = np.asarray(xi, dtype=float)
    k_perp = np.asarray(k_perp, dtype=float)
    if np.any(eps < 1):
        raise DomainError("permittivity must be >= 1")
    if np.any(xi < 0) or np.any(k_perp < 0):
        raise DomainError("xi and k_perp must be non-negative")
    if np.any((xi == 0) & (k_perp == 0)):
        raise DomainError("reflection coefficient undefined at xi = k_perp = 0")
    x = xi / SPEED_OF_LIGHT
    q = np.sqrt(k_perp**2 + x**2)
    with np.errstate(invalid="ignore"):
        k = np.sqrt(k_perp**2 + eps * x**2)
    return eps, q, k


def reflection_tm(eps, xi, k_perp):
    """TM reflection coefficient (eps q - k) / (eps q + k) at imaginary frequency."""
    eps, q, k = _wave_numbers(eps, xi, k_perp)
    # divide through by eps so that eps = inf gives exactly 1
    with np.errstate(invalid="ignore"):
        k_over_eps = np.where(np.isinf(eps), 0.0, k / eps)
    r = (q - k_over_eps) / (q + k_over_eps)
    return r[()] if r.ndim == 0 else r


def reflection_te(eps, xi, k_perp):
    """TE reflection coefficient (q - k) / (q + k) at imaginary frequency."""
    eps, q, k = _wave_numbers(eps, xi, k_perp)
    if np.any(np.isinf(eps) & (np.asarray(xi) == 0)):
        raise DomainError("TE coefficient of an infinite permittivity at xi = 0 is model dependent")
    # q - k = -(eps - 1) x^2 / (q + k), free of cancellation
    x2 = (np.asarray(xi, dtype=float) / SPEED_OF_LIGHT) ** 2
    with np.errstate(invalid="ignore"):
        r = np.where(np.isinf(eps), -1.0, -(eps - 1.0) * x2 / (q + k) ** 2)
    return r[()] if r.ndim == 0 else r


def _scaled_coefficients(y, eps, a):
    """r_TM, r_TE as functions of y = 2 z q and a = (2z/c)^2 (eps - 1) xi^2."""
    kk = np.sqrt(y * y + a)
    with np.errstate(invalid="ignore", divide="ignore"):
        k_over_eps = np.where(np.isinf(eps), 0.0, kk / eps)
        r_tm = (y - k_over_eps) / (y + k_over_eps)
        # a == 0: dielectrics and Drude metals at xi = 0, where r_TE vanishes
        r_te = np.where(a == 0, 0.0, -a / (y + kk) ** 2)
    return r_tm, r_te


def _kernel(y, eps1, a1, eps2, a2):
    """y^2 * sum over polarizations of r1 r2 / (1 - r1 r2 exp(-y))."""
    tm1, te1 = _scaled_coefficients(y, eps1, a1)
    tm2, te2 = _scaled_coefficients(y, eps2, a2)
    decay = np.exp(-y)
    rr_tm = tm1 * tm2
    rr_te = te1 * te2
    return y * y * (rr_tm / (1.0 - rr_tm * decay) + rr_te / (1.0 - rr_te * decay))


@lru_cache(maxsize=None)
def _laguerre(n: int):
    nodes, weights = np.polynomial.laguerre.laggauss(n)
    nodes.setflags(write=False)
    weights.setflags(write=False)
    return nodes, weights


def _terms_gauss_laguerre(z, y0, eps1, a1, eps2, a2, n):
    """Unscaled frequency integrals int_0^inf e^{-t} kernel(t + y0) dt for a block of l."""
    t, w = _laguerre(n)
    y = t[None, :] + y0[:, None]
    k = _kernel(y, eps1[:, None], a1[:, None], eps2[:, None], a2[:, None])
    return k @ w


def _terms_adaptive(y0, eps1, a1, eps2, a2, rtol):
    out = np.empty_like(y0)
    for i in range(y0.size):
        args = (eps1[i], a1[i], eps2[i], a2[i])

        def f(t, y0i=y0[i], args=args):
            return math.exp(-t) * float(_kernel(np.array(t + y0i), *args))

        val, _ = integrate.quad(f, 0.0, np.inf, epsabs=0.0, epsrel=rtol, limit=200)
        out[i] = val
    return out


def casimir_pressure_details(pair: HalfSpacePair, z: float, config: LifshitzConfig | None = None) -> LifshitzResult:
    """Lifshitz pressure magnitude plus truncation/quadrature diagnostics."""
    config = config or LifshitzConfig()
    if not z > 0:
        raise DomainError(f"separation must be positive, got {z!r}")
    temperature = config.temperature
    spacing = matsubara_frequency(1, temperature)
    scale = (2.0 * z / SPEED_OF_LIGHT) ** 2
    tol = config.matsubara_rel_tolerance
    max_terms = int(config.matsubara_max_terms)
    gl = config.quadrature_scheme is QuadratureScheme.GAUSS_LAGUERRE
    # terms fall off roughly like exp(-decay * l), so the tail after a term
    # is estimated as term / (1 - exp(-decay))
    decay = 2.0 * z * spacing / SPEED_OF_LIGHT
    tail_factor = 1.0 / -math.expm1(-decay)

    n = _MIN_NODES
    terms: list[float] = []
    running = 0.0
    small = 0
    start = 0
    ratio = math.inf
    while True:
        stop = min(start + _BLOCK, max_terms)
        if start >= stop:
            raise ConvergenceError(
                "Matsubara sum did not converge",
                z=z,
                temperature=temperature,
                terms=len(terms),
                last_term_ratio=ratio,
            )
        eps1, chi1 = pair.body1.matsubara_values(spacing, start, stop)
        eps2, chi2 = pair.body2.matsubara_values(spacing, start, stop)
        y0 = 2.0 * z * spacing * np.arange(start, stop) / SPEED_OF_LIGHT
        a1 = scale * chi1
        a2 = scale * chi2
        if gl:
            block = _terms_gauss_laguerre(z, y0, eps1, a1, eps2, a2, n)
            while True:
                finer = _terms_gauss_laguerre(z, y0, eps1, a1, eps2, a2, 2 * n)
                err = np.abs(finer - block).sum()
                ok = err <= config.quadrature_rel_tolerance * np.abs(finer).sum()
                block, n = finer, 2 * n
                if ok:
                    n //= 2
                    break
                if n >= _MAX_NODES:
                    raise ConvergenceError("Gauss-Laguerre quadrature did not converge", z=z, nodes=n)
        else:
            block = _terms_adaptive(y0, eps1, a1, eps2, a2, config.quadrature_rel_tolerance)
        block = block * np.exp(-y0)
        if start == 0:
            block[0] *= 0.5
        for value in block:
            terms.append(float(value))
            running += value
            ratio = value / running if running > 0 else 0.0
            small = small + 1 if value * tail_factor <= tol * running else 0
            if small == 3:
                total = math.fsum(terms)
                pressure = BOLTZMANN * temperature / math.pi * total / (8.0 * z**3)
                return LifshitzResult(pressure, len(terms), n if gl else 0, ratio)
        start = stop


def casimir_pressure(pair: HalfSpacePair, z: float, config: LifshitzConfig | None = None) -> float:
    """Magnitude of the Casimir pressure (Pa) between smooth half-spaces at separation ``z`` (m)."""
    return casimir_pressure_details(pair, z, config).pressure
