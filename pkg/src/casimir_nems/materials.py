"""Dielectric permittivity at imaginary frequency, eps(i xi).

Two evaluation routes are provided:

* closed-form oscillator models (Lorentz oscillators plus an optional Drude
  term), used as self-contained defaults for Si and Au;
* the Kramers-Kronig (KK) transform of tabulated Im eps(omega),

      eps(i xi) = 1 + (2/pi) * int_0^inf omega Im eps(omega) / (omega^2 + xi^2) d omega,

  with Im eps interpolated linearly between rows and extended beyond the table
  by documented tails.

All frequencies are angular frequencies in rad/s.
"""

from __future__ import annotations

import enum
import io
import math
import os
from dataclasses import dataclass, field
from typing import IO, Union

import numpy as np

from .constants import ev_to_rad_per_s
from .errors import ConfigurationError, DomainError, ParseError

__all__ = [
    "MaterialKind",
    "Extrapolation",
    "TailPolicy",
    "OpticalDataFormat",
    "OpticalDataTable",
    "LorentzOscillator",
    "DrudeTerm",
    "OscillatorModel",
    "MaterialResponse",
    "permittivity_at_imaginary_frequency",
    "kramers_kronig_transform",
    "load_optical_data",
    "silicon",
    "gold",
    "ideal_metal_proxy",
    "from_table",
    "SI_STATIC_PERMITTIVITY",
    "SI_RESONANCE_FREQUENCY",
    "AU_PLASMA_FREQUENCY",
    "AU_RELAXATION_FREQUENCY",
]

# Configuration defaults, overridable through the factories below.
SI_STATIC_PERMITTIVITY = 11.67
SI_RESONANCE_FREQUENCY = 6.6e15  # rad/s
AU_PLASMA_FREQUENCY = float(ev_to_rad_per_s(9.0))
AU_RELAXATION_FREQUENCY = float(ev_to_rad_per_s(0.035))


class MaterialKind(str, enum.Enum):
    ANALYTIC = "analytic-model"
    TABULATED = "tabulated-KK"


class Extrapolation(str, enum.Enum):
    """How a metal's response is continued to zero frequency."""

    NONE = "none"
    DRUDE = "drude"
    PLASMA = "plasma"


class TailPolicy(str, enum.Enum):
    """Continuation of tabulated Im eps outside the table range.

    ``CONSTANT_CUBIC``: constant below the first row, ``A / omega**3`` above the
    last row (``A`` matched to the last row). ``LINEAR_CUBIC``: proportional
    to omega below the first row (integrable at xi = 0), cubic above.
    ``ZERO``: Im eps = 0 outside.
    """

    CONSTANT_CUBIC = "constant-cubic"
    LINEAR_CUBIC = "linear-cubic"
    ZERO = "zero"


class OpticalDataFormat(str, enum.Enum):
    EV = "ev"
    RAD_PER_S = "rad/s"


def _as_xi(xi) -> np.ndarray:
    xi = np.asarray(xi, dtype=float)
    if np.any(np.isnan(xi)) or np.any(xi < 0):
        raise DomainError("imaginary frequency xi must be >= 0")
    return xi


@dataclass(frozen=True, eq=False)
class OpticalDataTable:
    """Rows of (omega [rad/s], Im eps(omega)), strictly increasing in omega."""

    omega: np.ndarray
    im_eps: np.ndarray

    def __post_init__(self):
        omega = np.array(self.omega, dtype=float)
        im_eps = np.array(self.im_eps, dtype=float)
        if omega.ndim != 1 or omega.shape != im_eps.shape:
            raise ConfigurationError("omega and Im eps must be 1-D arrays of equal length")
        if omega.size == 0:
            raise ConfigurationError("optical data table is empty")
        if not np.all(np.isfinite(omega)) or not np.all(np.isfinite(im_eps)):
            raise ConfigurationError("optical data contains non-finite values")
        if np.any(omega <= 0):
            raise ConfigurationError("optical data frequencies must be positive")
        if np.any(im_eps < 0):
            raise ConfigurationError("Im eps must be non-negative")
        if np.any(np.diff(omega) <= 0):
            raise ConfigurationError("optical data frequencies must be strictly increasing")
        omega.setflags(write=False)
        im_eps.setflags(write=False)
        object.__setattr__(self, "omega", omega)
        object.__setattr__(self, "im_eps", im_eps)

    def __len__(self) -> int:
        return self.omega.size


def load_optical_data(
    source: Union[str, os.PathLike, bytes, IO],
    format: OpticalDataFormat | str = OpticalDataFormat.EV,
) -> OpticalDataTable:
    """Parse a two-column optical data file into an :class:`OpticalDataTable`.

    Column 1 is photon energy in eV or angular frequency in rad/s (per
    ``format``), column 2 is Im eps. Lines starting with ``#`` and blank lines
    are skipped. Rows may be in ascending or descending order but must be
    strictly monotone; the returned table is ascending.
    """
    fmt = OpticalDataFormat(format)
    if isinstance(source, bytes):
        text = source.decode("utf-8")
    elif isinstance(source, (str, os.PathLike)):
        with open(source, encoding="utf-8") as fh:
            text = fh.read()
    else:
        text = source.read()
        if isinstance(text, bytes):
            text = text.decode("utf-8")

    rows: list[tuple[float, float]] = []
    line_numbers: list[int] = []
    for lineno, line in enumerate(io.StringIO(text), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        parts = stripped.split()
        if len(parts) != 2:
            raise ParseError(f"expected 2 columns, found {len(parts)}", row=lineno)
        try:
            x, y = float(parts[0]), float(parts[1])
        except ValueError:
            raise ParseError(f"non-numeric value in {stripped!r}", row=lineno) from None
        if not (math.isfinite(x) and math.isfinite(y)):
            raise ParseError("non-finite value", row=lineno)
        if x <= 0:
            raise ParseError(f"frequency must be positive, got {x}", row=lineno)
        if y < 0:
            raise ParseError(f"negative Im eps {y}", row=lineno)
        rows.append((x, y))
        line_numbers.append(lineno)

    if not rows:
        raise ParseError("no data rows")

    data = np.array(rows)
    if len(rows) > 1:
        steps = np.diff(data[:, 0])
        direction = np.sign(steps[0])
        bad = np.nonzero(np.sign(steps) != direction)[0] if direction != 0 else np.array([0])
        if bad.size:
            raise ParseError("frequencies are not strictly monotone", row=line_numbers[bad[0] + 1])
        if direction < 0:
            data = data[::-1]

    omega = data[:, 0] if fmt is OpticalDataFormat.RAD_PER_S else ev_to_rad_per_s(data[:, 0])
    return OpticalDataTable(omega, data[:, 1])


def _segment_integrals(omega: np.ndarray, im_eps: np.ndarray, xi: np.ndarray) -> np.ndarray:
    """int over the table of omega Im eps / (omega^2 + xi^2), Im eps piecewise linear.

    Exact for the interpolant; returns an array shaped like ``xi``.
    """
    if omega.size < 2:
        return np.zeros_like(xi)
    a = omega[:-1, None]
    b = omega[1:, None]
    ya = im_eps[:-1, None]
    slope = (im_eps[1:, None] - ya) / (b - a)
    offset = ya - slope * a
    x = xi[None, :]
    x2 = x * x
    # offset * int omega/(omega^2+xi^2) = offset/2 * log((b^2+xi^2)/(a^2+xi^2))
    log_part = 0.5 * offset * np.log1p((b * b - a * a) / (a * a + x2))
    # slope * int omega^2/(omega^2+xi^2) = slope * [(b-a) - xi*atan((b-a) xi / (xi^2 + a b))]
    atan_part = x * np.arctan((b - a) * x / (x2 + a * b))
    lin_part = slope * ((b - a) - atan_part)
    return np.sum(log_part + lin_part, axis=0)


def _cubic_tail(amplitude: float, omega_max: float, xi: np.ndarray) -> np.ndarray:
    """int_{omega_max}^inf amplitude / (omega^2 (omega^2 + xi^2)) d omega."""
    u = xi / omega_max
    out = np.empty_like(xi)
    small = u < 1e-2
    us = u[small]
    out[small] = (1.0 / 3.0 - us**2 / 5.0 + us**4 / 7.0 - us**6 / 9.0) / omega_max**3
    ul = u[~small]
    out[~small] = (1.0 - np.arctan(ul) / ul) / (ul**2 * omega_max**3)
    return amplitude * out


def _drude_low_tail(plasma: float, damping: float, omega_min: float, xi: np.ndarray) -> np.ndarray:
    """KK contribution of Drude Im eps on (0, omega_min).

    Im eps = wp^2 gamma / (omega (omega^2 + gamma^2)) so the integrand is
    wp^2 gamma / ((omega^2 + gamma^2)(omega^2 + xi^2)).
    """
    out = np.empty_like(xi)
    g = damping
    near = np.abs(xi - g) < 1e-6 * g
    x = xi[~near]
    out[~near] = plasma**2 * g * (np.arctan(omega_min / g) / g - np.arctan(omega_min / x) / x) / (x * x - g * g)
    if np.any(near):
        # xi == gamma: int 1/(omega^2+g^2)^2 closed form
        t = omega_min / g
        val = (np.arctan(t) + t / (1 + t * t)) / (2 * g**3)
        out[near] = plasma**2 * g * val
    return out


def kramers_kronig_transform(
    table: OpticalDataTable,
    xi,
    tail_policy: TailPolicy | str = TailPolicy.CONSTANT_CUBIC,
):
    """eps(i xi) from tabulated Im eps(omega) via the Kramers-Kronig relation.

    ``xi = 0`` is only integrable if Im eps vanishes at the low-frequency end
    of the table (dielectrics); otherwise a :class:`ConfigurationError` is
    raised for the constant low-frequency tail.
    """
    policy = TailPolicy(tail_policy)
    scalar = np.ndim(xi) == 0
    xi = np.atleast_1d(_as_xi(xi))
    total = _segment_integrals(table.omega, table.im_eps, xi)
    if policy is not TailPolicy.ZERO:
        first = table.im_eps[0]
        w0 = table.omega[0]
        if first > 0 and policy is TailPolicy.CONSTANT_CUBIC:
            if np.any(xi == 0):
                raise ConfigurationError(
                    "constant low-frequency tail with Im eps > 0 diverges at xi = 0; "
                    "use the 'linear-cubic' tail or a metal extrapolation"
                )
            total = total + 0.5 * first * np.log1p(w0 * w0 / (xi * xi))
        elif first > 0:
            # (first / w0) * int_0^w0 omega^2 / (omega^2 + xi^2)
            total = total + (first / w0) * (w0 - xi * np.arctan(w0 / np.where(xi > 0, xi, 1.0)) * (xi > 0))
        last = table.im_eps[-1]
        if last > 0:
            w1 = table.omega[-1]
            total = total + _cubic_tail(last * w1**3, w1, xi)
    result = 1.0 + (2.0 / math.pi) * total
    return float(result[0]) if scalar else result


@dataclass(frozen=True)
class LorentzOscillator:
    """eps contribution strength * w0^2 / (w0^2 + xi^2 + damping * xi)."""

    strength: float
    resonance: float
    damping: float = 0.0

    def __post_init__(self):
        if self.strength < 0 or self.resonance <= 0 or self.damping < 0:
            raise ConfigurationError(f"invalid oscillator parameters {self!r}")

    def susceptibility(self, xi: np.ndarray) -> np.ndarray:
        w2 = self.resonance**2
        return self.strength * w2 / (w2 + xi * xi + self.damping * xi)

    def im_eps(self, omega) -> np.ndarray:
        """Im eps on the real frequency axis."""
        omega = np.asarray(omega, dtype=float)
        w2 = self.resonance**2
        return self.strength * w2 * self.damping * omega / ((w2 - omega**2) ** 2 + (self.damping * omega) ** 2)


@dataclass(frozen=True)
class DrudeTerm:
    plasma_frequency: float
    relaxation: float

    def __post_init__(self):
        if self.plasma_frequency <= 0 or self.relaxation < 0:
            raise ConfigurationError(f"invalid Drude parameters {self!r}")

    def im_eps(self, omega) -> np.ndarray:
        omega = np.asarray(omega, dtype=float)
        g = self.relaxation
        return self.plasma_frequency**2 * g / (omega * (omega**2 + g**2))


@dataclass(frozen=True)
class OscillatorModel:
    """eps(i xi) = background + sum of oscillators [+ Drude term]."""

    oscillators: tuple[LorentzOscillator, ...] = ()
    drude: DrudeTerm | None = None
    background: float = 1.0

    def __post_init__(self):
        if self.background < 1:
            raise ConfigurationError("background permittivity must be >= 1")


@dataclass(frozen=True, eq=False)
class MaterialResponse:
    """Dielectric response of one body, evaluated at imaginary frequencies.

    ``parameters`` is an :class:`OscillatorModel` for ``kind=ANALYTIC`` or an
    :class:`OpticalDataTable` for ``kind=TABULATED``. For metals,
    ``zero_frequency_extrapolation`` selects Drude or plasma behaviour; a
    tabulated metal additionally needs ``drude`` parameters for the
    continuation below the first data row.
    """

    name: str
    kind: MaterialKind
    parameters: Union[OscillatorModel, OpticalDataTable]
    zero_frequency_extrapolation: Extrapolation = Extrapolation.NONE
    tail_policy: TailPolicy = TailPolicy.CONSTANT_CUBIC
    drude: DrudeTerm | None = None
    _cache: dict = field(default_factory=dict, init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "kind", MaterialKind(self.kind))
        object.__setattr__(self, "zero_frequency_extrapolation", Extrapolation(self.zero_frequency_extrapolation))
        object.__setattr__(self, "tail_policy", TailPolicy(self.tail_policy))
        if self.kind is MaterialKind.ANALYTIC:
            if not isinstance(self.parameters, OscillatorModel):
                raise ConfigurationError("analytic material needs an OscillatorModel")
            has_drude = self.parameters.drude is not None
            if has_drude == (self.zero_frequency_extrapolation is Extrapolation.NONE):
                raise ConfigurationError(
                    "a Drude term requires drude/plasma extrapolation and vice versa", field=self.name
                )
        else:
            if not isinstance(self.parameters, OpticalDataTable):
                raise ConfigurationError("tabulated material needs an OpticalDataTable")
            if self.zero_frequency_extrapolation is not Extrapolation.NONE and self.drude is None:
                raise ConfigurationError("metal extrapolation needs Drude parameters", field=self.name)

    @property
    def is_metal(self) -> bool:
        return self.zero_frequency_extrapolation is not Extrapolation.NONE

    def _drude_params(self) -> DrudeTerm | None:
        if self.kind is MaterialKind.ANALYTIC:
            return self.parameters.drude
        return self.drude

    def susceptibility_xi2(self, xi) -> np.ndarray:
        """(eps(i xi) - 1) * xi**2, finite at xi = 0 for every material."""
        xi = np.atleast_1d(_as_xi(xi))
        chi = np.zeros_like(xi)
        pos = xi > 0
        chi[pos] = self._dielectric_part(xi[pos]) - 1.0
        out = chi * xi * xi
        drude = self._drude_params()
        if self.zero_frequency_extrapolation is Extrapolation.PLASMA:
            out = out + drude.plasma_frequency**2
        elif self.kind is MaterialKind.ANALYTIC and drude is not None:
            out = out + drude.plasma_frequency**2 * xi / (xi + drude.relaxation)
        # tabulated Drude metals carry the Drude tail inside _dielectric_part
        return out

    def _dielectric_part(self, xi: np.ndarray) -> np.ndarray:
        """Finite-at-zero part of eps (for tabulated Drude metals: the full KK value)."""
        if self.kind is MaterialKind.ANALYTIC:
            eps = np.full_like(xi, self.parameters.background)
            for osc in self.parameters.oscillators:
                eps = eps + osc.susceptibility(xi)
            return eps
        table = self.parameters
        if self.zero_frequency_extrapolation is Extrapolation.NONE:
            return kramers_kronig_transform(table, xi, self.tail_policy)
        # metals: data + cubic high tail, low tail replaced by the extrapolation
        eps = kramers_kronig_transform(table, xi, TailPolicy.ZERO)
        if table.im_eps[-1] > 0:
            w1 = table.omega[-1]
            eps = eps + (2.0 / math.pi) * _cubic_tail(table.im_eps[-1] * w1**3, w1, xi)
        if self.zero_frequency_extrapolation is Extrapolation.DRUDE:
            eps = eps + (2.0 / math.pi) * _drude_low_tail(
                self.drude.plasma_frequency, self.drude.relaxation, table.omega[0], xi
            )
        return eps

    def epsilon(self, xi):
        """eps(i xi); ``inf`` at xi = 0 for metals."""
        scalar = np.ndim(xi) == 0
        xi = np.atleast_1d(_as_xi(xi))
        eps = np.empty_like(xi)
        pos = xi > 0
        eps[pos] = 1.0 + self.susceptibility_xi2(xi[pos]) / xi[pos] ** 2
        zero = ~pos
        if np.any(zero):
            eps[zero] = np.inf if self.is_metal else self._dielectric_part(xi[zero])
        return float(eps[0]) if scalar else eps

    def matsubara_values(self, spacing: float, start: int, stop: int) -> tuple[np.ndarray, np.ndarray]:
        """(eps, (eps-1) xi^2) at xi_l = l * spacing for l in [start, stop).

        Cached per (spacing, start, stop); entries are written once and never
        mutated, so concurrent readers are safe.
        """
        key = (spacing, start, stop)
        hit = self._cache.get(key)
        if hit is None:
            xi = np.arange(start, stop) * spacing
            eps = self.epsilon(xi)
            chi = self.susceptibility_xi2(xi)
            eps.setflags(write=False)
            chi.setflags(write=False)
            hit = self._cache.setdefault(key, (eps, chi))
        return hit

    def metadata(self) -> dict:
        meta = {
            "name": self.name,
            "kind": self.kind.value,
            "zero_frequency_extrapolation": self.zero_frequency_extrapolation.value,
        }
        if self.kind is MaterialKind.TABULATED:
            meta["tail_policy"] = self.tail_policy.value
            meta["rows"] = len(self.parameters)
        else:
            meta["oscillators"] = [
                {"strength": o.strength, "resonance": o.resonance, "damping": o.damping}
                for o in self.parameters.oscillators
            ]
        drude = self._drude_params()
        if drude is not None:
            meta["drude"] = {"plasma_frequency": drude.plasma_frequency, "relaxation": drude.relaxation}
        return meta


def permittivity_at_imaginary_frequency(material: MaterialResponse, xi):
    """eps(i xi) of ``material``; see :meth:`MaterialResponse.epsilon`."""
    return material.epsilon(xi)


def silicon(
    static_permittivity: float = SI_STATIC_PERMITTIVITY,
    resonance_frequency: float = SI_RESONANCE_FREQUENCY,
    damping: float = 0.0,
) -> MaterialResponse:
    """High-resistivity Si as a single-oscillator dielectric."""
    if static_permittivity < 1:
        raise ConfigurationError("static permittivity must be >= 1", field="si.static_permittivity")
    osc = LorentzOscillator(static_permittivity - 1.0, resonance_frequency, damping)
    return MaterialResponse("Si", MaterialKind.ANALYTIC, OscillatorModel((osc,)))


def gold(
    extrapolation: Extrapolation | str = Extrapolation.DRUDE,
    plasma_frequency: float = AU_PLASMA_FREQUENCY,
    relaxation: float = AU_RELAXATION_FREQUENCY,
) -> MaterialResponse:
    """Au as a Drude metal; ``plasma`` drops the relaxation term."""
    extrapolation = Extrapolation(extrapolation)
    if extrapolation is Extrapolation.NONE:
        raise ConfigurationError("gold needs a drude or plasma extrapolation", field="au.extrapolation")
    model = OscillatorModel(drude=DrudeTerm(plasma_frequency, relaxation))
    return MaterialResponse("Au", MaterialKind.ANALYTIC, model, extrapolation)


def ideal_metal_proxy(permittivity: float = 1e12) -> MaterialResponse:
    """A frequency-independent, very large permittivity standing in for a perfect mirror."""
    return MaterialResponse("ideal-metal-proxy", MaterialKind.ANALYTIC, OscillatorModel(background=permittivity))


def from_table(
    name: str,
    table: OpticalDataTable,
    extrapolation: Extrapolation | str = Extrapolation.NONE,
    tail_policy: TailPolicy | str = TailPolicy.CONSTANT_CUBIC,
    plasma_frequency: float = AU_PLASMA_FREQUENCY,
    relaxation: float = AU_RELAXATION_FREQUENCY,
) -> MaterialResponse:
    extrapolation = Extrapolation(extrapolation)
    drude = None if extrapolation is Extrapolation.NONE else DrudeTerm(plasma_frequency, relaxation)
    return MaterialResponse(name, MaterialKind.TABULATED, table, extrapolation, tail_policy, drude)
