import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from casimir_nems.constants import HBAR, SPEED_OF_LIGHT
from casimir_nems.errors import ConfigurationError, ConvergenceError, DomainError
from casimir_nems.lifshitz import (
    HalfSpacePair,
    LifshitzConfig,
    QuadratureScheme,
    casimir_pressure,
    casimir_pressure_details,
    reflection_te,
    reflection_tm,
)
from casimir_nems.materials import Extrapolation, gold, ideal_metal_proxy, silicon

NM = 1e-9
eps_s = st.floats(1.0, 1e6)
pos = st.floats(1e6, 1e9)


def ideal_metal_pressure(z):
    return math.pi**2 * HBAR * SPEED_OF_LIGHT / (240 * z**4)


# reflection coefficients

@given(st.floats(0, 1e17), pos)
def test_vacuum_interface_reflects_nothing(xi, k):
    assert reflection_tm(1.0, xi, k) == 0.0
    assert reflection_te(1.0, xi, k) == 0.0


def test_ideal_metal_limit():
    assert reflection_tm(1e12, 1e15, 1e7) == pytest.approx(1.0, abs=1e-5)


def test_tm_static_dielectric():
    assert reflection_tm(11.67, 0.0, 1e7) == pytest.approx((11.67 - 1) / (11.67 + 1), rel=1e-12)
    assert reflection_tm(11.67, 0.0, 1e7) == pytest.approx(0.8421, abs=1e-4)


def test_te_light_cone_example():
    k = 1e7
    r = reflection_te(4.0, SPEED_OF_LIGHT * k, k)
    assert r == pytest.approx((math.sqrt(2) - math.sqrt(5)) / (math.sqrt(2) + math.sqrt(5)), rel=1e-12)
    assert r == pytest.approx(-0.2251, abs=1e-4)


@given(eps_s, pos)
def test_te_vanishes_at_zero_frequency(eps, k):
    assert reflection_te(eps, 0.0, k) == 0.0


@given(eps_s, st.floats(1e10, 1e17), pos)
def test_coefficient_ranges(eps, xi, k):
    assert 0.0 <= reflection_tm(eps, xi, k) < 1.0 or eps >= 1e6
    assert -1.0 < reflection_te(eps, xi, k) <= 0.0


def test_te_decays_at_large_wave_vector():
    assert abs(reflection_te(11.67, 1e15, 1e13)) < 1e-10


def test_degenerate_point_rejected():
    with pytest.raises(DomainError):
        reflection_tm(2.0, 0.0, 0.0)
    with pytest.raises(DomainError):
        reflection_te(2.0, 0.0, 0.0)


def test_vectorized():
    r = reflection_tm(np.array([1.0, 4.0]), np.array([1e14, 1e14]), np.array([1e7, 1e7]))
    assert r.shape == (2,)
    assert r[0] == 0.0 and r[1] > 0


# pressure

def test_ideal_metal_oracle_at_100nm():
    pair = HalfSpacePair(ideal_metal_proxy(), ideal_metal_proxy())
    config = LifshitzConfig(temperature=1.0, matsubara_max_terms=2_000_000)
    p = casimir_pressure(pair, 100 * NM, config)
    assert p == pytest.approx(ideal_metal_pressure(100 * NM), rel=0.02)
    assert p == pytest.approx(13.0, rel=0.02)


def test_si_si_consistency_with_balance_at_75nm(si_si):
    # 30 N/m (20 um - 75.5 nm) / 2e-7 m^2 - 2979 Pa = 9.675 Pa; model sensitive
    assert casimir_pressure(si_si, 75.5 * NM) == pytest.approx(9.675, rel=0.25)


@settings(max_examples=20, deadline=None)
@given(st.floats(20, 800))
def test_doubling_separation_lowers_pressure(z_nm):
    pair = HalfSpacePair(silicon(), gold())
    assert casimir_pressure(pair, 2 * z_nm * NM) < casimir_pressure(pair, z_nm * NM)


def test_strictly_decreasing_on_grid(si_si, si_au):
    z = np.linspace(50, 200, 61) * NM
    for pair in (si_si, si_au):
        p = np.array([casimir_pressure(pair, zi) for zi in z])
        assert np.all(p > 0) and np.all(np.diff(p) < 0)


def test_gold_plate_attracts_more(si_si, si_au):
    for z in np.linspace(50, 400, 15) * NM:
        assert casimir_pressure(si_au, z) > casimir_pressure(si_si, z)


def test_bounded_by_ideal_metal(si_au):
    ideal = HalfSpacePair(ideal_metal_proxy(), ideal_metal_proxy())
    for z in (50 * NM, 150 * NM):
        assert casimir_pressure(si_au, z) < casimir_pressure(ideal, z)


@pytest.mark.parametrize("z_nm", [50, 100, 300])
def test_tolerance_halving_self_consistency(si_au, z_nm):
    loose = LifshitzConfig(matsubara_rel_tolerance=1e-5, quadrature_rel_tolerance=1e-5)
    tight = LifshitzConfig(matsubara_rel_tolerance=5e-6, quadrature_rel_tolerance=5e-6)
    a = casimir_pressure(si_au, z_nm * NM, loose)
    b = casimir_pressure(si_au, z_nm * NM, tight)
    assert abs(a - b) <= 1e-5 * b


@pytest.mark.parametrize("z_nm", [30, 100, 500])
def test_quadrature_schemes_agree(si_au, z_nm):
    gl = casimir_pressure(si_au, z_nm * NM)
    ad = casimir_pressure(si_au, z_nm * NM, LifshitzConfig(quadrature_scheme=QuadratureScheme.ADAPTIVE))
    assert ad == pytest.approx(gl, rel=1e-6)


def test_drude_and_plasma_close_at_sensor_separations(si):
    drude = casimir_pressure(HalfSpacePair(si, gold(Extrapolation.DRUDE)), 100 * NM)
    plasma = casimir_pressure(HalfSpacePair(si, gold(Extrapolation.PLASMA)), 100 * NM)
    assert plasma >= drude
    assert plasma == pytest.approx(drude, rel=0.05)


def test_symmetric_in_bodies(si_au, si, au):
    assert casimir_pressure(HalfSpacePair(au, si), 90 * NM) == pytest.approx(casimir_pressure(si_au, 90 * NM), rel=1e-12)


def test_details_report_diagnostics(si_si):
    d = casimir_pressure_details(si_si, 100 * NM)
    assert d.terms >= 10 and d.nodes >= 32 and 0 <= d.last_term_ratio < 1e-5


def test_rejects_non_positive_separation(si_si):
    with pytest.raises(DomainError):
        casimir_pressure(si_si, 0.0)


def test_truncation_cap_raises_with_diagnostics(si_si):
    with pytest.raises(ConvergenceError) as info:
        casimir_pressure(si_si, 1 * NM, LifshitzConfig(matsubara_max_terms=10))
    assert info.value.diagnostics["z"] == 1 * NM


@pytest.mark.parametrize("field,value", [("temperature", 0.0), ("matsubara_rel_tolerance", 0.1),
                                         ("quadrature_rel_tolerance", 0.0), ("matsubara_max_terms", 5)])
def test_config_validation(field, value):
    with pytest.raises(ConfigurationError):
        LifshitzConfig(**{field: value})
