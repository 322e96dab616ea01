import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from casimir_nems.errors import ConfigurationError, DomainError, RoughnessValidityWarning, SearchError
from casimir_nems.roughness import ElectrostaticSpec, RoughnessSpec, rough_casimir_pressure
from casimir_nems.sensor import (
    SearchSettings,
    SensorGeometry,
    SensorScenario,
    Stability,
    calibrate_spring,
    calibrate_voltage,
    elastic_lhs,
    find_collapse_pressure,
    find_equilibria,
    sweep_balance_curves,
    total_rough_pressure,
)

NM = 1e-9
UM = 1e-6


def balance(scenario, z):
    return elastic_lhs(scenario, z) - total_rough_pressure(scenario, z)


# spring calibration

def test_spring_constant():
    assert calibrate_spring(3e3, 20 * UM, 1000 * UM, 200 * UM) == pytest.approx(30.0, rel=1e-12)
    assert calibrate_spring(6e3, 40 * UM, 1000 * UM, 200 * UM) == pytest.approx(30.0, rel=1e-12)


@given(st.floats(1, 1e5), st.floats(1e-7, 1e-4), st.floats(1e-5, 1e-2), st.floats(1e-5, 1e-2))
def test_spring_linear_in_pressure(P0, h, L, D):
    assert calibrate_spring(2 * P0, h, L, D) == pytest.approx(2 * calibrate_spring(P0, h, L, D), rel=1e-14)


@pytest.mark.parametrize("args", [(0, 1, 1, 1), (1, -1, 1, 1), (1, 1, 0, 1), (1, 1, 1, -2)])
def test_spring_rejects_non_positive(args):
    with pytest.raises(DomainError):
        calibrate_spring(*args)


def test_geometry_defaults(geometry):
    assert geometry.spring_constant == pytest.approx(30.0)
    assert geometry.contact_pressure == pytest.approx(3e3)


# elastic side

def test_elastic_lhs_examples(si_si_scenario):
    assert elastic_lhs(si_si_scenario, 132 * NM) == pytest.approx(30 * (20e-6 - 132e-9) / 2e-7 - 2979, rel=1e-9)
    assert elastic_lhs(si_si_scenario, 132 * NM) == pytest.approx(1.2, abs=0.05)
    assert elastic_lhs(si_si_scenario, 20 * UM) == pytest.approx(-2979.0)


def test_unloaded_balance_at_suspension_height(geometry, si_si):
    s = SensorScenario(geometry, si_si, measured_pressure=0.0)
    assert elastic_lhs(s, geometry.suspension_height) == 0.0


@pytest.mark.parametrize("z", [0.0, -1e-9, 21 * UM])
def test_elastic_lhs_domain(si_si_scenario, z):
    with pytest.raises(DomainError):
        elastic_lhs(si_si_scenario, z)


def test_measured_pressure_validated(geometry, si_si):
    with pytest.raises(ConfigurationError):
        SensorScenario(geometry, si_si, measured_pressure=3e3)
    with pytest.raises(ConfigurationError):
        SensorScenario(geometry, si_si, measured_pressure=-1.0)


def test_total_pressure_reductions(si_si_scenario, si_si):
    z = 100 * NM
    assert total_rough_pressure(si_si_scenario, z) == rough_casimir_pressure(
        si_si, si_si_scenario.roughness, z, si_si_scenario.lifshitz_config)
    smooth = si_si_scenario.smooth()
    from casimir_nems.lifshitz import casimir_pressure
    assert total_rough_pressure(smooth, z) == casimir_pressure(si_si, z)


# equilibria

@pytest.fixture(scope="module")
def si_au_report(si_au_scenario):
    return find_equilibria(si_au_scenario)


def test_two_roots_ordered(si_au_report):
    assert si_au_report.root_count == 2 and not si_au_report.collapse
    unstable, stable = si_au_report.roots
    assert unstable.stability is Stability.UNSTABLE and stable.stability is Stability.STABLE
    assert unstable.z < stable.z
    assert unstable.slope_margin < 0 < stable.slope_margin


def test_root_residuals(si_au_scenario, si_au_report):
    for root in si_au_report.roots:
        assert abs(root.residual) < 1e-3
        assert abs(balance(si_au_scenario, root.z)) < 1e-3


def test_stability_matches_finite_differences(si_au_scenario, si_au_report):
    d = 0.1 * NM
    for root in si_au_report.roots:
        below, above = balance(si_au_scenario, root.z - d), balance(si_au_scenario, root.z + d)
        if root.stability is Stability.STABLE:
            assert below > 0 > above
        else:
            assert below < 0 < above


def test_roughness_moves_unstable_root_outward(si_au_scenario, si_au_report):
    rougher = find_equilibria(si_au_scenario.evolve(roughness=RoughnessSpec(1 * NM, 5 * NM)))
    assert rougher.unstable.z > si_au_report.unstable.z
    assert rougher.stable.z < si_au_report.stable.z


def test_collapse_when_pressure_too_high(geometry, si_au):
    s = SensorScenario(geometry, si_au, measured_pressure=2995.0)
    assert find_equilibria(s).collapse


def test_no_casimir_single_root(geometry, si_si):
    s = SensorScenario(geometry, si_si, measured_pressure=1500.0, include_casimir=False)
    report = find_equilibria(s)
    assert report.root_count == 1
    assert report.roots[0].z == pytest.approx(10 * UM, rel=1e-9)
    assert report.roots[0].stability is Stability.STABLE


def test_non_perturbative_root_warns(geometry, si_au):
    s = SensorScenario(geometry, si_au, RoughnessSpec(0, 5 * NM, validity_ratio=0.05),
                       measured_pressure=2979.0)
    with pytest.warns(RoughnessValidityWarning):
        report = find_equilibria(s)
    assert any(not r.perturbative for r in report.roots)


# collapse pressure

@pytest.fixture(scope="module")
def collapse_si_au(si_au_scenario):
    return find_collapse_pressure(si_au_scenario)


def test_collapse_pressure_bracket(collapse_si_au):
    assert 2979 < collapse_si_au < 3000


def test_collapse_pressure_decreases_with_roughness(si_au_scenario, collapse_si_au):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RoughnessValidityWarning)
        rougher = find_collapse_pressure(si_au_scenario.evolve(roughness=RoughnessSpec(1 * NM, 10 * NM)))
    assert rougher < collapse_si_au


def test_collapse_pressure_separates_root_counts(si_au_scenario, collapse_si_au):
    tol = SearchSettings().collapse_tolerance
    below = si_au_scenario.evolve(measured_pressure=collapse_si_au - tol)
    above = si_au_scenario.evolve(measured_pressure=collapse_si_au + tol)
    assert find_equilibria(below).root_count == 2
    assert find_equilibria(above).collapse


# sweep tables

def test_single_point_sweep_smooth(si_si_scenario):
    t = sweep_balance_curves(si_si_scenario.smooth(), [100 * NM])
    assert len(t) == 1
    assert t.p_tot_rough[0] == t.p_tot_smooth[0]


def test_rough_curve_above_smooth(si_au_scenario):
    s = si_au_scenario.evolve(roughness=RoughnessSpec(1 * NM, 10 * NM))
    t = sweep_balance_curves(s, np.linspace(70, 150, 41) * NM)
    assert np.all(t.p_tot_rough > t.p_tot_smooth)


def test_gold_curve_above_silicon(si_si_scenario, si_au_scenario):
    z = np.linspace(70, 150, 41) * NM
    a = sweep_balance_curves(si_si_scenario, z)
    b = sweep_balance_curves(si_au_scenario.evolve(roughness=si_si_scenario.roughness), z)
    assert np.all(b.p_tot_rough > a.p_tot_rough)
    np.testing.assert_array_equal(a.f, b.f)


@pytest.mark.parametrize("grid", [[], [0.0, 1e-7], [2e-7, 1e-7], [1e-7, 1e-3]])
def test_sweep_rejects_bad_grids(si_si_scenario, grid):
    with pytest.raises(ConfigurationError):
        sweep_balance_curves(si_si_scenario, grid)


# voltage calibration

@pytest.fixture(scope="module")
def electro(geometry, si_au):
    base = SensorScenario(geometry, si_au, RoughnessSpec(0.1 * NM, 2 * NM), measured_pressure=2973.0)
    u0 = calibrate_voltage(base, 164.5 * NM)
    return base.evolve(electrostatic=ElectrostaticSpec(u0)), u0


def test_calibrated_voltage_places_stable_root(electro):
    scenario, u0 = electro
    assert 0 < u0 < 1
    report = find_equilibria(scenario)
    assert report.stable.z == pytest.approx(164.5 * NM, abs=1e-3 * NM)
    assert total_rough_pressure(scenario, 164.5 * NM) == pytest.approx(elastic_lhs(scenario, 164.5 * NM), abs=1e-6)
    assert elastic_lhs(scenario, 164.5 * NM) == pytest.approx(2.3, abs=0.1)


def test_voltage_calibration_rejects_unreachable_root(si_au_scenario):
    with pytest.raises(SearchError):
        calibrate_voltage(si_au_scenario, 60 * NM)


@settings(max_examples=5, deadline=None)
@given(st.floats(2900, 2978))
def test_roots_straddle_curve_minimum(P):
    from casimir_nems.lifshitz import HalfSpacePair
    from casimir_nems.materials import silicon
    s = SensorScenario(SensorGeometry(), HalfSpacePair(silicon(), silicon()), measured_pressure=P)
    report = find_equilibria(s)
    assert report.root_count == 2
    assert all(abs(r.residual) < 1e-3 for r in report.roots)
