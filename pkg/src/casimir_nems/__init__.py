"""Casimir-regime stability of nanoelectromechanical pressure sensors with rough surfaces."""

__version__ = "0.1.0"

from .constants import CONSTANTS, MatsubaraGrid, matsubara_frequency
from .errors import (
    ConfigurationError,
    ConvergenceError,
    DomainError,
    ParseError,
    RoughnessValidityWarning,
    SearchError,
)
from .lifshitz import HalfSpacePair, LifshitzConfig, casimir_pressure, reflection_te, reflection_tm
from .materials import (
    MaterialResponse,
    OpticalDataTable,
    gold,
    kramers_kronig_transform,
    load_optical_data,
    permittivity_at_imaginary_frequency,
    silicon,
)
from .roughness import (
    ElectrostaticSpec,
    RoughnessSpec,
    casimir_roughness_factor,
    rough_casimir_pressure,
    rough_electric_pressure,
)
from .sensor import (
    EquilibriumReport,
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
