"""Quantum noise budgets for cavity optomechanical displacement sensing."""

from .errors import (
    BadSign,
    ConfigError,
    DegenerateCavity,
    NoEquivalent,
    NonPositiveRate,
    NotResonant,
    OptomechError,
    SingularSystem,
    ZeroCoupling,
    ZeroTransduction,
)
from .model import (
    DerivedQuantities,
    PortSpectrum,
    ProbeConfig,
    SystemParams,
    TabulatedPSD,
    benchmark_system,
    boundary_phases,
    derive,
    minimum_sql_power,
    squeeze_db,
    squeeze_r_from_db,
    validate_system,
)

__version__ = "0.1.0"
