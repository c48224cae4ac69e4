"""Floquet simulation of a driven spin-orbit-coupled lattice with a single impurity."""
from .errors import (
    ConfigParseError,
    EffectiveModelInapplicableError,
    IntegrationAccuracyError,
    InvalidArgumentError,
    OutOfRangeError,
    OutOfRegimeError,
    ResonanceSingularityError,
    SimulationError,
    SpectralAccuracyError,
)
from .lattice import LatticeParams, basis_state
from .propagator import IntegratorConfig, Trajectory, evolve, monodromy
from .floquet import diagnostics, quasienergies, spectrum_sweep
from .specfun import bessel_j, bessel_zero

__version__ = "0.1.0"
