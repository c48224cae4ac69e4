"""Exception hierarchy shared by all modules."""


class SimulationError(Exception):
    """Base class for every error raised by the package."""


class InvalidArgumentError(SimulationError, ValueError):
    pass


class OutOfRangeError(SimulationError, ValueError):
    pass


class IntegrationAccuracyError(SimulationError):
    """Norm drift exceeded the tolerated bound; rerun with more steps per period."""


class SpectralAccuracyError(SimulationError):
    """Monodromy eigenvalues are too far from the unit circle."""


class EffectiveModelInapplicableError(SimulationError):
    """The requested effective model does not cover these parameters."""


class OutOfRegimeError(EffectiveModelInapplicableError):
    pass


class ResonanceSingularityError(SimulationError):
    def __init__(self, series, p, denominator):
        self.series = series
        self.p = p
        self.denominator = denominator
        super().__init__(
            f"near-zero denominator {denominator:.3e} in {series} at p={p}"
        )


class ConfigParseError(SimulationError, ValueError):
    def __init__(self, message, line=None):
        self.line = line
        prefix = f"line {line}: " if line is not None else ""
        super().__init__(prefix + message)
