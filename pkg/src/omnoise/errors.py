"""Exception types raised by the noise-budget engine."""


class OptomechError(Exception):
    """Base class for all physics-domain errors."""

    exit_code = 3


class ParameterError(OptomechError, ValueError):
    """Invalid physical parameters. ``violations`` lists every failed check."""

    def __init__(self, violations):
        if isinstance(violations, str):
            violations = [violations]
        self.violations = list(violations)
        super().__init__("; ".join(self.violations))


class NonPositiveRate(ParameterError):
    pass


class BadSign(ParameterError):
    pass


class DegenerateCavity(OptomechError, ValueError):
    pass


class ZeroCoupling(OptomechError, ValueError):
    pass


class NotResonant(OptomechError, ValueError):
    pass


class ZeroTransduction(OptomechError, ValueError):
    """Raised where the imprecision noise would be infinite."""


class SingularSystem(OptomechError, ArithmeticError):
    def __init__(self, omega, matrix):
        self.omega = omega
        self.matrix = matrix
        super().__init__(f"singular Langevin system at omega={omega!r} rad/s")


class NoEquivalent(OptomechError, ValueError):
    """The squeezed-probe noise lies below every coherent-probe noise level."""


class ConfigError(ValueError):
    exit_code = 2
