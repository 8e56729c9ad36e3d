"""Exception hierarchy for robinpart."""


class RobinPartError(Exception):
    """Base class for all package errors."""


class ConfigError(RobinPartError, ValueError):
    """Invalid input or configuration (CLI exit code 2)."""


class NumericalError(RobinPartError, ArithmeticError):
    """A numerical procedure failed (CLI exit code 3)."""


# grid geometry
class NonPositiveSpacing(ConfigError):
    pass


class SpacingTooCoarse(ConfigError):
    pass


class SelfIntersectingPolygon(ConfigError):
    pass


class DimensionMismatch(ConfigError):
    pass


class EmptyBall(ConfigError):
    pass


# eigensolver
class EmptySupport(ConfigError):
    pass


class NonPositiveBeta(ConfigError):
    pass


class ZeroFunction(ConfigError):
    pass


class NotConnected(ConfigError):
    pass


class NoConvergence(NumericalError):
    def __init__(self, max_iter, residual=float("nan")):
        super().__init__(f"no convergence after {max_iter} outer iterations (residual {residual:.3e})")
        self.max_iter = max_iter
        self.residual = residual


class SignPatternViolation(NumericalError):
    pass


# relaxed energy
class ZeroMass(ConfigError):
    pass


class ZeroMassPhase(ZeroMass):
    pass


class DisjointnessViolation(ConfigError):
    pass


# optimizer
class TooManyPhases(ConfigError):
    pass


class DisconnectedPhase(NumericalError):
    pass


# analysis
class EmptyProbeSet(ConfigError):
    pass


class NotConvex(ConfigError):
    pass
