"""Exception hierarchy shared by every module of the package."""


class CKPError(Exception):
    """Base class for all errors raised by weighted_ckp."""


class ValidationError(CKPError, ValueError):
    """An input violates a documented precondition."""


class EmptySpace(ValidationError):
    pass


class NonpositiveWeight(ValidationError):
    pass


class BadNormalization(ValidationError):
    pass


class BadExponent(ValidationError):
    pass


class BadDensity(ValidationError):
    pass


class BadFunction(ValidationError):
    pass


class BadOrder(ValidationError):
    pass


class NegativeWeightFunction(ValidationError):
    pass


class NegativeG(ValidationError):
    pass


class NotCentered(ValidationError):
    pass


class ZeroFunction(ValidationError):
    pass


class BadMetric(ValidationError):
    pass


class UnknownProfile(ValidationError):
    pass


class ConfigError(ValidationError):
    pass


class NotDominated(CKPError):
    """A routine that presupposes domination was handed a non-dominated certificate."""


class NoConvergence(CKPError, ArithmeticError):
    """Root bracketing failed (pathological magnitudes)."""


class OracleNotConverged(CKPError, ArithmeticError):
    """An iterative optimizer hit its iteration cap before its stopping rule."""


class SolverFailure(CKPError, RuntimeError):
    """The transport solver reached a state that is impossible for balanced marginals."""
