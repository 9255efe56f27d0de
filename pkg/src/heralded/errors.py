"""Exception hierarchy.

Two families matter to callers (and to the CLI exit codes):
``ValidationError`` for inputs that violate a parameter invariant, and
``NumericalError`` for failures inside an otherwise valid computation.
"""


class HeraldedError(Exception):
    """Base class for all package errors."""


class ValidationError(HeraldedError, ValueError):
    """A parameter or state violates a documented invariant."""


class NumericalError(HeraldedError, ArithmeticError):
    """A numerical routine could not produce a trustworthy result."""


class NormViolation(ValidationError):
    pass


class DegenerateDelocalization(ValidationError):
    pass


class InvalidParameter(ValidationError):
    pass


class CutoffOverflow(ValidationError):
    pass


class OutcomeBeyondCutoff(ValidationError):
    pass


class ZeroNorm(ValidationError):
    pass


class NotNormalized(ValidationError):
    pass


class BranchFactorizationFailure(NumericalError):
    pass


class NoRootInBracket(NumericalError):
    pass


class ZeroProbabilityOutcome(UserWarning):
    """Heralding outcome whose probability is zero at machine level.

    Emitted as a warning; the corresponding record carries a flag instead of
    the computation failing.
    """
