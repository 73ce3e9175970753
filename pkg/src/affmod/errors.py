"""Exception hierarchy shared by every module of the package."""


class AffmodError(Exception):
    """Base class for all library errors."""


class FieldMismatchError(AffmodError, TypeError):
    """Two operands live over different scalar fields."""


class ContextMismatchError(AffmodError, ValueError):
    """Two polynomials (or a polynomial and a map) use different variable contexts."""


class UnknownVariableError(AffmodError, KeyError):
    def __str__(self):
        return f"unknown variable {self.args[0]!r}"


class NotDivisibleError(AffmodError, ArithmeticError):
    """Exact division failed; usually a violated hypothesis upstream."""


class UnsupportedFieldError(AffmodError, TypeError):
    pass


class PolySyntaxError(AffmodError, ValueError):
    def __init__(self, message, pos, text=""):
        super().__init__(f"{message} at offset {pos}")
        self.message = message
        self.pos = pos
        self.text = text


class CertificationError(AffmodError, ValueError):
    """A modification triple could not be certified to have a prime presentation ideal."""


class InvalidTripleError(AffmodError, ValueError):
    pass


class NotNilpotentWithin(AffmodError, ValueError):
    def __init__(self, max_iter, var=None):
        super().__init__(f"derivation not nilpotent on {var!r} within {max_iter} iterations")
        self.max_iter = max_iter
        self.var = var


class NoInverseWithinDegree(AffmodError, ValueError):
    pass


class ShapeMismatchError(AffmodError, ValueError):
    pass


class OffVarietyError(AffmodError, ValueError):
    pass


class SingularPointError(AffmodError, ValueError):
    pass


class DuplicatePointError(AffmodError, ValueError):
    pass


class FiberPointsNotFound(AffmodError, LookupError):
    pass


class TransversalityViolated(AffmodError, ValueError):
    pass


class RootOutsideField(AffmodError, ValueError):
    pass


class BudgetExceeded(AffmodError, RuntimeError):
    pass


class WordFormatError(AffmodError, ValueError):
    pass
