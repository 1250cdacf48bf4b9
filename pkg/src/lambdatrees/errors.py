"""Exception hierarchy shared by all modules."""


class LambdaTreesError(Exception):
    """Base class for every error raised by this package."""


class FieldError(LambdaTreesError):
    """Failure inside exact field arithmetic."""


class PrecisionExhausted(FieldError):
    """A sign or valuation could not be settled within the configured budget."""


class DomainError(FieldError, ValueError):
    """An operation was applied outside its domain (division by zero, sqrt of a negative...)."""


class ParseError(FieldError, ValueError):
    """Malformed expression text.

    ``position`` is the 0-based character offset where parsing failed.
    """

    def __init__(self, message, text="", position=0):
        self.text = text
        self.position = position
        if text:
            pointer = " " * position + "^"
            message = f"{message} at position {position}\n  {text}\n  {pointer}"
        super().__init__(message)


class ValidationError(LambdaTreesError, ValueError):
    """Input data violates a structural requirement (determinant, disk membership, flags)."""


class FourPointViolation(LambdaTreesError):
    """Distances handed to the tree realizer are not a tree metric."""


class DegenerateAction(LambdaTreesError):
    """Every sampled group element acts elliptically; there is no axis to sample."""


class DegenerateTripod(LambdaTreesError):
    """A real tripod is too fat for its orientation to be read off reliably."""


class ConvergenceError(LambdaTreesError):
    """An iterative numerical routine did not reach its tolerance."""
