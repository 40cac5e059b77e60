"""Exception hierarchy.

Every error raised by the library derives from :class:`QrevError`, which is a
``ValueError`` so that callers treating bad input generically keep working.
"""


class QrevError(ValueError):
    pass


class DimensionMismatch(QrevError):
    pass


class NotHermitian(QrevError):
    pass


class NotPSD(QrevError):
    pass


class ZeroMatrix(QrevError):
    pass


class InvalidRank(QrevError):
    pass


class InvalidState(QrevError):
    pass


class DegenerateDistribution(QrevError):
    pass


class NotOvercomplete(QrevError):
    pass


class NotAGramMatrix(QrevError):
    pass


class InvalidResolution(QrevError):
    pass


class SupportViolation(QrevError):
    """Raised when supp(rho) is not contained in supp(sigma)."""


class NotApplicable(QrevError):
    """Raised when an identity would require evaluating inf - inf."""


class InvalidT(QrevError):
    pass


class NotOrthogonal(QrevError):
    pass


class NotComplete(QrevError):
    pass


class HypothesisNotMet(QrevError):
    pass


class PreconditionFailed(QrevError):
    def __init__(self, hypothesis: str, detail: str = ""):
        self.hypothesis = hypothesis
        msg = f"precondition '{hypothesis}' failed"
        if detail:
            msg += f": {detail}"
        super().__init__(msg)


class SchemaError(QrevError):
    def __init__(self, pointer: str, message: str):
        self.pointer = pointer
        super().__init__(f"{pointer or '/'}: {message}")


class ValidationError(QrevError):
    pass
