"""Exception hierarchy.

Validation errors describe bad input (exit code 2 from the CLI); numerical
failures describe a computation that could not be completed (exit code 3).
"""


class EBError(Exception):
    pass


class ValidationError(EBError):
    pass


class NumericalFailure(EBError):
    pass


class BadParams(ValidationError):
    pass


class TailNotDecayed(ValidationError):
    pass


class OutOfDomain(ValidationError):
    pass


class OutOfRange(ValidationError):
    pass


class RegionViolation(ValidationError):
    def __init__(self, message, window=None):
        super().__init__(message)
        self.window = window


class AssumptionViolated(ValidationError):
    def __init__(self, message, min_abs_a=None):
        super().__init__(message)
        self.min_abs_a = min_abs_a


class OnContour(ValidationError):
    pass


class DegenerateReflection(ValidationError):
    """Reflection coefficient vanishes; the oscillatory amplitude is zero."""


class NotAvailable(ValidationError):
    pass


class NonConvergence(NumericalFailure):
    def __init__(self, message, lam=None):
        super().__init__(message)
        self.lam = lam


class RangeTooNarrow(NumericalFailure):
    pass


class StepUnderflow(NumericalFailure):
    pass


class WakeReachedBoundary(NumericalFailure):
    def __init__(self, message, t=None, wake=None):
        super().__init__(message)
        self.t = t
        self.wake = wake
