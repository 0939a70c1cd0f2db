"""Exception types raised across the package."""


class RiemflowError(Exception):
    """Base class for package errors."""


class InputError(RiemflowError, ValueError):
    """Caller passed arguments that violate an operation's preconditions."""


class DomainError(RiemflowError, ValueError):
    """A geometric map is undefined at the given arguments (e.g. antipodal points)."""


class NumericalError(RiemflowError, ArithmeticError):
    """A numerical kernel failed (non-convergent eigendecomposition, underflow)."""


class OracleError(RiemflowError, RuntimeError):
    """A benchmark oracle did not reach its tolerance."""


class StepError(RiemflowError):
    """Integration failed at a given step; carries the step index."""

    def __init__(self, step, cause):
        super().__init__(f"step {step}: {cause}")
        self.step = step
        self.cause = cause
