"""Exception types raised across the package."""


class ContractViolationError(ValueError):
    """An argument breaks a documented precondition (shape mismatch, bad label, ...)."""


class DegenerateInputError(ValueError):
    """Input is structurally valid but too small to process (e.g. a single pixel)."""


class NumericDivergenceError(ArithmeticError):
    """Training produced a non-finite loss value."""

    def __init__(self, iteration, message=None):
        self.iteration = iteration
        super().__init__(message or f"non-finite loss at iteration {iteration}")


class DecodeError(ValueError):
    """A file could not be decoded into an image or label map."""

    def __init__(self, path, reason):
        self.path = str(path)
        self.reason = reason
        super().__init__(f"{path}: {reason}")
