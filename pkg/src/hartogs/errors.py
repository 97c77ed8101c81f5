"""Exception types shared across the package."""


class PreconditionError(ValueError):
    """An operation was called outside the range where its claim applies."""


class HypothesisError(RuntimeError):
    """The extension hypotheses do not hold for a configuration."""

    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report


class VerificationError(AssertionError):
    """A numerical inequality failed beyond its stated slack."""

    def __init__(self, message, record=None):
        super().__init__(message)
        self.record = record
