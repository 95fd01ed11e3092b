"""Exception types shared across the package."""


class DomainError(ValueError):
    """Input outside the domain of an operation."""


class AccuracyError(ArithmeticError):
    """Requested accuracy could not be certified.

    ``achieved`` holds the best width or diameter that was reached.
    """

    def __init__(self, message: str, achieved=None):
        super().__init__(message)
        self.achieved = achieved


class ConfigurationError(ValueError):
    """A k-sequence or run configuration violates a stated hypothesis."""


class StructuralError(RuntimeError):
    """A band complex does not admit the expected sequence of moves."""


class CriticalLevelError(ArithmeticError):
    """A plane level hits a singular value of the section foliation."""


class InvariantError(AssertionError):
    """A checked invariant failed."""
