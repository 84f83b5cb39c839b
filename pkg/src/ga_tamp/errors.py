"""Exception types shared across the package."""


class InvalidArgumentError(ValueError):
    """An argument violates an operation's precondition."""


class DegenerateGeometryError(ValueError):
    """Geometry is too degenerate (coplanar, zero volume, ...) to process."""


class ConfigurationError(ValueError):
    """A scene or task cannot be turned into a planning problem."""

    def __init__(self, message, field=None):
        super().__init__(message)
        self.field = field
