"""Exception types shared across the toolkit."""


class AbsmcError(Exception):
    """Base class for all toolkit errors."""


class DimensionMismatch(AbsmcError):
    pass


class NonPositiveDiameter(AbsmcError):
    pass


class StateSpaceOverflow(AbsmcError):
    pass


class OutOfBounds(AbsmcError):
    def __init__(self, dim, value, lo, hi):
        self.dim = dim
        self.value = value
        super().__init__(
            f"state component {dim} = {value!r} outside [{lo}, {hi}]"
        )


class EmptyIntersection(AbsmcError):
    pass


class UnknownAction(AbsmcError):
    pass


class UnknownEnvironment(AbsmcError):
    pass


class GranularityMismatch(AbsmcError):
    pass


class FormatError(AbsmcError):
    pass


class LtlSyntaxError(AbsmcError):
    def __init__(self, message, position=None):
        self.position = position
        if position is not None:
            message = f"{message} (at position {position})"
        super().__init__(message)


class UnknownProposition(AbsmcError):
    pass


class UndeclaredAtom(AbsmcError):
    pass


class ConfigError(AbsmcError):
    pass
