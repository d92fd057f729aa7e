class SpatialQAError(Exception):
    """Base class for all errors raised by this package."""


class UnknownEntity(SpatialQAError, KeyError):
    def __str__(self) -> str:
        return f"unknown entity {self.args[0]!r}"


class NotDerivable(SpatialQAError):
    pass


class NoValidPath(SpatialQAError):
    pass


class UnresolvableDescription(SpatialQAError):
    pass


class InconsistentAssignment(SpatialQAError):
    pass


class UniqueDescriptionError(SpatialQAError):
    pass


class ParseError(SpatialQAError, ValueError):
    def __init__(self, message: str, line: int | None = None):
        self.line = line
        super().__init__(message if line is None else f"line {line}: {message}")


class LexiconError(ParseError):
    pass


class ConfigError(SpatialQAError, ValueError):
    pass
