"""Exception types shared across the engine.

Clip file problems all derive from ClipError so callers can catch one
base; ParseError carries the 1-based line number when known.
"""


class DanceDrillError(Exception):
    """Base class for every error raised by this package."""


class ConfigError(DanceDrillError):
    pass


class ClipError(DanceDrillError):
    pass


class ParseError(ClipError):
    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class SchemaError(ParseError):
    """Wrong format version or joint set."""


class InvariantError(ParseError):
    """Structurally valid file violating a clip invariant."""


class IoError(DanceDrillError):
    pass


class RangeError(DanceDrillError):
    pass


class DegenerateSpine(DanceDrillError):
    pass


class DegenerateFacing(DanceDrillError):
    pass


class BandInfeasible(DanceDrillError):
    pass


class EmptyInput(DanceDrillError):
    pass


class OutOfOrderFrame(DanceDrillError):
    pass


class IncompleteAttempt(DanceDrillError):
    def __init__(self, coverage):
        super().__init__(f"attempt covered {coverage:.1%} of the reference, below the 50% floor")
        self.coverage = coverage


class LockedChallengeError(DanceDrillError):
    pass


class EmptyCategory(DanceDrillError):
    pass


class MalformedLine(DanceDrillError):
    pass


class FrameTooLarge(DanceDrillError):
    pass


class BindError(DanceDrillError):
    pass
