"""Exception hierarchy shared by every stage of the pipeline."""


class BmdmError(Exception):
    """Base class for all package errors."""


class ParseError(BmdmError):
    """Scenario file is not valid structured text."""


class ValidationError(BmdmError):
    """A scenario field violates its invariant. ``field`` names the culprit."""

    def __init__(self, field: str, message: str = ""):
        self.field = field
        super().__init__(f"{field}: {message}" if message else field)


class DegenerateGeometry(BmdmError):
    pass


class ZeroSignal(BmdmError):
    pass


class AmbiguousRange(BmdmError):
    pass


class DegenerateFit(BmdmError):
    pass


class NoDopplerPeak(BmdmError):
    pass


class MissingFrame(BmdmError):
    def __init__(self, frame: int):
        self.frame = frame
        super().__init__(f"zero-magnitude phasor at frame {frame}")


class EmptyInput(BmdmError):
    pass
