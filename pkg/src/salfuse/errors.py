"""Exception types shared across the package."""


class SalfuseError(Exception):
    """Base class for all errors raised by this package."""


class ParameterError(SalfuseError, ValueError):
    """A configuration value or function argument is out of range."""


class ShapeMismatchError(SalfuseError, ValueError):
    """Operands do not share the required geometry."""


class FormatError(SalfuseError, ValueError):
    """A file or byte stream does not parse as the expected format."""


class NoFramesError(FormatError):
    """A frame source turned out to contain no decodable frames."""


class InconsistentFramesError(FormatError):
    """Frames in one stream disagree on dimensions or channel count."""


class NoPairsError(SalfuseError, ValueError):
    """An operation over consecutive frame pairs got fewer than two frames."""
