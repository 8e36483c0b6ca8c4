"""Exception hierarchy for the codec."""


class CodecError(Exception):
    """Base class for all liftcodec errors."""


class FormatError(CodecError):
    """Input file does not match the declared raw layout."""


class RangeError(CodecError):
    """Sample value outside the declared bit depth."""


class DecodeError(CodecError):
    """Bitstream is truncated, corrupt, or from an unknown version."""


class ParameterError(CodecError):
    """Invalid configuration or mismatched operand dimensions."""
