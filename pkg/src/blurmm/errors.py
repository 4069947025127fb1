"""Exception types shared across the package."""


class BlurMMError(Exception):
    """Base class for package-specific failures."""


class PnmFormatError(BlurMMError):
    """Raised when a PGM/PPM byte stream cannot be decoded."""


class ProtocolError(BlurMMError):
    """Raised when an external predictor violates the line-JSON protocol."""


class ConfigError(BlurMMError):
    """Raised for invalid or unknown run-configuration entries."""


class GenerationError(BlurMMError):
    """Raised when synthetic corpus parameters fail their quality targets."""
