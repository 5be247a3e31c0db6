"""Exception types shared across the package."""


class LingLabError(Exception):
    """Base class for package errors."""


class EmptyDocumentError(LingLabError):
    """Raised when a document contains no extractable word tokens."""


class UnknownAttributeError(LingLabError):
    """Raised when a schema or request names an attribute id with no extractor."""


class InsufficientDataError(LingLabError):
    """Raised when a statistic needs more samples than were provided."""


class NoRootError(LingLabError):
    """Raised when shape calibration cannot reach the target mass in its bracket."""


class TrainingDivergedError(LingLabError):
    """Raised when the training loss becomes non-finite."""


class ConfigError(LingLabError):
    """Raised for invalid or inconsistent run configuration."""
