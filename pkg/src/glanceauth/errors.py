"""Exception types shared across the package."""


class GlanceAuthError(Exception):
    """Base class for all errors raised by this package."""


class ParseError(GlanceAuthError):
    """A malformed event-log line.

    Carries the 1-based line number and the offending field name when known.
    """

    def __init__(self, message, lineno=None, field=None):
        self.lineno = lineno
        self.field = field
        where = []
        if lineno is not None:
            where.append(f"line {lineno}")
        if field is not None:
            where.append(f"field '{field}'")
        if where:
            message = f"{message} ({', '.join(where)})"
        super().__init__(message)


class FeatureError(GlanceAuthError):
    """Feature extraction failed (empty series, zero time step, ...)."""


class TrainingError(GlanceAuthError):
    """Not enough or inconsistent training data."""


class ModelError(GlanceAuthError):
    """A trained model is corrupt or incomplete for the requested decision."""


class ConfigError(GlanceAuthError):
    """An evaluation or decision configuration cannot be satisfied."""


class StoreError(GlanceAuthError):
    """A persisted artifact could not be written or read."""


class IntegrityError(StoreError):
    """Checksum or structural validation failed on load."""


class VersionError(StoreError):
    """The file's format version is not the one this build writes."""
