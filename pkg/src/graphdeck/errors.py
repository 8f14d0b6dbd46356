"""Exception types shared across the package."""


class GraphDeckError(Exception):
    """Base class for all graphdeck errors."""


class StoreFormatError(GraphDeckError):
    """Store file is not readable: bad magic, version, checksum, truncation."""


class DataError(GraphDeckError):
    """Input data is malformed (bad edge-list line, length mismatch, ...)."""


class UnknownFeatureError(GraphDeckError):
    """No sidecar exists for the requested feature name."""
