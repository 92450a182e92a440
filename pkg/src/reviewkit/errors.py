"""Domain errors shared across modules."""


class ReviewKitError(Exception):
    """Base class for all domain errors."""


class CatalogMiss(ReviewKitError, LookupError):
    """No catalog topics for a product type; caller may use a fallback."""


class NotFound(ReviewKitError, LookupError):
    """Referenced entity (product type, session) does not exist."""


class BackendError(ReviewKitError, RuntimeError):
    """Generation backend unreachable or returned a transport-level failure."""


class EmptyResponse(BackendError):
    """Backend answered with an empty body."""


class FormatError(ReviewKitError, ValueError):
    """Backend response contained no parseable topic/phrase pairs."""


class SessionStateError(ReviewKitError, RuntimeError):
    """Operation not legal in the session's current state."""
