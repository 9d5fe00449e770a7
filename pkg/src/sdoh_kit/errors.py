"""Exception types shared across the toolkit."""


class SdohKitError(Exception):
    """Base class for every error raised by the toolkit."""


class InvalidInput(SdohKitError):
    """An operation received data that violates its preconditions."""


class KeyMismatch(SdohKitError):
    """Two corpora that must share the same document ids do not."""
