class WSPTMError(Exception):
    """Base class for errors raised by this package."""


class InputError(WSPTMError, ValueError):
    """Malformed or unusable corpus, seed or config input."""


class CheckpointError(WSPTMError):
    """A checkpoint could not be read or does not match the corpus."""
