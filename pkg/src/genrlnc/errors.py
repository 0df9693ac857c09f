"""Shared exception types."""


class NotDecodableError(RuntimeError):
    """A generation was asked to decode before reaching full rank."""


class ResourceLimitError(RuntimeError):
    """A configured work cap (chain count, Markov state space) would be exceeded."""
