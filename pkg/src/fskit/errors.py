"""Shared exception base for the toolkit."""


class FskitError(Exception):
    """Base class for all toolkit errors."""
