"""Shared exception base so the CLI and service can map failures to exit codes."""


class MeshLensError(Exception):
    """Base class for all domain errors raised by this package."""
