"""Exception and warning types shared across the package."""

from __future__ import annotations


class DomainError(ValueError):
    """An argument lies outside the physical domain of an operation."""


class ConfigurationError(ValueError):
    """Invalid model or run configuration."""

    def __init__(self, message: str, field: str | None = None):
        self.field = field
        self.detail = message
        if field:
            message = f"{field}: {message}"
        super().__init__(message)


class ParseError(ConfigurationError):
    """Malformed optical data; ``row`` is the 1-based line number."""

    def __init__(self, message: str, row: int | None = None):
        self.row = row
        if row is not None:
            message = f"row {row}: {message}"
        super().__init__(message)


class ConvergenceError(RuntimeError):
    """A series or quadrature failed to reach its tolerance."""

    def __init__(self, message: str, **diagnostics):
        self.diagnostics = diagnostics
        if diagnostics:
            details = ", ".join(f"{k}={v!r}" for k, v in diagnostics.items())
            message = f"{message} ({details})"
        super().__init__(message)


class SearchError(RuntimeError):
    """A bracketing search could not find a valid bracket."""


class RoughnessValidityWarning(UserWarning):
    """Roughness amplitude is not small compared with the separation."""
