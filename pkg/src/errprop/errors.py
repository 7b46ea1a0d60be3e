"""Exception hierarchy.

Everything except :class:`DiagnosticError` is a caller mistake and maps to
CLI exit code 2; solver diagnostics map to exit code 3.
"""


class ValidationError(ValueError):
    """Input failed a structural check (bad Kraus set, malformed graph file)."""


class ConfigurationError(ValidationError):
    """Inconsistent simulation parameters, e.g. odd depth or invalid qubit count."""


class ScopeError(ValidationError):
    """Input lies outside the range where an operation is defined."""


class DiagnosticError(RuntimeError):
    """A solver could not produce an answer (unreachable target, no crossing)."""
