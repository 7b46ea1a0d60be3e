"""Monte Carlo and analytic tools for error propagation in noisy
entangle/uncompute circuits, with Max-Cut quality bounds and error budgets."""

from errprop.errors import ConfigurationError, DiagnosticError, ScopeError, ValidationError

__version__ = "0.1.0"

__all__ = [
    "ConfigurationError",
    "DiagnosticError",
    "ScopeError",
    "ValidationError",
    "__version__",
]
