"""Exception taxonomy shared by all modules.

Domain/usage problems subclass ValueError, numerical-stage failures
subclass RuntimeError; the CLI maps the two branches onto exit codes
2 and 3 respectively.
"""


class DomainError(ValueError):
    """Argument outside the contractual domain (|z| >= 1, q outside (0,1/3), ...)."""


class SingularityError(RuntimeError):
    """Evaluation hit a pole or a vanishing derivative."""


class TruncationError(RuntimeError):
    """Series truncation certificate failed (doubling the order moved values)."""


class IntegrationError(RuntimeError):
    """ODE integration failed; carries the last good state when available."""

    def __init__(self, message, last_state=None):
        super().__init__(message)
        self.last_state = last_state


class HorizonError(RuntimeError):
    """Chain limit did not satisfy the Cauchy certificate at the horizon."""

    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = diagnostics


class ExtensionError(RuntimeError):
    """Quasiconformal extension not evaluable (degenerate denominator etc.)."""


class BeckerViolationError(ExtensionError):
    """The driving term left the Herglotz half-plane disk; input outside regime."""


class FitError(RuntimeError):
    """Exterior-map fit did not converge; suggests refinement/continuation."""


class InvalidMapError(RuntimeError):
    """A fitted map violates its own invariants (non-monotone correspondence...)."""


class PositivityError(RuntimeError):
    """Re p lost positivity on the boundary grid."""


class InversionError(RuntimeError):
    """Newton inversion of a plane map failed to converge."""


class ConstructionError(RuntimeError):
    """A construction stage aborted; `stage` names the failing step."""

    def __init__(self, message, stage=""):
        super().__init__(message)
        self.stage = stage


class ConfigError(ValueError):
    """Malformed run configuration."""
