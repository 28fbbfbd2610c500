"""Exception types raised across the library."""


class NetprotectError(Exception):
    """Base class for all library errors."""


class ValidationError(NetprotectError):
    """A structural invariant is violated (unknown id, bad table shape, ...)."""


class IncompleteScenarioError(ValidationError):
    """A scenario is missing an assignment for some stochastic edge."""


class EnumerationCapError(NetprotectError):
    """Exact enumeration was requested above the configured variable cap."""


class PositivityError(NetprotectError):
    """A factor table contains a zero entry where strict positivity is required."""

    def __init__(self, message, factor_index=None):
        super().__init__(message)
        self.factor_index = factor_index


class NonErgodicError(NetprotectError):
    """Both conditional densities of a variable are zero in the current state."""


class SamplingFailureError(NetprotectError):
    """The constrained sampler exhausted its retry budget without accepting."""


class BoundViolationError(NetprotectError):
    """A density was observed below the slice system's stated lower bound."""


class SearchBudgetError(NetprotectError):
    """The parity search exceeded its node or size budget; result indeterminate."""


class InfeasiblePolicyError(NetprotectError):
    """A policy exceeds the budget where feasibility is a precondition."""


class SolveCapError(NetprotectError):
    """The exact solver was invoked above its action-count or node cap."""


class GenerationError(NetprotectError):
    """Instance generation failed after exhausting its retry budget."""
