# Exception hierarchy for the latwave laboratory.
# Every class carries the exit code the CLI returns when it escapes a run.


class LatwaveError(Exception):
    """Base class for all laboratory failures."""

    exit_code = 1


class ValidationError(LatwaveError, ValueError):
    """Invalid parameters or inputs outside an operation's domain."""

    exit_code = 2


class SingularPointError(ValidationError):
    """The massless dispersion relation was evaluated at the origin."""


class WindowError(ValidationError):
    """A lattice point lies outside the window, or a maximizer touches its edge."""


class FitWindowError(ValidationError):
    """A decay series is too short or does not span a decade."""


class InadmissibleIndicesError(ValidationError):
    """Strichartz exponents fail the admissibility condition."""


class DegenerateInputError(ValidationError):
    """Zero forms, empty supports and similar degenerate data."""


class CostGuardError(LatwaveError):
    """Refusal to start a computation above the configured cost budget."""

    exit_code = 3


class ConvergenceError(LatwaveError):
    """A quadrature error estimate stayed above tolerance."""


class StepSizeError(LatwaveError):
    """Step halving changed the solution by more than the tolerance."""


class ResolutionError(LatwaveError):
    """A scan lattice missed points that its structure predicts."""
