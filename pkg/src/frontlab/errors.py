"""Exception types shared across the package."""


class FrontlabError(Exception):
    """Base class for all package-specific failures."""


class ConfigError(FrontlabError):
    """Raised when a run configuration cannot be parsed or validated.

    Carries enough context (file line, dotted field path) for the message
    to point at the offending entry.
    """


class RegimeError(FrontlabError):
    """Raised when inputs fall outside the parameter regime a routine supports."""


class SolverFailure(FrontlabError):
    """Raised when a time-stepping run violates a runtime invariant.

    Covers stability-bound violations, field values below the negativity
    floor, and non-monotone front positions.  The solver aborts rather
    than silently repairing the state.
    """


class ConvergenceError(FrontlabError):
    """Raised when an iterative eigenvalue computation exhausts its budget."""


class InconclusiveError(FrontlabError):
    """Raised when a threshold scan finds no decisive verdict at any scale."""
