"""Exception hierarchy shared by all modules.

The CLI maps these onto process exit codes: parameter/regime problems
exit with 2, resource guards with 3, numerical failures with 4.
"""


class PtasepError(Exception):
    """Base class for all errors raised by this package."""


class ParameterError(PtasepError, ValueError):
    """Invalid argument values (wrong ranges, parity violations, ...)."""


class RegimeError(PtasepError):
    """Parameters outside the regime where a formula is valid."""


class ResourceError(PtasepError):
    """A size guard refused the computation."""


class NumericalError(PtasepError):
    """A numerical procedure failed to converge or lost accuracy."""


class PoleError(NumericalError):
    """A quadrature node landed on (or too close to) a pole or zero."""


class ConditioningError(NumericalError):
    """A determinant ratio was too ill-conditioned even after fallback."""


class BranchCutError(NumericalError):
    """A square-root factor landed exactly on the principal branch cut."""
