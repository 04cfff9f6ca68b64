"""Exception taxonomy shared across the package.

The split mirrors how callers need to react: a bad configuration is the
user's problem, an infeasible design is a property of the requested bound,
and a numerical failure means a solver could not deliver its accuracy
contract.
"""


class ConfigError(ValueError):
    """A run configuration document is malformed or inconsistent."""


class InfeasibleError(RuntimeError):
    """The requested covariance floor cannot be certified by the feasible set."""


class NumericalError(RuntimeError):
    """A solver diverged, stalled, or produced a result outside its accuracy contract."""
