"""Exception hierarchy shared by the whole toolkit.

The CLI maps these onto process exit codes, so library code should raise
the most specific class that applies:

* ConfigError        -- bad user input (scenario files, CLI arguments)
* NumericalError     -- a solver failed or produced an untrustworthy result
* ModelValidityError -- inputs are formally valid but outside the regime
                        where the physical model can be trusted
"""


class ToolkitError(Exception):
    """Base class for all errors raised by this package."""


class ConfigError(ToolkitError):
    """Invalid configuration input (unknown key, bad value, missing entry)."""


class NumericalError(ToolkitError):
    """Numerical failure: non-convergence, degeneracy, loss of precision."""


class ModelValidityError(ToolkitError):
    """Parameters violate the assumptions the physical model is built on."""
