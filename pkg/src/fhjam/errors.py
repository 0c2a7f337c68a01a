"""Exception types shared across the package."""


class ContractViolation(ValueError):
    """An argument or state violates a documented precondition or invariant."""


class InfeasibleError(RuntimeError):
    """A requested quantity is undefined for the given parameters.

    Raised e.g. when the jammer cannot cover all waterfilling-active bands
    (J smaller than the active set), or when a mimicking attack would exceed
    the jammer power budget.
    """


class ConfigError(ValueError):
    """Experiment configuration could not be parsed or validated."""


class PlotDataError(ValueError):
    """Input CSV does not have the columns required for the requested plot."""
