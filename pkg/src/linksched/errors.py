"""Exception hierarchy shared across the package."""


class LinkSchedError(Exception):
    """Base class for all errors raised by linksched."""


class InvalidInstanceError(LinkSchedError, ValueError):
    """Model parameters violate a documented invariant or have mismatched shapes."""


class InconsistentSolutionError(LinkSchedError):
    """An LP solution does not satisfy the normalization it must satisfy."""


class StructureViolationError(LinkSchedError):
    """No transmission probabilities in [0, 1] reproduce a given y matrix cell."""


class SimplexIterationError(LinkSchedError, RuntimeError):
    """The simplex method exceeded its iteration cap (a bug, not a model property)."""


class InfeasibleBudgetError(LinkSchedError):
    """The power budget is below the minimum average power any policy can achieve."""

    def __init__(self, p_max, min_power):
        self.p_max = p_max
        self.min_power = min_power
        super().__init__(
            f"power budget {p_max:.12g} W is below the minimum feasible "
            f"average power {min_power:.12g} W"
        )


class ProfileInfeasibleError(LinkSchedError):
    """A candidate threshold profile cannot meet the power budget."""


class WrongArityError(LinkSchedError, ValueError):
    """An operation defined for a fixed number of channel states got another."""
