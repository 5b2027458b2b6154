"""Delay-optimal probabilistic transmission scheduling for a single wireless
link with Bernoulli arrivals, an i.i.d. block-fading channel and an average
power budget."""

from .errors import (
    InconsistentSolutionError,
    InfeasibleBudgetError,
    InvalidInstanceError,
    LinkSchedError,
    ProfileInfeasibleError,
    SimplexIterationError,
    StructureViolationError,
    WrongArityError,
)
from .lp import LpProblem, LpSolution, build_lp, min_feasible_power, recover_pi, recover_policy, solve_lp
from .model import (
    BirthDeathRates,
    ChannelModel,
    Metrics,
    Policy,
    SteadyState,
    SystemInstance,
    TrafficModel,
    average_delay,
    average_power,
    derive_rates,
    evaluate_policy,
    packet_loss,
    power_threshold,
    steady_state,
)
from .simulate import SimConfig, SimReport, empirical_distribution, simulate
from .threshold import (
    ClosedFormTables,
    ThresholdProfile,
    ThresholdSearch,
    ThresholdSolution,
    solve,
    two_state_threshold,
)

__all__ = [
    "average_delay",
    "average_power",
    "BirthDeathRates",
    "build_lp",
    "ChannelModel",
    "ClosedFormTables",
    "derive_rates",
    "empirical_distribution",
    "evaluate_policy",
    "InconsistentSolutionError",
    "InfeasibleBudgetError",
    "InvalidInstanceError",
    "LinkSchedError",
    "LpProblem",
    "LpSolution",
    "Metrics",
    "min_feasible_power",
    "packet_loss",
    "Policy",
    "power_threshold",
    "ProfileInfeasibleError",
    "recover_pi",
    "recover_policy",
    "SimConfig",
    "SimplexIterationError",
    "SimReport",
    "simulate",
    "solve",
    "solve_lp",
    "steady_state",
    "SteadyState",
    "StructureViolationError",
    "SystemInstance",
    "ThresholdProfile",
    "ThresholdSearch",
    "ThresholdSolution",
    "TrafficModel",
    "two_state_threshold",
    "WrongArityError",
]

__version__ = "0.1.0"
