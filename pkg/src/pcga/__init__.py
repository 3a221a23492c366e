"""(mu+lambda) genetic algorithms with crossover probability p_c, a
25-problem pseudo-Boolean benchmark suite, and ERT analytics."""

__version__ = "0.1.0"

from .analytics import (  # noqa: E402
    ErtTable,
    RunLog,
    best_pc,
    compute_ert,
    curve_gradient,
    fixed_target_curve,
    normalize_ert,
    relative_ert,
    select_targets,
)
from .core import Budget, BudgetExhausted, ConfigurationError, InvalidDimensionError, Problem, bitstring  # noqa: E402
from .engine import GaConfig, RunResult, run_ga  # noqa: E402
from .problems import make_problem  # noqa: E402
from .rng import RngStream, derive_seed  # noqa: E402
from .variation import CrossoverOperator, MutationOperator, crossover, mutate  # noqa: E402

__all__ = [
    "Budget",
    "BudgetExhausted",
    "ConfigurationError",
    "CrossoverOperator",
    "ErtTable",
    "GaConfig",
    "InvalidDimensionError",
    "MutationOperator",
    "Problem",
    "RngStream",
    "RunLog",
    "RunResult",
    "best_pc",
    "bitstring",
    "compute_ert",
    "crossover",
    "curve_gradient",
    "derive_seed",
    "fixed_target_curve",
    "make_problem",
    "mutate",
    "normalize_ert",
    "relative_ert",
    "run_ga",
    "select_targets",
]
