"""Matching-based approximation algorithms for Nash social welfare with indivisible items."""

from .baselines import naive_repeated_matching, single_matching_fill
from .constagents import (
    ConvexDecomposition,
    FractionalAssignment,
    GridSearchConfig,
    const_agents_solve,
    decompose,
    multilinear_estimate,
    swap_round,
)
from .core import (
    Allocation,
    AllocationError,
    Instance,
    InstanceError,
    keepaside_value,
    log_nsw,
    nsw,
    rank_items,
    validate_instance,
    welfare,
)
from .exact import OracleLimitError, exact_opt, feasible, is_pareto_optimal
from .fairness import check_fairness, is_ef1, is_strong_ef1
from .instances import generate, load, save
from .matching import SENTINEL, Matching, Mode, WeightMatrix, build_weights, max_weight_matching
from .reprematch import PhaseLedger, phase_bound, reprematch, reprematch_ledger
from .smatch import IncompatibleValuationError, smatch, smatch_trace
from .valuations import (
    SPLC,
    XOS,
    Additive,
    BudgetAdditive,
    Coverage,
    RestrictedAdditive,
    SubadditiveHalves,
    check_submodular,
)

__version__ = "0.1.0"

__all__ = [
    "Additive",
    "Allocation",
    "AllocationError",
    "BudgetAdditive",
    "ConvexDecomposition",
    "Coverage",
    "FractionalAssignment",
    "GridSearchConfig",
    "IncompatibleValuationError",
    "Instance",
    "InstanceError",
    "Matching",
    "Mode",
    "OracleLimitError",
    "PhaseLedger",
    "RestrictedAdditive",
    "SENTINEL",
    "SPLC",
    "SubadditiveHalves",
    "WeightMatrix",
    "XOS",
    "build_weights",
    "check_fairness",
    "check_submodular",
    "const_agents_solve",
    "decompose",
    "exact_opt",
    "feasible",
    "generate",
    "is_ef1",
    "is_pareto_optimal",
    "is_strong_ef1",
    "keepaside_value",
    "load",
    "log_nsw",
    "max_weight_matching",
    "multilinear_estimate",
    "naive_repeated_matching",
    "nsw",
    "phase_bound",
    "rank_items",
    "reprematch",
    "reprematch_ledger",
    "save",
    "single_matching_fill",
    "smatch",
    "smatch_trace",
    "swap_round",
    "validate_instance",
    "welfare",
]
