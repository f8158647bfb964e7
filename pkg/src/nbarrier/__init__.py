"""Nonlinear a priori bounds for traveling waves of reaction-diffusion systems."""

__version__ = "0.1.0"

from .barrier import BarrierConstruction, eval_pq, intercepts, membership, verify_inclusion
from .bounds import (
    BarrierLevels,
    BoundParams,
    diversity_index,
    linear_lv_bounds,
    lower_bound_equal_diffusion,
    lower_bound_value,
    lower_levels,
    upper_bound_product,
    upper_bound_sum,
    upper_levels,
)
from .hypotheses import HypothesisReport, check_h1, check_h2
from .model import (
    Equilibrium,
    HypothesisRegion,
    LV2Params,
    SystemSpec,
    eval_reaction,
    is_equilibrium,
    lv2_system,
)
from .solver import (
    SolveConfig,
    SolveError,
    WaveProfile,
    continuation,
    residual,
    solve_fixed_speed,
    solve_free_speed,
)
from .verify import (
    BoundCheckReport,
    check_linear_lv,
    check_lower_bound,
    check_upper_bounds,
    classify_profile,
)
