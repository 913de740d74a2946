from src.gram.system import GramSystem, assemble, gram_block
from src.gram.linalg import SolveReport, spd_solve, svd_solve, condition_estimate
from src.gram.projection import estimate_beta_past, estimate_beta_all
from src.gram.bounds import (
    ConditionBounds,
    condition_bounds,
    beta_d_bound,
    min_eigenvalue_floor,
    empirical_condition,
)
from src.gram.sine_chain import (
    SineChain,
    sine_chain,
    chebyshev_inverse,
    past_projection_sq,
    rest_projection_sq,
)

__all__ = [
    "GramSystem",
    "assemble",
    "gram_block",
    "SolveReport",
    "spd_solve",
    "svd_solve",
    "condition_estimate",
    "estimate_beta_past",
    "estimate_beta_all",
    "ConditionBounds",
    "condition_bounds",
    "beta_d_bound",
    "min_eigenvalue_floor",
    "empirical_condition",
    "SineChain",
    "sine_chain",
    "chebyshev_inverse",
    "past_projection_sq",
    "rest_projection_sq",
]
