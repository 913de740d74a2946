"""
Condition-number and projection bounds for spike Gram matrices.

For k spikes whose projections onto their predecessors have norm at most beta:
    (1 - beta^2)^(1-k)  <=  sup cond(P_k)  <=  (1 + (k-1) beta) ((1 - beta^2) / 2)^(1-k)
Bounds are evaluated in log10 and only materialized when representable.
"""

import math
from dataclasses import dataclass
from typing import Any, Dict

import numpy as np

from src.utils.validation import DomainError

MAX_LOG10 = 300.0


def _from_log10(value: float) -> float:
    return 10.0 ** value if value < MAX_LOG10 else float("inf")


@dataclass(frozen=True)
class ConditionBounds:
    k: int
    beta: float
    lower: float
    upper: float
    log10_lower: float
    log10_upper: float

    def contains(self, kappa: float, rtol: float = 1e-9) -> bool:
        """True when kappa <= upper (the per-instance guarantee)."""
        if not math.isfinite(self.upper):
            return True
        return kappa <= self.upper * (1.0 + rtol)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "k": self.k,
            "beta": self.beta,
            "lower": self.lower,
            "upper": self.upper,
            "log10_lower": self.log10_lower,
            "log10_upper": self.log10_upper,
        }


def _check_beta(beta: float) -> None:
    if not (0.0 <= beta < 1.0):
        raise DomainError(f"beta must lie in [0, 1), got {beta}")


def condition_bounds(k: int, beta: float) -> ConditionBounds:
    """Lower and upper envelopes of the worst-case condition number of k spikes."""
    _check_beta(beta)
    if k < 1:
        raise DomainError(f"k must be >= 1, got {k}")

    one_minus = 1.0 - beta * beta
    log10_lower = -(k - 1) * math.log10(one_minus)
    log10_upper = math.log10(1.0 + (k - 1) * beta) - (k - 1) * math.log10(one_minus / 2.0)
    return ConditionBounds(
        k=k,
        beta=beta,
        lower=_from_log10(log10_lower),
        upper=_from_log10(log10_upper),
        log10_lower=log10_lower,
        log10_upper=log10_upper,
    )


def min_eigenvalue_floor(k: int, beta: float) -> float:
    """
    Smallest eigenvalue any k-spike Gram can reach under the beta constraint.

    Recurrence L_1 = 1, L_k = (1 + L)/2 - sqrt(((1 - L)/2)^2 + beta^2 L).
    """
    _check_beta(beta)
    if k < 1:
        raise DomainError(f"k must be >= 1, got {k}")
    floor = 1.0
    for _ in range(k - 1):
        floor = (1.0 + floor) / 2.0 - math.sqrt(((1.0 - floor) / 2.0) ** 2 + beta * beta * floor)
    return floor


def beta_d_bound(beta: float, d: int) -> float:
    """
    Upper bound on the squared projection norm of a unit vector from a
    d-spike group onto its neighbours: (1 + (1 - beta^2) / (d^2 beta^2))^-1.
    """
    _check_beta(beta)
    if d < 1:
        raise DomainError(f"d must be >= 1, got {d}")
    if beta == 0.0:
        return 0.0
    return 1.0 / (1.0 + (1.0 - beta * beta) / (d * d * beta * beta))


def empirical_condition(P: np.ndarray) -> float:
    """lambda_max / lambda_min of a symmetric matrix; inf when singular."""
    eig = np.linalg.eigvalsh(P)
    if eig[0] <= 0.0:
        return float("inf")
    return float(eig[-1] / eig[0])
