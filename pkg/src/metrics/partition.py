"""
Overlap partition of a spike train and the windowing error it explains.

Working back from the final spike, each group holds the earlier spikes whose
support reaches into the previous group's support. Groups overlap only with
their neighbours, and their size is capped by the ahp parameters.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Tuple

import numpy as np

from src.encoding.models import SpikeTrain, ThresholdParams
from src.gram.linalg import svd_solve
from src.gram.system import assemble
from src.kernels.models import CorrTable, KernelBank

logger = logging.getLogger("SPIKECODEC.Metrics")


@dataclass
class Partition:
    """
    groups[0] is the final spike; groups[i] = (start, stop) index ranges in
    descending time order.
    """
    groups: List[Tuple[int, int]]
    d_max: int
    bound: Optional[int] = None
    restarts: int = 0
    violations: List[str] = field(default_factory=list)

    @property
    def within_bound(self) -> bool:
        return self.bound is None or self.d_max <= self.bound

    @property
    def valid(self) -> bool:
        return not self.violations and self.within_bound

    def sizes(self) -> List[int]:
        return [stop - start for start, stop in self.groups]

    def to_dict(self) -> Dict[str, Any]:
        return {
            "groups": len(self.groups),
            "d_max": self.d_max,
            "bound": self.bound,
            "restarts": self.restarts,
            "violations": list(self.violations),
        }


def group_size_bound(m: int, max_support: int, params: ThresholdParams, fs: int) -> int:
    """m * (floor(2 * support / delta) + 1): spikes per kernel inside one support span."""
    delta_s = params.delta_samples(fs)
    return int(m * (math.floor(2.0 * max_support / delta_s) + 1))


def _supports(spikes: SpikeTrain, bank: KernelBank) -> Tuple[np.ndarray, np.ndarray]:
    lengths = bank.supports[spikes.kernel_ids]
    return spikes.times - lengths + 1, spikes.times


def _check_groups(groups: List[Tuple[int, int]], starts: np.ndarray, ends: np.ndarray, n: int) -> List[str]:
    problems = []
    covered = np.zeros(n, dtype=np.int64)
    for start, stop in groups:
        covered[start:stop] += 1
    if np.any(covered != 1):
        problems.append("groups do not cover every spike exactly once")

    # group g (later in time) against groups g+2.. (earlier)
    for g, (start, stop) in enumerate(groups):
        if g + 2 >= len(groups):
            break
        earliest_start = int(starts[start:stop].min())
        far_lo = groups[-1][0]
        far_hi = groups[g + 2][1]
        if far_hi > far_lo and int(ends[far_lo:far_hi].max()) >= earliest_start:
            problems.append(f"group {g} overlaps a non-adjacent earlier group")
    return problems


def partition_overlap(spikes: SpikeTrain, bank: KernelBank,
                      params: Optional[ThresholdParams] = None) -> Partition:
    """
    Chain partition of a sorted train, built backwards from its final spike.

    A gap with no overlapping earlier spike restarts the chain at the latest
    remaining spike.
    """
    n = len(spikes)
    params = params or spikes.params
    bound = group_size_bound(bank.m, bank.max_support, params, bank.fs) if params else None
    if n == 0:
        return Partition(groups=[], d_max=0, bound=bound)

    starts, ends = _supports(spikes, bank)
    groups: List[Tuple[int, int]] = [(n - 1, n)]
    restarts = 0
    remaining = n - 1
    while remaining > 0:
        prev_start, prev_stop = groups[-1]
        reach = int(starts[prev_start:prev_stop].min())
        # ends are sorted: earlier spikes overlapping the previous group form a suffix
        first = int(np.searchsorted(ends[:remaining], reach, side="left"))
        if first == remaining:
            first = remaining - 1
            restarts += 1
        groups.append((first, remaining))
        remaining = first

    sizes = [stop - start for start, stop in groups[1:]] or [0]
    partition = Partition(
        groups=groups,
        d_max=max(sizes),
        bound=bound,
        restarts=restarts,
        violations=_check_groups(groups, starts, ends, n),
    )
    if not partition.within_bound:
        logger.warning(f"Partition group of {partition.d_max} spikes exceeds bound {bound}")
    return partition


def complement_errors(spikes: SpikeTrain, table: CorrTable, partition: Partition,
                      rcond: float = 1e-10) -> np.ndarray:
    """
    ||phi_perp_k - phi_perp|| for the final spike, where phi_perp_k is its
    orthogonal complement against the first k groups and phi_perp against all
    earlier spikes. Non-increasing in k, zero once every group is included.
    """
    n = len(spikes)
    if n < 2:
        return np.zeros(0)
    P = assemble(spikes, table).P
    target = n - 1
    full_idx = np.arange(target)
    c_full, _ = svd_solve(P[np.ix_(full_idx, full_idx)], P[full_idx, target], rcond)

    errors = []
    for k in range(1, len(partition.groups)):
        first = partition.groups[k][0]
        idx = np.arange(first, target)
        c_k, _ = svd_solve(P[np.ix_(idx, idx)], P[idx, target], rcond)
        diff = c_full.copy()
        diff[first:] -= c_k
        errors.append(math.sqrt(max(0.0, float(diff @ P[np.ix_(full_idx, full_idx)] @ diff))))
    return np.asarray(errors)
