from src.metrics.evaluation import (
    EvalReport,
    snr,
    approx_error_bound,
    max_spike_count,
    per_kernel_min_isi,
    overlap_similarity,
    evaluate,
)
from src.metrics.partition import Partition, partition_overlap, group_size_bound, complement_errors

__all__ = [
    "EvalReport",
    "snr",
    "approx_error_bound",
    "max_spike_count",
    "per_kernel_min_isi",
    "overlap_similarity",
    "evaluate",
    "Partition",
    "partition_overlap",
    "group_size_bound",
    "complement_errors",
]
