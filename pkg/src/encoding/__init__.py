from src.encoding.models import ThresholdParams, Spike, SpikeTrain
from src.encoding.encoder import SpikeEncoder, convolve, threshold_at, replay_thresholds, encode

__all__ = [
    "ThresholdParams",
    "Spike",
    "SpikeTrain",
    "SpikeEncoder",
    "convolve",
    "threshold_at",
    "replay_thresholds",
    "encode",
]
