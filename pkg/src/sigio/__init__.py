from src.sigio.wav import read_wav, write_wav
from src.sigio.spike_file import write_spikes, read_spikes, expected_size
from src.sigio.synth import (
    SynthSpec,
    synth_in_span,
    forced_spike_train,
    synth_random_spec,
    synth_signal,
)

__all__ = [
    "read_wav",
    "write_wav",
    "write_spikes",
    "read_spikes",
    "expected_size",
    "SynthSpec",
    "synth_in_span",
    "forced_spike_train",
    "synth_random_spec",
    "synth_signal",
]
