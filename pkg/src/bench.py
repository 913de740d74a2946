"""
Encode and windowed-decode timing across signal lengths.
"""

import logging
import math
import time
from dataclasses import dataclass, field
from typing import Any, Dict, List, Sequence

import numpy as np
import pandas as pd

from src.decoding.window import stream_decode
from src.encoding.encoder import encode
from src.encoding.models import ThresholdParams
from src.kernels.models import CorrTable, KernelBank
from src.sigio.synth import synth_signal

logger = logging.getLogger("SPIKECODEC.Bench")

MAX_DOUBLING_RATIO = 2.5
DENSE_FACTOR = 4  # windows of spikes the shorter train must hold
COMPONENTS_PER_SECOND = 100


@dataclass
class BenchReport:
    table: pd.DataFrame
    ratios: List[Dict[str, Any]] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(r["passed"] for r in self.ratios)

    def render(self) -> str:
        lines = [self.table.to_string(index=False, float_format=lambda v: f"{v:.3f}")]
        for r in self.ratios:
            dense = "" if r.get("dense", True) else " sparse"
            lines.append(
                f"scaling {r['from_s']:g}s->{r['to_s']:g}s dec_ratio={r['dec_ratio']:.3f} "
                f"limit={r['limit']:.3f}{dense} {'PASS' if r['passed'] else 'FAIL'}"
            )
        return "\n".join(lines)


def bench_params(bank: KernelBank) -> ThresholdParams:
    tau_max = bank.max_support / bank.fs
    return ThresholdParams(C=0.002, M=2.5 * math.sqrt(tau_max), delta=0.004)


def _mean_ms(fn, repeats: int) -> float:
    elapsed = []
    for _ in range(repeats):
        started = time.perf_counter()
        fn()
        elapsed.append((time.perf_counter() - started) * 1e3)
    return float(np.mean(elapsed))


def run_bench(bank: KernelBank, table: CorrTable, lengths: Sequence[float], window: int,
              repeats: int = 5, seed: int = 0, decoder_config: Dict[str, Any] = None) -> BenchReport:
    """
    Average encode and decode wall-clock per length. Every length tiles the
    same base segment, so spike counts grow with length. A length that doubles
    its predecessor must not more than MAX_DOUBLING_RATIO its decode time
    (scaled linearly for other ratios), and the shorter train must hold at
    least DENSE_FACTOR windows of spikes for the ratio to count.
    """
    params = bench_params(bank)
    shortest = min(lengths)
    base_len = max(1, int(round(shortest * bank.fs)))
    base = synth_signal(bank, base_len, max(1, int(COMPONENTS_PER_SECOND * shortest)), seed=seed)

    rows = []
    for seconds in lengths:
        n = int(round(seconds * bank.fs))
        signal = np.resize(base, n)
        train = encode(signal, bank, params)
        enc_ms = _mean_ms(lambda: encode(signal, bank, params), repeats)
        dec_ms = _mean_ms(lambda: stream_decode(train, bank, table, window, decoder_config), repeats)
        rows.append({
            "seconds": float(seconds),
            "samples": n,
            "spikes": len(train),
            "enc_ms": enc_ms,
            "dec_ms": dec_ms,
            "dec_us_per_spike": 1e3 * dec_ms / max(len(train), 1),
        })
        logger.info(f"Bench {seconds:g}s: {len(train)} spikes, enc {enc_ms:.1f} ms, dec {dec_ms:.1f} ms")

    df = pd.DataFrame(rows, columns=["seconds", "samples", "spikes", "enc_ms", "dec_ms", "dec_us_per_spike"])
    ratios = []
    for prev, cur in zip(rows, rows[1:]):
        growth = cur["seconds"] / prev["seconds"]
        limit = MAX_DOUBLING_RATIO * growth / 2.0
        ratio = cur["dec_ms"] / prev["dec_ms"] if prev["dec_ms"] > 0 else math.inf
        dense = prev["spikes"] >= DENSE_FACTOR * window
        if not dense:
            logger.warning(f"Bench {prev['seconds']:g}s holds {prev['spikes']} spikes for window {window}; "
                           f"scaling ratio not meaningful")
        ratios.append({
            "from_s": prev["seconds"], "to_s": cur["seconds"],
            "spikes_from": prev["spikes"], "spikes_to": cur["spikes"],
            "dec_ratio": ratio, "limit": limit, "dense": dense,
            "passed": bool(dense and ratio <= limit),
        })
    return BenchReport(table=df, ratios=ratios)
