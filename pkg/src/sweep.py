import logging
import re
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd

from src.decoding.window import stream_decode
from src.encoding.encoder import encode
from src.encoding.models import ThresholdParams
from src.kernels.models import CorrTable, KernelBank
from src.metrics.evaluation import evaluate
from src.sigio.synth import synth_signal
from src.sigio.wav import read_wav
from src.utils.validation import ConfigError

COLUMNS = ["snippet", "refractory", "C", "M", "w", "snr_db", "nyq_frac", "enc_ms", "dec_ms"]

_RULE = re.compile(r"^(fixed|inverse):([0-9]*\.?[0-9]+(?:[eE][-+]?[0-9]+)?)$")

# (nyquist fraction, SNR dB) reference operating point
HEADLINE_REFERENCE = (0.2, 20.0)
HEADLINE_TARGET_DB = 15.0
HEADLINE_MAX_FRACTION = 0.35


@dataclass(frozen=True)
class Snippet:
    name: str
    samples: np.ndarray
    fs: int


@dataclass(frozen=True)
class WindowRule:
    """`fixed:<w>` uses w for every cell; `inverse:<k>` uses round(k / delta)."""
    kind: str
    value: float
    w_min: int = 25
    w_max: int = 2048

    @classmethod
    def parse(cls, text: str, w_min: int = 25, w_max: int = 2048) -> "WindowRule":
        match = _RULE.match(text.strip())
        if not match:
            raise ConfigError(f"bad window rule {text!r}; expected fixed:<w> or inverse:<k>")
        value = float(match.group(2))
        if value <= 0:
            raise ConfigError(f"window rule value must be > 0, got {value}")
        return cls(match.group(1), value, int(w_min), int(w_max))

    def window_for(self, delta: float) -> int:
        if self.kind == "fixed":
            return max(1, int(round(self.value)))
        return int(np.clip(round(self.value / delta), self.w_min, self.w_max))


def load_snippets(wav_dir: str) -> List[Snippet]:
    """Every *.wav under wav_dir, sorted by name; unreadable files are logged and skipped."""
    logger = logging.getLogger("SPIKECODEC.Sweep")
    directory = Path(wav_dir)
    if not directory.is_dir():
        raise ConfigError(f"not a directory: {directory}")
    snippets = []
    for path in sorted(directory.glob("*.wav")):
        try:
            samples, fs = read_wav(str(path))
        except Exception as e:
            logger.error(f"Skipping {path.name}: {e}")
            continue
        snippets.append(Snippet(path.stem, samples, fs))
    logger.info(f"Loaded {len(snippets)} snippets from {directory}")
    return snippets


def synthetic_corpus(bank: KernelBank, count: int, seconds: float, components: int,
                     seed: int = 0) -> List[Snippet]:
    """In-span random snippets, one seed per snippet."""
    length = int(round(seconds * bank.fs))
    return [
        Snippet(f"synth_{i:02d}", synth_signal(bank, length, components, seed=seed + i), bank.fs)
        for i in range(count)
    ]


class Sweeper:
    """
    Runs encode -> windowed decode -> evaluate over (snippet, C, refractory) cells.

    Config keys (section `sweep`):
        window_rule, window_min, window_max, store_measured
    """

    def __init__(self, bank: KernelBank, table: CorrTable, C: Union[float, Sequence[float]], M: float,
                 config: Dict[str, Any] = None, decoder_config: Dict[str, Any] = None,
                 threads: int = 1, timing: bool = True, allow_large_window: bool = False,
                 window_rule: Optional[str] = None, store_measured: Optional[bool] = None):
        self.bank = bank
        self.table = table
        self.C_grid = [float(c) for c in np.atleast_1d(C)]
        self.M = float(M)
        self.config = config or {}
        self.decoder_config = decoder_config or {}
        self.threads = max(1, int(threads))
        self.timing = timing
        self.allow_large_window = allow_large_window
        self.store_measured = bool(self.config.get("store_measured", False) if store_measured is None else store_measured)
        self.rule = WindowRule.parse(
            window_rule or self.config.get("window_rule", "inverse:2.0"),
            w_min=int(self.config.get("window_min", 25)),
            w_max=int(self.config.get("window_max", 2048)),
        )
        self.logger = logging.getLogger("SPIKECODEC.Sweep")
        self.logger.info(
            f"Sweeper initialized: m={bank.m}, C={self.C_grid}, rule={self.rule.kind}:{self.rule.value:g}, "
            f"measured={self.store_measured}, threads={self.threads}"
        )

    def run_cell(self, snippet: Snippet, delta: float, C: Optional[float] = None) -> Dict[str, Any]:
        if snippet.fs != self.bank.fs:
            raise ConfigError(f"{snippet.name}: sample rate {snippet.fs} does not match bank fs {self.bank.fs}")
        peak = float(np.max(np.abs(snippet.samples))) if snippet.samples.size else 0.0
        signal = snippet.samples / peak if peak > 0 else snippet.samples

        C = self.C_grid[0] if C is None else float(C)
        params = ThresholdParams(C, self.M, float(delta))
        w = self.rule.window_for(delta)

        started = time.perf_counter()
        train = encode(signal, self.bank, params, store_measured=self.store_measured)
        enc_ms = (time.perf_counter() - started) * 1e3

        started = time.perf_counter()
        recon = stream_decode(train, self.bank, self.table, w, self.decoder_config,
                              allow_large=self.allow_large_window)
        dec_ms = (time.perf_counter() - started) * 1e3

        report = evaluate(signal, train, recon)
        return {
            "snippet": snippet.name,
            "refractory": float(delta),
            "C": C,
            "M": self.M,
            "w": w,
            "snr_db": report.snr_db if report.snr_defined else float("nan"),
            "nyq_frac": report.nyquist_fraction,
            "enc_ms": enc_ms if self.timing else 0.0,
            "dec_ms": dec_ms if self.timing else 0.0,
        }

    def _safe_cell(self, cell: Tuple[Snippet, float, float]) -> Optional[Dict[str, Any]]:
        snippet, C, delta = cell
        try:
            row = self.run_cell(snippet, delta, C)
            self.logger.info(
                f"Cell {snippet.name} C={C:g} delta={delta:g}: snr={row['snr_db']:.2f} dB, nyq={row['nyq_frac']:.4f}"
            )
            return row
        except Exception as e:
            self.logger.error(f"Cell {snippet.name} C={C:g} delta={delta:g} failed: {e}", exc_info=True)
            return None

    def run(self, snippets: Sequence[Snippet], refractory: Sequence[float]) -> pd.DataFrame:
        """One row per successful cell, sorted by snippet, then descending C and refractory."""
        cells = [(s, c, float(d)) for s in snippets for c in self.C_grid for d in refractory]
        self.logger.info(
            f"Starting sweep: {len(snippets)} snippets x {len(self.C_grid)} C x {len(refractory)} refractory values"
        )

        if self.threads > 1 and len(cells) > 1:
            with ThreadPoolExecutor(max_workers=self.threads) as pool:
                rows = list(pool.map(self._safe_cell, cells))
        else:
            rows = [self._safe_cell(c) for c in cells]

        ok = [r for r in rows if r is not None]
        failed = len(cells) - len(ok)
        if failed:
            self.logger.warning(f"Sweep finished with {failed} failed cells")
        df = pd.DataFrame(ok, columns=COLUMNS)
        return df.sort_values(["snippet", "C", "refractory"], ascending=[True, False, False],
                              kind="mergesort").reset_index(drop=True)


def write_csv(df: pd.DataFrame, path: str) -> None:
    p = Path(path)
    p.parent.mkdir(parents=True, exist_ok=True)
    df.to_csv(p, index=False, columns=COLUMNS, float_format="%.6f", na_rep="nan", lineterminator="\n")


def rate_trend(df: pd.DataFrame) -> pd.DataFrame:
    """Median nyquist fraction and SNR per (C, refractory), largest C and longest refractory first."""
    columns = ["C", "refractory", "median_nyq_frac", "median_snr_db", "cells"]
    if df.empty:
        return pd.DataFrame(columns=columns)
    grouped = df.groupby(["C", "refractory"])
    trend = pd.DataFrame({
        "median_nyq_frac": grouped["nyq_frac"].median(),
        "median_snr_db": grouped["snr_db"].median(),
        "cells": grouped.size(),
    }).reset_index()
    return trend[columns].sort_values(["C", "refractory"], ascending=[False, False],
                                      kind="mergesort").reset_index(drop=True)


def rate_rises(trend: pd.DataFrame) -> bool:
    """True when, for every C, the median rate is non-decreasing as the refractory period shrinks."""
    for _, group in trend.groupby("C"):
        values = group.sort_values("refractory", ascending=False)["median_nyq_frac"].to_numpy()
        if not np.all(np.diff(values) >= 0):
            return False
    return True


def headline_summary(df: pd.DataFrame, target_db: float = HEADLINE_TARGET_DB,
                     max_fraction: float = HEADLINE_MAX_FRACTION) -> Dict[str, Any]:
    """
    Best cell at or below max_fraction, the rank correlation of median SNR
    with median rate, and the median curve read at the reference rate.
    """
    trend = rate_trend(df)
    eligible = df[(df["nyq_frac"] <= max_fraction) & df["snr_db"].notna()]
    best = eligible.loc[eligible["snr_db"].idxmax()] if not eligible.empty else None

    curve = trend.dropna(subset=["median_snr_db"]).sort_values("median_nyq_frac", kind="mergesort")
    if len(curve) >= 2 and curve["median_nyq_frac"].nunique() > 1:
        spearman = float(curve["median_nyq_frac"].corr(curve["median_snr_db"], method="spearman"))
    else:
        spearman = float("nan")

    ref_frac, ref_db = HEADLINE_REFERENCE
    x = curve["median_nyq_frac"].to_numpy()
    at_ref = None
    if x.size and x[0] <= ref_frac <= x[-1]:
        at_ref = float(np.interp(ref_frac, x, curve["median_snr_db"].to_numpy()))

    return {
        "best_snr_db": float(best["snr_db"]) if best is not None else None,
        "best_nyq_frac": float(best["nyq_frac"]) if best is not None else None,
        "best_C": float(best["C"]) if best is not None else None,
        "best_refractory": float(best["refractory"]) if best is not None else None,
        "target_db": float(target_db),
        "max_fraction": float(max_fraction),
        "meets_target": bool(best is not None and best["snr_db"] >= target_db),
        "spearman": spearman if np.isfinite(spearman) else None,
        "trend_rises": bool(np.isfinite(spearman) and spearman > 0.0),
        "reference_nyq_frac": ref_frac,
        "reference_snr_db": ref_db,
        "snr_at_reference": at_ref,
        "curve": [(float(r.median_nyq_frac), float(r.median_snr_db)) for r in curve.itertuples(index=False)],
    }


def write_summary(df: pd.DataFrame, path: str) -> None:
    """
    Gnuplot data file: block 0 holds every cell sorted by rate, block 1 the
    per-(C, refractory) medians.
    """
    p = Path(path)
    p.parent.mkdir(parents=True, exist_ok=True)
    cells = df.sort_values(["nyq_frac", "snippet"], kind="mergesort")
    trend = rate_trend(df)
    ref_frac, ref_db = HEADLINE_REFERENCE
    lines = ["# snr vs nyquist fraction; plot 'file' index 0 using 1:2, '' index 1 using 3:4 with lines",
             f"# reference {ref_db:g} dB at nyquist fraction {ref_frac:g}",
             "# nyq_frac snr_db C refractory snippet"]
    for row in cells.itertuples(index=False):
        lines.append(f"{row.nyq_frac:.6f} {row.snr_db:.6f} {row.C:.6g} {row.refractory:.6f} {row.snippet}")
    lines += ["", "", "# C refractory median_nyq_frac median_snr_db cells"]
    for row in trend.itertuples(index=False):
        lines.append(f"{row.C:.6g} {row.refractory:.6f} {row.median_nyq_frac:.6f} {row.median_snr_db:.6f} {row.cells}")
    p.write_text("\n".join(lines) + "\n", encoding="utf-8")
