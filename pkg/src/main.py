"""
spikecodec command line.

    python src/main.py encode   <in.wav> <out.spk> [--bank F] [--C c --M m --delta s] [--store-measured]
    python src/main.py decode   <in.spk> <out.wav> [--bank F] [--window w | --batch] [--trace F] [--reference ref.wav]
    python src/main.py evaluate <ref.wav> <est.wav> [--spikes in.spk]
    python src/main.py sweep    (<wav-dir> | --synthetic) --out out.csv [--refractory 0.1,0.05] [--C 0.01,0.001] [--window-rule inverse:2] [--store-measured]
    python src/main.py synth    <out.wav> [--components K] [--seconds s] [--seed n]
    python src/main.py validate [--seed n] [--only sine-chain]
    python src/main.py bench    [--lengths 1,2] [--window w]

Exit codes: 0 ok, 1 usage or configuration, 2 file format / missing file /
bank mismatch, 3 numeric failure or failed validation.
"""

import sys
import os

# Add project root to path
sys.path.append(os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

import argparse
import json
import time
from typing import Any, Dict, List, Optional

import numpy as np
from pydantic import ValidationError

from src.utils.logger import TraceWriter, setup_logger
from src.utils.config_loader import load_config, resolve_threads
from src.utils.run_config import RunConfig
from src.utils.validation import NumericError, describe_exit


class _Parser(argparse.ArgumentParser):
    """Usage errors exit with 1."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _floats(text: str) -> List[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError as e:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from e


def _emit(report: Dict[str, Any]) -> None:
    print(json.dumps(report, sort_keys=True))


def _bank(run_bank: Optional[str], config: Dict[str, Any], fs: int, section: Dict[str, Any] = None):
    from src.kernels.bank import default_bank, load_bank_spec

    kernels = dict(config.get("kernels", {}))
    kernels.update(section or {})
    if run_bank:
        return load_bank_spec(run_bank, fs, trunc_rel=float(kernels.get("trunc_rel", 1e-4)))
    return default_bank(kernels, fs=fs)


def run_encode(args: argparse.Namespace, config: Dict[str, Any]) -> int:
    """Normalize a WAV to peak 1, encode it and write the spike file."""
    from src.encoding.encoder import SpikeEncoder
    from src.sigio.spike_file import write_spikes
    from src.sigio.wav import read_wav

    run = RunConfig.from_sources(
        config, bank=args.bank, input=args.input, output=args.output,
        C=args.C, M=args.M, delta=args.delta, store_measured=args.store_measured,
    )
    samples, fs = read_wav(run.input)
    bank = _bank(run.bank, config, fs)

    peak = float(np.max(np.abs(samples))) if samples.size else 0.0
    gain = peak if peak > 0 else 1.0

    encoder_config = dict(config.get("encoder", {}))
    encoder_config["store_measured"] = run.store_measured
    started = time.perf_counter()
    train = SpikeEncoder(bank, run.params, encoder_config, threads=resolve_threads(config)).encode(samples / gain)
    runtime_ms = (time.perf_counter() - started) * 1e3
    train.gain = gain

    size = write_spikes(run.output, train, run.params)
    rate = len(train) / train.duration if train.duration > 0 else 0.0
    _emit({
        "spike_count": len(train),
        "spikes_per_second": rate,
        "nyquist_fraction": rate / fs,
        "runtime_ms": runtime_ms,
        "bank_hash": bank.hash_hex(),
        "bytes": size,
        "gain": gain,
    })
    return 0


def run_decode(args: argparse.Namespace, config: Dict[str, Any]) -> int:
    """Decode a spike file (windowed by default) and write the WAV."""
    from src.decoding.batch import BatchDecoder
    from src.decoding.window import stream_decode
    from src.kernels.bank import cross_corr_table
    from src.metrics.evaluation import snr
    from src.sigio.spike_file import read_spikes
    from src.sigio.wav import read_wav, write_wav

    run = RunConfig.from_sources(
        config, bank=args.bank, input=args.input, output=args.output, window=args.window,
        batch=args.batch, allow_large_window=args.allow_large_window, trace=args.trace,
    )
    train = read_spikes(run.input)
    bank = _bank(run.bank, config, train.fs)
    bank.check_hash(train.bank_hash, context=run.input)
    table = cross_corr_table(bank, threads=resolve_threads(config))
    decoder_config = config.get("decoder", {})

    if run.batch:
        recon = BatchDecoder(bank, table, decoder_config).decode(train)
    else:
        stream = None
        if run.trace == "-":
            stream = sys.stderr
        elif run.trace:
            stream = open(run.trace, "w", encoding="utf-8")
        try:
            recon = stream_decode(train, bank, table, run.window, decoder_config,
                                  allow_large=run.allow_large_window, trace=TraceWriter(stream))
        finally:
            if stream is not None and stream is not sys.stderr:
                stream.close()

    samples = recon.samples * train.gain
    write_wav(run.output, samples, train.fs)

    report = {
        "spike_count": len(train),
        "method": recon.solver_report.method,
        "condition_estimate": recon.solver_report.condition_estimate,
        "decode_ms": recon.diagnostics.get("decode_ms", 0.0),
        "window": None if run.batch else run.window,
    }
    if args.reference:
        reference, _ = read_wav(args.reference)
        value = snr(reference, samples)
        report["snr_db"] = "inf" if np.isinf(value) else value
    _emit(report)
    return 0


def run_evaluate(args: argparse.Namespace, config: Dict[str, Any]) -> int:
    """EvalReport JSON for a reference/estimate pair."""
    from src.encoding.models import SpikeTrain
    from src.metrics.evaluation import evaluate
    from src.sigio.spike_file import read_spikes
    from src.sigio.wav import read_wav

    reference, fs = read_wav(args.reference)
    estimate, _ = read_wav(args.estimate)
    if args.spikes:
        train = read_spikes(args.spikes)
    else:
        train = SpikeTrain.empty(fs=fs, signal_len=reference.size, bank_hash=0)
    _emit(evaluate(reference, train, estimate).to_dict())
    return 0


def run_synth(args: argparse.Namespace, config: Dict[str, Any]) -> int:
    """Write a peak-normalized signal from the span of the bank."""
    from src.sigio.synth import synth_signal
    from src.sigio.wav import write_wav

    run = RunConfig.from_sources(config, bank=args.bank, output=args.output, seed=args.seed)
    fs = int(args.fs or config.get("kernels", {}).get("fs", 44100))
    bank = _bank(run.bank, config, fs)
    length = int(round(args.seconds * fs))
    signal = synth_signal(bank, length, args.components, seed=run.seed)
    write_wav(run.output, signal, fs)
    _emit({"samples": length, "fs": fs, "components": args.components, "seed": run.seed,
           "bank_hash": bank.hash_hex()})
    return 0


def run_sweep(args: argparse.Namespace, config: Dict[str, Any]) -> int:
    """Refractory (and optional C) sweep over a WAV directory or the synthetic corpus."""
    from src.kernels.bank import cross_corr_table
    from src.sweep import (Sweeper, headline_summary, load_snippets, rate_rises, rate_trend,
                           synthetic_corpus, write_csv, write_summary)

    sweep_config = config.get("sweep", {})
    run = RunConfig.from_sources(config, bank=args.bank, input=args.input, output=args.out,
                                 M=args.M, seed=args.seed, store_measured=args.store_measured,
                                 allow_large_window=args.allow_large_window)
    C_grid = args.C or [float(c) for c in sweep_config.get("C", [run.C])]
    for c in C_grid:
        RunConfig.from_sources(config, C=c)
    threads = resolve_threads(config)

    if args.synthetic:
        fs = int(args.fs or config.get("kernels", {}).get("fs", 44100))
        bank = _bank(run.bank, config, fs)
        snippets = synthetic_corpus(
            bank,
            count=int(sweep_config.get("synthetic_snippets", 10)),
            seconds=float(sweep_config.get("synthetic_seconds", 0.5)),
            components=int(sweep_config.get("synthetic_components", 60)),
            seed=run.seed,
        )
    else:
        if not run.input:
            raise argparse.ArgumentTypeError("sweep needs a WAV directory or --synthetic")
        snippets = load_snippets(run.input)
        if not snippets:
            raise NumericError(f"no readable snippets in {run.input}")
        bank = _bank(run.bank, config, snippets[0].fs)

    table = cross_corr_table(bank, threads=threads)
    sweeper = Sweeper(
        bank, table, C=C_grid, M=run.M, config=sweep_config,
        decoder_config=config.get("decoder", {}), threads=threads,
        timing=not args.no_timing, allow_large_window=run.allow_large_window,
        window_rule=args.window_rule,
        store_measured=run.store_measured if args.store_measured else None,
    )
    grid = args.refractory or [float(d) for d in sweep_config.get("refractory", [0.25, 0.1, 0.05, 0.02, 0.01, 0.005])]
    df = sweeper.run(snippets, grid)
    if df.empty:
        raise NumericError("every sweep cell failed")

    write_csv(df, run.output)
    if args.summary:
        write_summary(df, args.summary)
    trend = rate_trend(df)
    print(trend.to_string(index=False, float_format=lambda v: f"{v:.4f}"))
    headline = headline_summary(df)
    headline.pop("curve")
    _emit({"rows": int(len(df)), "cells": len(snippets) * len(C_grid) * len(grid),
           "rate_rises": rate_rises(trend), "measured": sweeper.store_measured,
           "headline": headline, "csv": run.output})
    return 0


def run_validate(args: argparse.Namespace, config: Dict[str, Any]) -> int:
    """Property suites; exit 3 when any check fails."""
    from src.checks.theorems import TheoremSuite, format_report

    only = [name.strip() for chunk in (args.only or []) for name in chunk.split(",") if name.strip()]
    suite = TheoremSuite(config.get("validate", {}), seed=args.seed,
                         decoder_config=config.get("decoder", {}), threads=resolve_threads(config))
    results = suite.run(only)
    print(format_report(results))
    return 0 if all(r.passed for r in results) else 3


def run_bench_command(args: argparse.Namespace, config: Dict[str, Any]) -> int:
    """Timing table; exit 3 when decode time grows faster than linearly."""
    from src.bench import run_bench
    from src.kernels.bank import cross_corr_table

    bench_config = config.get("bench", {})
    run = RunConfig.from_sources(config, bank=args.bank, window=args.window or bench_config.get("window", 50),
                                 seed=args.seed)
    fs = int(args.fs or bench_config.get("fs", 8000))
    bank = _bank(run.bank, config, fs, {"count": bench_config.get("bank_size", 10), "low_hz": 100.0})
    table = cross_corr_table(bank, threads=resolve_threads(config))
    lengths = args.lengths or [float(v) for v in bench_config.get("lengths", [1.0, 2.0])]
    report = run_bench(bank, table, lengths, run.window,
                       repeats=int(args.repeats or bench_config.get("repeats", 5)),
                       seed=run.seed, decoder_config=config.get("decoder", {}))
    print(report.render())
    return 0 if report.passed else 3


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="spikecodec", description="Spike-train signal codec")
    parser.add_argument("--config", default="config/settings.yaml", help="settings file")
    sub = parser.add_subparsers(dest="command", required=True)

    def params(p):
        p.add_argument("--C", type=float, default=None, help="baseline threshold")
        p.add_argument("--M", type=float, default=None, help="ahp jump")
        p.add_argument("--delta", type=float, default=None, help="refractory period in seconds")

    p = sub.add_parser("encode", help="encode a WAV into a spike file")
    p.add_argument("input")
    p.add_argument("output")
    p.add_argument("--bank", default=None, help="bank spec file")
    params(p)
    p.add_argument("--store-measured", action="store_true", default=None, help="store measured convolution values")
    p.add_argument("--seed", type=int, default=None)
    p.set_defaults(handler=run_encode)

    p = sub.add_parser("decode", help="decode a spike file into a WAV")
    p.add_argument("input")
    p.add_argument("output")
    p.add_argument("--bank", default=None)
    mode = p.add_mutually_exclusive_group()
    mode.add_argument("--window", type=int, default=None, help="window size (default from config)")
    mode.add_argument("--batch", action="store_true", default=None, help="exact offline solve")
    p.add_argument("--allow-large-window", action="store_true", default=None)
    p.add_argument("--trace", default=None, help="JSON-lines trace file, '-' for stderr")
    p.add_argument("--reference", default=None, help="reference WAV for an SNR report")
    p.set_defaults(handler=run_decode)

    p = sub.add_parser("evaluate", help="SNR and rate report")
    p.add_argument("reference")
    p.add_argument("estimate")
    p.add_argument("--spikes", default=None)
    p.set_defaults(handler=run_evaluate)

    p = sub.add_parser("sweep", help="refractory sweep to CSV")
    p.add_argument("input", nargs="?", default=None, help="directory of WAV snippets")
    p.add_argument("--synthetic", action="store_true", help="use the synthetic corpus")
    p.add_argument("--out", required=True)
    p.add_argument("--bank", default=None)
    p.add_argument("--C", type=_floats, default=None, help="comma-separated baseline thresholds")
    p.add_argument("--M", type=float, default=None)
    p.add_argument("--refractory", type=_floats, default=None, help="comma-separated seconds")
    p.add_argument("--window-rule", default=None, help="fixed:<w> or inverse:<k>")
    p.add_argument("--allow-large-window", action="store_true", default=None)
    p.add_argument("--summary", default=None, help="gnuplot data file")
    p.add_argument("--no-timing", action="store_true", help="write zero timing columns")
    p.add_argument("--store-measured", action="store_true", default=None,
                   help="decode from measured convolution values instead of model thresholds")
    p.add_argument("--fs", type=int, default=None, help="bank sample rate for --synthetic")
    p.add_argument("--seed", type=int, default=None)
    p.set_defaults(handler=run_sweep)

    p = sub.add_parser("synth", help="write a signal from the span of the bank")
    p.add_argument("output")
    p.add_argument("--bank", default=None)
    p.add_argument("--components", type=int, default=20)
    p.add_argument("--seconds", type=float, default=1.0)
    p.add_argument("--fs", type=int, default=None)
    p.add_argument("--seed", type=int, default=None)
    p.set_defaults(handler=run_synth)

    p = sub.add_parser("validate", help="run the property suites")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--only", action="append", default=None, help="suite name(s), comma-separated")
    p.set_defaults(handler=run_validate)

    p = sub.add_parser("bench", help="encode/decode timing")
    p.add_argument("--bank", default=None)
    p.add_argument("--lengths", type=_floats, default=None, help="comma-separated seconds")
    p.add_argument("--window", type=int, default=None)
    p.add_argument("--repeats", type=int, default=None)
    p.add_argument("--fs", type=int, default=None)
    p.add_argument("--seed", type=int, default=None)
    p.set_defaults(handler=run_bench_command)

    return parser


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)

    try:
        config = load_config(args.config)
    except Exception as e:
        print(f"CRITICAL: Failed to load config: {e}", file=sys.stderr)
        return 1

    logger = setup_logger("SPIKECODEC", config.get("app", {}).get("log_level", "INFO"))

    try:
        return args.handler(args, config)
    except ValidationError as e:
        logger.error(f"Invalid arguments: {e}")
        print(f"error: {e}", file=sys.stderr)
        return 1
    except argparse.ArgumentTypeError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    except Exception as e:
        code = describe_exit(e)
        logger.error(f"{args.command} failed ({type(e).__name__}): {e}", exc_info=code not in (1, 2))
        print(f"error: {e}", file=sys.stderr)
        return code


if __name__ == "__main__":
    sys.exit(main())
