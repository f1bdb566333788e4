"""Command-line entry point.

    squeezed-mzi analytic|simulate|diagnose|retune|sweep --config FILE|PRESET
        [--mc] [--out DIR] [--seed U64] [--realizations N] [--emit spectrum,trace]

Exit codes: 0 success, 2 validation or usage error, 3 numeric failure.
"""
from __future__ import annotations

import argparse
import math
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import io, runner
from .analytic import signal_psd_lines
from .config import OUTPUT_KINDS, PRESETS, RunConfig, load_config
from .model import ScenarioError, Violation
from .spectral import band_power

EXIT_OK, EXIT_USAGE, EXIT_NUMERIC = 0, 2, 3


def _float_list(text: str) -> list[float]:
    return [float(v) for v in text.split(",") if v.strip()]


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="squeezed-mzi", description=__doc__.splitlines()[0])
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", required=True, help=f"TOML file or preset name {PRESETS}")
    common.add_argument("--out", type=Path, default=None, help="directory for output files")
    common.add_argument("--seed", type=int, default=None)
    common.add_argument("--realizations", type=int, default=None)
    common.add_argument("--emit", default="", help="comma list of extra outputs: spectrum,trace")
    common.add_argument("--workers", type=int, default=None)
    common.add_argument("--mc", action="store_true", help="sweep: also run Monte-Carlo")
    sub = p.add_subparsers(dest="cmd", required=True)
    sub.add_parser("analytic", parents=[common], help="closed-form SNR report")
    s = sub.add_parser("simulate", parents=[common], help="Monte-Carlo SNR estimate")
    s.add_argument("--combined", action="store_true", help="estimate from signal+noise traces")
    d = sub.add_parser("diagnose", parents=[common], help="single-frequency contamination check")
    d.add_argument("--threshold", type=float, default=None)
    r = sub.add_parser("retune", parents=[common], help="rank candidate carrier spacings")
    r.add_argument("--omegas", type=_float_list, required=True, help="candidate Omega values, cycles")
    w = sub.add_parser("sweep", parents=[common], help="SNR versus one parameter")
    w.add_argument("--axis", required=True, choices=runner.SWEEP_AXES)
    w.add_argument("--values", type=_float_list, required=True)
    return p


def _apply_overrides(cfg: RunConfig, args) -> RunConfig:
    changes = {}
    if args.seed is not None:
        if not 0 <= args.seed < 2 ** 64:
            raise ScenarioError([Violation("--seed", "must be an unsigned 64-bit integer")])
        changes["seed"] = args.seed
    if args.realizations is not None:
        if args.realizations < 1:
            raise ScenarioError([Violation("--realizations", "must be >= 1")])
        changes["n_realizations"] = args.realizations
    if args.emit:
        kinds = {k.strip() for k in args.emit.split(",") if k.strip()}
        if kinds - OUTPUT_KINDS:
            raise ScenarioError([Violation("--emit", f"unknown outputs {sorted(kinds - OUTPUT_KINDS)}")])
        changes["outputs"] = cfg.outputs | kinds
    if args.out is not None:
        changes["output_dir"] = args.out
    if args.workers is not None:
        changes["workers"] = max(1, args.workers)
    if getattr(args, "threshold", None) is not None:
        changes["threshold"] = args.threshold
    if getattr(args, "combined", False):
        changes["combined"] = True
    return replace(cfg, **changes)


def _emit(cfg: RunConfig, name: str, text: str):
    if cfg.output_dir is not None:
        io.write_text(cfg.output_dir / name, text)


def _spectrum_files(cfg: RunConfig, ens):
    rows = [(w, p, ens.noise.n_avg) for w, p in zip(ens.noise.bin_freqs, ens.noise.psd)]
    _emit(cfg, "spectrum.csv", io.csv_text(("omega", "psd", "n_avg"), rows))
    _emit(cfg, "bandpower.csv", io.csv_text(("center", "width", "value"), _band_rows(cfg, ens)))


def _band_rows(cfg: RunConfig, ens):
    """Signal-part band powers at w1 and every signal line on the grid."""
    carrier, signal = cfg.scenario.carrier, cfg.scenario.signal
    centers = {cfg.w1}
    centers.update(f for f, _ in signal_psd_lines(carrier, signal).lines)
    rows = []
    for c in sorted(centers):
        try:
            bp = band_power(ens.signal, c)
        except ValueError:
            continue
        rows.append((bp.center, bp.width, bp.value))
    return rows


def _trace_file(cfg: RunConfig):
    tr = runner.first_trace(cfg)
    rows = zip(tr.grid.times, tr.samples, tr.signal, tr.noise)
    _emit(cfg, "trace.csv", io.csv_text(("t", "i", "signal", "noise"), rows))


def _has_nan(obj) -> bool:
    if isinstance(obj, float):
        return math.isnan(obj)
    if isinstance(obj, dict):
        return any(_has_nan(v) for v in obj.values())
    if isinstance(obj, (list, tuple)):
        return any(_has_nan(v) for v in obj)
    return False


def run(args) -> tuple[int, str]:
    cfg = _apply_overrides(load_config(args.config), args)
    if args.cmd == "analytic":
        out = runner.cmd_analytic(cfg)
    elif args.cmd == "simulate":
        out, ens = runner.cmd_simulate(cfg)
        if "spectrum" in cfg.outputs:
            _spectrum_files(cfg, ens)
    elif args.cmd == "diagnose":
        out = runner.cmd_diagnose(cfg)
    elif args.cmd == "retune":
        rows = runner.cmd_retune(cfg, [2 * math.pi * v for v in args.omegas])
        text = io.csv_text(("omega", "snr_paper", "contaminated"), rows)
        _emit(cfg, "retune.csv", text)
        return EXIT_OK, text
    else:
        rows = runner.cmd_sweep(cfg, args.axis, args.values, mc=args.mc)
        text = io.csv_text(("value", "snr_paper", "snr_clean_paper", "snr_est"), rows)
        _emit(cfg, "sweep.csv", text)
        return EXIT_OK, text
    if "trace" in cfg.outputs and args.cmd in ("simulate", "diagnose"):
        _trace_file(cfg)
    if _has_nan(out):
        return EXIT_NUMERIC, io.dumps({"error": "numeric failure", "summary": out}) + "\n"
    text = io.dumps(out) + "\n"
    _emit(cfg, "summary.json", text)
    return EXIT_OK, text


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        code, text = run(args)
    except ScenarioError as exc:
        sys.stdout.write(io.dumps({"errors": [v.to_dict() for v in exc.violations]}) + "\n")
        return EXIT_USAGE
    except (ValueError, FileNotFoundError) as exc:
        sys.stdout.write(io.dumps({"errors": [{"field": "usage", "message": str(exc)}]}) + "\n")
        return EXIT_USAGE
    except (ArithmeticError, np.linalg.LinAlgError) as exc:
        sys.stdout.write(io.dumps({"errors": [{"field": "numeric", "message": str(exc)}]}) + "\n")
        return EXIT_NUMERIC
    sys.stdout.write(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
