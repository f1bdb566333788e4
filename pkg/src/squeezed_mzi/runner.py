"""Experiment commands behind the CLI.

Each command takes a :class:`RunConfig` and returns plain data (a
summary dict or CSV rows); writing files is left to the CLI.
"""
from __future__ import annotations

import math
from dataclasses import replace

import numpy as np

from . import analytic
from .config import RunConfig
from .model import CarrierMode, PhaseSignal, ScenarioError, SqueezingModel, TimeGrid, Violation
from .spectral import band_powers, estimate_snr, local_floor, run_ensemble
from .synthesis import readout_noise, synthesize_photocurrent_linearized

SUMMARY_KEYS = (
    "snr_paper",
    "snr_clean_paper",
    "snr_est",
    "p_s_paper",
    "p_n_paper",
    "p_s_est",
    "p_n_est",
    "bridge_k",
    "contaminated",
    "contamination_terms",
    "seed",
    "n_realizations",
)
SWEEP_AXES = ("v", "theta_w1", "N", "T", "mismatch_angle")


def summary_dict(report: analytic.SnrReport, w1: float) -> dict:
    out = {k: getattr(report, k) for k in SUMMARY_KEYS}
    out["contamination_terms"] = [{"omega": f, "theta": a} for f, a in report.contamination_terms]
    out["snr_infinite"] = report.paper_infinite or report.est_infinite
    out["relative_deviation"] = report.relative_deviation
    out["w1"] = w1
    return out


def _require_two_frequency(cfg: RunConfig):
    if cfg.scenario.carrier.mode != CarrierMode.TWO_FREQUENCY:
        raise ScenarioError([Violation("carrier.mode", "this command needs a two-frequency carrier")])


def cmd_analytic(cfg: RunConfig) -> dict:
    _require_two_frequency(cfg)
    carrier, signal, squeezing, grid = cfg.scenario.parts
    report = analytic.snr(carrier, signal, squeezing, cfg.w1, grid)
    return summary_dict(report, cfg.w1)


def cmd_simulate(cfg: RunConfig, workers: int | None = None):
    """Returns (summary, ensemble) so callers can dump spectra."""
    _require_two_frequency(cfg)
    ens = run_ensemble(cfg.scenario, cfg.n_realizations, cfg.seed, workers or cfg.workers)
    report = estimate_snr(
        cfg.scenario, cfg.w1, cfg.n_realizations, cfg.seed, combined=cfg.combined, ensemble=ens
    )
    return summary_dict(report, cfg.w1), ens


def detect_lines(bp: np.ndarray, rbw: float, threshold: float) -> list[dict]:
    """Bins whose band power exceeds ``threshold`` x the local median floor."""
    lines = []
    for k in range(1, len(bp) - 1):
        floor = local_floor(bp, k)
        if bp[k] > threshold * floor:
            lines.append(
                {"omega": k * rbw, "band_power": bp[k], "floor": floor,
                 "ratio": bp[k] / floor if floor > 0 else math.inf}
            )
    return lines


def cmd_diagnose(cfg: RunConfig, workers: int | None = None) -> dict:
    """Single-frequency check for phase lines at |w1 +- 2 Omega|."""
    carrier = cfg.scenario.carrier
    big = carrier.omega_big
    single = replace(carrier, mode=CarrierMode.SINGLE_FREQUENCY)
    diag = cfg.with_scenario(carrier=single)
    ens = run_ensemble(diag.scenario, cfg.n_realizations, cfg.seed, workers or cfg.workers)
    bp = band_powers(ens.total)
    lines = detect_lines(bp, ens.total.rbw, cfg.threshold)
    half = ens.total.rbw / 2
    targets = sorted({abs(cfg.w1 - 2 * big), cfg.w1 + 2 * big})
    hazards = [
        line["omega"] for line in lines
        if big > 0 and any(abs(line["omega"] - t) <= half for t in targets)
    ]
    return {
        "mode": CarrierMode.SINGLE_FREQUENCY.value,
        "w1": cfg.w1,
        "omega_big": big,
        "threshold": cfg.threshold,
        "hazard_frequencies": targets,
        "lines": lines,
        "hazards": hazards,
        "contaminated": bool(hazards),
        "seed": cfg.seed,
        "n_realizations": cfg.n_realizations,
    }


def cmd_retune(cfg: RunConfig, omega_candidates) -> list[tuple[float, float, bool]]:
    _require_two_frequency(cfg)
    carrier, signal, squeezing, grid = cfg.scenario.parts
    return analytic.retune_omega(carrier, signal, cfg.w1, omega_candidates, squeezing, grid)


def _swept(cfg: RunConfig, axis: str, value: float) -> RunConfig:
    carrier, signal, squeezing, grid = cfg.scenario.parts
    if axis == "v":
        return cfg.with_scenario(squeezing=SqueezingModel.flat(value, mismatch_angle=squeezing.mismatch_angle))
    if axis == "mismatch_angle":
        return cfg.with_scenario(squeezing=replace(squeezing, mismatch_angle=value))
    if axis == "N":
        return cfg.with_scenario(carrier=replace(carrier, photon_flux_N=value))
    if axis == "T":
        return cfg.with_scenario(grid=TimeGrid(grid.sample_rate, value))
    if axis == "theta_w1":
        comps = [(w, a) for w, a in signal.components if not math.isclose(w, cfg.w1, rel_tol=1e-9)]
        return cfg.with_scenario(signal=PhaseSignal(tuple([(cfg.w1, value)] + comps)))
    raise ScenarioError([Violation("axis", f"unknown sweep axis {axis!r}; choose from {SWEEP_AXES}")])


def cmd_sweep(cfg: RunConfig, axis: str, values, mc: bool = False, workers: int | None = None):
    """One row per value: value, snr_paper, snr_clean_paper, snr_est."""
    values = list(values)
    if axis not in SWEEP_AXES:
        raise ScenarioError([Violation("axis", f"unknown sweep axis {axis!r}; choose from {SWEEP_AXES}")])
    if not values:
        raise ScenarioError([Violation("values", "no sweep values given")])
    rows = []
    for value in values:
        sub = _swept(cfg, axis, float(value))
        if mc:
            summary, _ = cmd_simulate(sub, workers)
        else:
            summary = cmd_analytic(sub)
        rows.append((float(value), summary["snr_paper"], summary["snr_clean_paper"], summary["snr_est"]))
    return rows


def first_trace(cfg: RunConfig):
    """Realization 0 of the linearized photocurrent, for trace dumps."""
    carrier, signal, squeezing, grid = cfg.scenario.parts
    noise = readout_noise(grid, squeezing, cfg.seed, 0)
    return synthesize_photocurrent_linearized(carrier, signal, noise, grid)
