"""Spectral estimation on finite records.

The periodogram uses a rectangular window and the continuous-equivalent
scaling psd(w_k) = |dt * DFT_k|^2 / T, reported on non-negative bins as a
two-sided density. ``band_power`` integrates one bin and its mirror, so a
cosine of amplitude a has band power a^2/2 and the band powers of all bins
sum to the mean square of the record.
"""
from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .analytic import BRIDGE_K, SnrReport, snr as analytic_snr
from .model import CarrierMode, Scenario, TimeGrid
from .synthesis import readout_noise, synthesize_photocurrent_linearized, synthesize_signal_term

BLOCK_SIZE = 25
FLOOR_NEIGHBORS = 16


@dataclass(frozen=True, eq=False)
class SpectrumEstimate:
    bin_freqs: np.ndarray
    psd: np.ndarray
    rbw: float
    n_avg: int = 1

    @property
    def duration(self) -> float:
        return 2.0 * math.pi / self.rbw

    def index(self, center: float) -> int:
        k = center / self.rbw
        kr = int(round(k))
        if not math.isclose(k, kr, rel_tol=0, abs_tol=1e-6) or not 0 <= kr < len(self.psd):
            raise ValueError(f"center {center!r} is not an on-grid bin")
        return kr


@dataclass(frozen=True)
class BandPower:
    center: float
    width: float
    value: float


def _check_length(trace, grid: TimeGrid) -> np.ndarray:
    x = np.asarray(trace, dtype=float)
    if x.shape != (grid.n_samples,):
        raise ValueError(f"trace has {x.size} samples, grid expects {grid.n_samples}")
    return x


def periodogram(trace, grid: TimeGrid) -> SpectrumEstimate:
    x = _check_length(trace, grid)
    xt = np.fft.rfft(x) * grid.dt
    psd = np.abs(xt) ** 2 / grid.duration_T
    return SpectrumEstimate(grid.bin_omegas, psd, grid.delta_omega, 1)


def circular_autocorrelation(x: np.ndarray) -> np.ndarray:
    """R[m] = (1/n) sum_j x[j] x[j - m], indices modulo n, by direct sums."""
    n = len(x)
    xx = np.concatenate([x, x])
    r = np.empty(n)
    for m in range(n):
        r[m] = np.dot(x, xx[n - m: 2 * n - m])
    return r / n


def wiener_khinchine_psd(trace, grid: TimeGrid) -> SpectrumEstimate:
    """Spectrum as the transform of the circular autocorrelation.

    Cross-check route for :func:`periodogram`; O(n^2).
    """
    x = _check_length(trace, grid)
    r = circular_autocorrelation(x)
    # R is real and even on the circle, so its transform is real
    psd = np.fft.rfft(r).real * grid.dt
    return SpectrumEstimate(grid.bin_omegas, np.maximum(psd, 0.0), grid.delta_omega, 1)


def ensemble_psd(spectra) -> SpectrumEstimate:
    spectra = list(spectra)
    if not spectra:
        raise ValueError("ensemble_psd needs at least one spectrum")
    first = spectra[0]
    for s in spectra[1:]:
        if s.rbw != first.rbw or not np.array_equal(s.bin_freqs, first.bin_freqs):
            raise ValueError("spectra are on different grids")
    total = np.zeros_like(first.psd)
    for s in spectra:
        total = total + s.psd
    return SpectrumEstimate(first.bin_freqs, total / len(spectra), first.rbw, len(spectra))


def band_power(spec: SpectrumEstimate, center: float) -> BandPower:
    k = spec.index(center)
    if k == 0 or k == len(spec.psd) - 1:
        raise ValueError("band power center must lie strictly between DC and Nyquist")
    return BandPower(center, spec.rbw, 2.0 * spec.psd[k] * spec.rbw / (2.0 * math.pi))


def band_powers(spec: SpectrumEstimate) -> np.ndarray:
    """Band power of every non-negative bin; DC and Nyquist have no mirror."""
    out = 2.0 * spec.psd * spec.rbw / (2.0 * math.pi)
    out[0] /= 2.0
    out[-1] /= 2.0
    return out


def local_floor(values: np.ndarray, k: int, neighbors: int = FLOOR_NEIGHBORS) -> float:
    """Median of ``neighbors`` bins around ``k`` (the bin itself excluded)."""
    half = neighbors // 2
    lo, hi = max(1, k - half), min(len(values) - 1, k + half + 1)
    idx = [j for j in range(lo, hi) if j != k]
    return float(np.median(values[idx]))


# --- Monte-Carlo ensemble ---------------------------------------------------


@dataclass(frozen=True, eq=False)
class EnsembleResult:
    """Mean periodograms of the noise part and of the full photocurrent."""

    noise: SpectrumEstimate
    total: SpectrumEstimate
    signal: SpectrumEstimate


def _block(args) -> tuple[np.ndarray, np.ndarray]:
    scenario, seed, start, stop = args
    carrier, signal, squeezing, grid = scenario.parts
    noise_sum = np.zeros(grid.n_samples // 2 + 1)
    total_sum = np.zeros_like(noise_sum)
    for r in range(start, stop):
        x = readout_noise(grid, squeezing, seed, r)
        trace = synthesize_photocurrent_linearized(carrier, signal, x, grid)
        noise_sum += periodogram(trace.noise, grid).psd
        total_sum += periodogram(trace.samples, grid).psd
    return noise_sum, total_sum


def run_ensemble(scenario: Scenario, n_realizations: int, seed: int, workers: int = 1) -> EnsembleResult:
    """Average periodograms over ``n_realizations`` linearized photocurrents.

    Realizations are summed in fixed blocks and the blocks in index
    order, so the result is bit-identical for any worker count.
    """
    if n_realizations < 1:
        raise ValueError("n_realizations must be >= 1")
    grid = scenario.grid
    jobs = [
        (scenario, seed, s, min(s + BLOCK_SIZE, n_realizations))
        for s in range(0, n_realizations, BLOCK_SIZE)
    ]
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(_block, jobs))
    else:
        parts = [_block(j) for j in jobs]
    noise_sum = np.zeros(grid.n_samples // 2 + 1)
    total_sum = np.zeros_like(noise_sum)
    for ns, ts in parts:
        noise_sum += ns
        total_sum += ts
    sig = periodogram(synthesize_signal_term(scenario.carrier, scenario.signal, grid), grid)

    def mean(a):
        return SpectrumEstimate(grid.bin_omegas, a / n_realizations, grid.delta_omega, n_realizations)

    return EnsembleResult(mean(noise_sum), mean(total_sum), sig)


def estimate_snr(
    scenario: Scenario,
    w1: float,
    n_realizations: int,
    seed: int,
    workers: int = 1,
    combined: bool = False,
    ensemble: EnsembleResult | None = None,
) -> SnrReport:
    """Monte-Carlo SNR at ``w1`` alongside the closed-form values.

    By default the signal band power comes from the deterministic signal
    part and the noise band power from the ensemble mean of the noise
    part. ``combined`` instead reads the full photocurrent spectrum and
    estimates the noise floor from neighbouring bins.
    """
    if scenario.carrier.mode != CarrierMode.TWO_FREQUENCY:
        raise ValueError("estimate_snr needs a two-frequency carrier")
    if ensemble is None:
        ensemble = run_ensemble(scenario, n_realizations, seed, workers)
    if combined:
        bp = band_powers(ensemble.total)
        k = ensemble.total.index(w1)
        p_n = local_floor(bp, k)
        p_s = max(bp[k] - p_n, 0.0)
    else:
        p_s = band_power(ensemble.signal, w1).value
        p_n = band_power(ensemble.noise, w1).value

    report = analytic_snr(scenario.carrier, scenario.signal, scenario.squeezing, w1, scenario.grid)
    report.p_s_est = p_s
    report.p_n_est = p_n
    report.bridge_k = BRIDGE_K
    report.seed = seed
    report.n_realizations = n_realizations
    if p_n > 0:
        report.snr_est = p_s / p_n
    else:
        report.snr_est = math.inf
        report.est_infinite = True
    return report
