"""Time-domain realizations of the interferometer photocurrent.

Two pipelines are provided. ``synthesize_photocurrent_linearized`` writes
down the first-order photocurrent directly,

    i(t) = N theta(t) (1 + cos 2 Omega t) + sqrt(2N) dX(t) cos(Omega t),

while ``synthesize_photocurrent_exact`` propagates complex rotating-frame
amplitudes through both beam splitters and returns |F|^2 - |E|^2 with
every bilinear term kept. The exact route is the oracle for the first.

Noise is semiclassical: the squeezed input is a complex Gaussian process
whose quadrature spectra equal the quantum variances. Spectra follow the
finite-record convention S(w) = <|int_0^T x(t) exp(-i w t) dt|^2> / T, so
unit vacuum variance means white noise of sample variance ``sample_rate``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .model import (
    CarrierConfig,
    CarrierMode,
    PhaseSignal,
    PhotocurrentTrace,
    SqueezingModel,
    TimeGrid,
    effective_variance,
)

STREAM_READOUT = 0
STREAM_ORTHOGONAL = 1


def derive_seed(seed: int, realization: int, stream: int) -> int:
    """64-bit sub-seed for one realization and noise stream.

    Uses numpy's SeedSequence hash of the triple, so ensembles are
    reproducible and independent of evaluation order.
    """
    if seed < 0 or realization < 0 or stream < 0:
        raise ValueError("seed, realization and stream must be non-negative")
    lo, hi = np.random.SeedSequence([seed, realization, stream]).generate_state(2, np.uint32)
    return int(lo) | (int(hi) << 32)


@dataclass(frozen=True, eq=False)
class NoiseTrace:
    grid: TimeGrid
    samples: np.ndarray
    seed: int


@dataclass(frozen=True, eq=False)
class ComplexFieldTrace:
    grid: TimeGrid
    samples: np.ndarray
    readout: np.ndarray
    orthogonal: np.ndarray


def synthesize_quadrature_noise(grid: TimeGrid, spectrum, seed: int) -> NoiseTrace:
    """Real stationary Gaussian noise with two-sided PSD ``spectrum``.

    ``spectrum`` holds the target variance at the ``grid.bin_omegas``
    (n/2 + 1 values). Each positive bin gets an independent complex
    Gaussian coefficient; DC and Nyquist are real with matching variance.
    """
    n = grid.n_samples
    spec = np.asarray(spectrum, dtype=float)
    if spec.shape != (n // 2 + 1,):
        raise ValueError(f"spectrum must have {n // 2 + 1} bins, got {spec.shape}")
    if np.any(np.isnan(spec)):
        raise ValueError("spectrum contains NaN")
    if np.any(spec < 0):
        raise ValueError("spectrum must be non-negative")
    if not np.all(np.isfinite(spec)):
        raise ValueError("spectrum must be finite")

    rng = np.random.default_rng(seed)
    g = rng.standard_normal((2, n // 2 + 1))
    # E|Y_k|^2 = n * fs * V_k makes dt^2 |Y_k|^2 / T equal V_k on average
    scale = np.sqrt(n * grid.sample_rate * spec)
    coeffs = scale * (g[0] + 1j * g[1]) / math.sqrt(2.0)
    coeffs[0] = scale[0] * g[0, 0]
    coeffs[-1] = scale[-1] * g[0, -1]
    samples = np.fft.irfft(coeffs, n)
    return NoiseTrace(grid, samples, int(seed))


def readout_noise(grid: TimeGrid, squeezing: SqueezingModel, seed: int, realization: int) -> NoiseTrace:
    """Readout-quadrature noise for one realization of an ensemble."""
    spec = effective_variance(squeezing, grid.bin_omegas)
    return synthesize_quadrature_noise(grid, spec, derive_seed(seed, realization, STREAM_READOUT))


def synthesize_squeezed_field(
    grid: TimeGrid, squeezing: SqueezingModel, phi: float, seed: int, realization: int = 0
) -> ComplexFieldTrace:
    """Complex amplitude b(t) of the squeezed input.

    With the quadrature X^psi = b e^{i psi} + conj(b) e^{-i psi}, the
    readout quadrature (psi = phi + pi/2) is drawn with spectrum V_eff and
    the orthogonal one (psi = phi) with V_orth, independently.
    """
    x1 = readout_noise(grid, squeezing, seed, realization).samples
    spec2 = squeezing.orthogonal_variance(grid.bin_omegas)
    x2 = synthesize_quadrature_noise(
        grid, spec2, derive_seed(seed, realization, STREAM_ORTHOGONAL)
    ).samples
    b = np.exp(-1j * phi) * (x2 - 1j * x1) / 2.0
    return ComplexFieldTrace(grid, b, x1, x2)


def synthesize_signal_term(carrier: CarrierConfig, signal: PhaseSignal, grid: TimeGrid) -> np.ndarray:
    """Deterministic signal part N theta(t) (1 + cos 2 Omega t).

    In single-frequency mode the carrier beat is absent and the term is
    N theta(t).
    """
    t = grid.times
    theta = signal.evaluate(t)
    if carrier.mode == CarrierMode.SINGLE_FREQUENCY:
        return carrier.photon_flux_N * theta
    return carrier.photon_flux_N * theta * (1.0 + np.cos(2.0 * carrier.omega_big * t))


def _check_grid(grid: TimeGrid, other: TimeGrid):
    if grid != other:
        raise ValueError("trace grid does not match scenario grid")


def synthesize_photocurrent_linearized(
    carrier: CarrierConfig, signal: PhaseSignal, noise: NoiseTrace, grid: TimeGrid
) -> PhotocurrentTrace:
    _check_grid(grid, noise.grid)
    s = synthesize_signal_term(carrier, signal, grid)
    n_flux = carrier.photon_flux_N
    if carrier.mode == CarrierMode.SINGLE_FREQUENCY:
        n = math.sqrt(n_flux) * noise.samples
    else:
        n = math.sqrt(2.0 * n_flux) * noise.samples * np.cos(carrier.omega_big * grid.times)
    return PhotocurrentTrace(grid, s + n, s, n)


def vacuum_ordering_offset(grid: TimeGrid) -> float:
    """Symmetric-ordering excess <|b|^2> of semiclassical vacuum on the grid.

    Each vacuum quadrature has sample variance ``sample_rate``, so
    <|b|^2> = (fs + fs) / 4. A normally ordered detector does not see it.
    """
    return grid.sample_rate / 2.0


def synthesize_photocurrent_exact(
    carrier: CarrierConfig,
    signal: PhaseSignal,
    field: ComplexFieldTrace | None,
    grid: TimeGrid,
    normal_order: bool = True,
) -> PhotocurrentTrace:
    """Balanced photocurrent |F|^2 - |E|^2 through both beam splitters.

    ``field=None`` means no squeezed input (B = 0). With ``normal_order``
    the semiclassical vacuum excess ``vacuum_ordering_offset`` is removed
    from |B|^2, which otherwise beats with theta(t) into a spurious line.
    """
    t = grid.times
    if field is not None:
        _check_grid(grid, field.grid)
        b = field.samples
    else:
        b = np.zeros(grid.n_samples, dtype=complex)
    if carrier.mode == CarrierMode.SINGLE_FREQUENCY:
        a = np.full(grid.n_samples, math.sqrt(carrier.photon_flux_N), dtype=complex)
    else:
        a = (2.0 * carrier.alpha * np.cos(carrier.omega_big * t)).astype(complex)

    theta = signal.evaluate(t)
    bphi = b * np.exp(1j * carrier.phi)
    c = (a + bphi) / math.sqrt(2.0)
    d = (a - bphi) / math.sqrt(2.0)
    # exp(i(pi/2 + theta)) written out so theta = 0 gives exactly 1j
    u = -np.sin(theta) + 1j * np.cos(theta)
    e = (c + d * u) / math.sqrt(2.0)
    f = (c - d * u) / math.sqrt(2.0)
    i = np.abs(f) ** 2 - np.abs(e) ** 2
    if normal_order and field is not None:
        # |F|^2 - |E|^2 carries -sin(theta)|B|^2; restore the vacuum part
        i = i + np.sin(theta) * vacuum_ordering_offset(grid)
    return PhotocurrentTrace(grid, i)
