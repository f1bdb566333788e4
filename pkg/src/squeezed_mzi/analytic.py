"""Closed-form line weights, band powers and SNR for the two-frequency scheme.

Conventions are kept exactly as the closed forms are written: the signal
band power at w1 is N^2 (theta_w1 + theta_{w1+2W}/2 + theta_{w1-2W}/2)^2,
the noise band power is (N dw / 4 pi)[V(w1 + W) + V(w1 - W)], and the SNR
is their ratio. Monte-Carlo estimates in :mod:`squeezed_mzi.spectral` use a
Parseval normalization instead; the two SNRs differ by ``BRIDGE_K``.
"""
from __future__ import annotations

import math
from functools import cmp_to_key
from dataclasses import dataclass, field

from .model import (
    CarrierConfig,
    CarrierMode,
    PhaseSignal,
    SqueezingModel,
    TimeGrid,
    effective_variance,
    validate_scenario,
)

# estimator SNR / closed-form SNR: a clean line of amplitude N theta carries
# mean square N^2 theta^2 / 2 (closed form: N^2 theta^2), and mirrored noise
# integrates to 2 x (N/2)(V+ + V-)/T (closed form: half of that)
BRIDGE_K = 0.25

TIE_RTOL = 1e-9


@dataclass(frozen=True)
class SignalLineSet:
    """Delta-function weights of the signal PSD.

    Each weight multiplies the pair delta(w - f) + delta(w + f).
    """

    lines: tuple[tuple[float, float], ...]

    def weight_at(self, frequency: float) -> float:
        for f, wgt in self.lines:
            if math.isclose(f, frequency, rel_tol=1e-9, abs_tol=1e-9):
                return wgt
        return 0.0

    def band_power(self, center: float, width: float) -> float:
        """Integral of dw/2pi over [center +- width/2] and its mirror."""
        total = sum(w for f, w in self.lines if abs(f - center) <= width / 2)
        return 2.0 * total / (2.0 * math.pi)


@dataclass
class SnrReport:
    p_s_paper: float
    p_n_paper: float
    snr_paper: float
    snr_clean_paper: float | None
    contaminated: bool
    contamination_terms: list = field(default_factory=list)
    paper_infinite: bool = False
    p_s_est: float | None = None
    p_n_est: float | None = None
    snr_est: float | None = None
    est_infinite: bool = False
    bridge_k: float = BRIDGE_K
    seed: int | None = None
    n_realizations: int | None = None

    @property
    def relative_deviation(self) -> float | None:
        """(snr_est / k - snr_paper) / snr_paper, when both are finite."""
        if self.snr_est is None or self.est_infinite or self.paper_infinite or self.snr_paper == 0:
            return None
        return (self.snr_est / self.bridge_k - self.snr_paper) / self.snr_paper


def _require_two_frequency(carrier: CarrierConfig):
    if carrier.mode != CarrierMode.TWO_FREQUENCY:
        raise ValueError("closed forms apply to the two-frequency carrier")


def signal_psd_lines(carrier: CarrierConfig, signal: PhaseSignal) -> SignalLineSet:
    """Evaluate the three line sums for every component.

    Lines at w_s, w_s + 2W and |w_s - 2W| carry weights
    (pi N^2/2)(2 t_s^2 + t_s t_{s-2W} + t_s t_{s+2W}),
    (pi N^2/4)(t_s^2 + t_s t_{s+4W} + 2 t_s t_{s+2W}) and
    (pi N^2/4)(t_s^2 + t_s t_{s-4W} + 2 t_s t_{s-2W}); contributions landing
    on the same frequency are summed.
    """
    _require_two_frequency(carrier)
    n2 = carrier.photon_flux_N ** 2
    big = carrier.omega_big
    th = signal.amplitude_at
    acc: list[list[float]] = []

    def add(freq: float, weight: float):
        freq = abs(freq)
        for item in acc:
            if math.isclose(item[0], freq, rel_tol=1e-9, abs_tol=1e-9):
                item[1] += weight
                return
        acc.append([freq, weight])

    for ws, t in signal.components:
        add(ws, math.pi * n2 / 2 * (2 * t * t + t * th(ws - 2 * big) + t * th(ws + 2 * big)))
        add(ws + 2 * big, math.pi * n2 / 4 * (t * t + t * th(ws + 4 * big) + 2 * t * th(ws + 2 * big)))
        add(ws - 2 * big, math.pi * n2 / 4 * (t * t + t * th(ws - 4 * big) + 2 * t * th(ws - 2 * big)))
    acc.sort(key=lambda item: item[0])
    return SignalLineSet(tuple((f, w) for f, w in acc))


def noise_psd(carrier: CarrierConfig, squeezing: SqueezingModel, omega: float) -> float:
    """(N/2)[V(w + W) + V(|w - W|)]."""
    _require_two_frequency(carrier)
    big = carrier.omega_big
    v = effective_variance(squeezing, omega + big) + effective_variance(squeezing, abs(omega - big))
    return carrier.photon_flux_N / 2.0 * v


def _partner_sum(carrier: CarrierConfig, signal: PhaseSignal, w1: float) -> float:
    big = carrier.omega_big
    return signal.amplitude_at(w1) + signal.amplitude_at(w1 + 2 * big) / 2 + signal.amplitude_at(w1 - 2 * big) / 2


def signal_band_power(carrier: CarrierConfig, signal: PhaseSignal, w1: float) -> float:
    if not w1 > 0:
        raise ValueError("w1 must be positive")
    _require_two_frequency(carrier)
    return carrier.photon_flux_N ** 2 * _partner_sum(carrier, signal, w1) ** 2


def _sideband_variances(carrier, squeezing, w1) -> tuple[float, float]:
    big = carrier.omega_big
    return (
        effective_variance(squeezing, w1 + big),
        effective_variance(squeezing, abs(w1 - big)),
    )


def noise_band_power(carrier: CarrierConfig, squeezing: SqueezingModel, w1: float, grid: TimeGrid) -> float:
    _require_two_frequency(carrier)
    grid.bin_index(w1)
    vp, vm = _sideband_variances(carrier, squeezing, w1)
    return carrier.photon_flux_N * grid.delta_omega / (4.0 * math.pi) * (vp + vm)


def contamination_report(signal: PhaseSignal, w1: float, omega_big: float) -> list[tuple[float, float]]:
    """Components at |w1 +- 2W| with non-zero amplitude."""
    out = []
    for f in (abs(w1 - 2 * omega_big), w1 + 2 * omega_big):
        a = signal.amplitude_at(f)
        if a > 0 and not any(math.isclose(f, g, rel_tol=1e-9) for g, _ in out):
            out.append((f, a))
    return out


def snr(carrier: CarrierConfig, signal: PhaseSignal, squeezing: SqueezingModel, w1: float, grid: TimeGrid) -> SnrReport:
    p_s = signal_band_power(carrier, signal, w1)
    p_n = noise_band_power(carrier, squeezing, w1, grid)
    terms = contamination_report(signal, w1, carrier.omega_big)
    vp, vm = _sideband_variances(carrier, squeezing, w1)
    n, t = carrier.photon_flux_N, grid.duration_T
    infinite = p_n == 0
    if infinite:
        value = math.inf if p_s > 0 else math.nan
    else:
        value = 2 * t * n * _partner_sum(carrier, signal, w1) ** 2 / (vp + vm)
    clean = None
    if not terms:
        th = signal.amplitude_at(w1)
        clean = value if infinite else 2 * n * t * th * th / (vp + vm)
    return SnrReport(
        p_s_paper=p_s,
        p_n_paper=p_n,
        snr_paper=value,
        snr_clean_paper=clean,
        contaminated=bool(terms),
        contamination_terms=terms,
        paper_infinite=infinite,
    )


def retune_omega(
    carrier: CarrierConfig,
    signal: PhaseSignal,
    w1: float,
    candidate_omegas,
    squeezing: SqueezingModel,
    grid: TimeGrid,
) -> list[tuple[float, float, bool]]:
    """Rank carrier spacings: uncontaminated first by SNR, ties to smaller W.

    Each candidate is validated against the grid before evaluation.
    """
    candidates = list(candidate_omegas)
    if not candidates:
        raise ValueError("no candidate Omega values given")
    rows = []
    for big in candidates:
        c = CarrierConfig(carrier.photon_flux_N, float(big), carrier.phi, CarrierMode.TWO_FREQUENCY)
        validate_scenario(c, signal, squeezing, grid)
        rep = snr(c, signal, squeezing, w1, grid)
        rows.append((float(big), rep.snr_paper, rep.contaminated))

    def compare(a, b) -> int:
        if a[2] != b[2]:
            return 1 if a[2] else -1
        if not math.isclose(a[1], b[1], rel_tol=TIE_RTOL):
            return -1 if a[1] > b[1] else 1
        return (a[0] > b[0]) - (a[0] < b[0])

    return sorted(rows, key=cmp_to_key(compare))
