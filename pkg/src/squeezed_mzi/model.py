"""Domain types, unit conventions and scenario validation.

All angular frequencies are in rad per unit time. Fields live in the
rotating frame of the optical carrier, so the optical frequency itself
never appears numerically; ``photon_flux_from_power`` is the only place
physical constants are used.
"""
from __future__ import annotations

import enum
import math
import warnings
from dataclasses import dataclass, field
from typing import Sequence, Union

import numpy as np
from scipy import constants

SMALL_SIGNAL_WARN = 0.05
SMALL_SIGNAL_REJECT = 0.3
NYQUIST_SAFETY = 1.25
MIN_CYCLES_RAD = 16.0  # w_s * T lower bound


class ScenarioError(ValueError):
    """Raised when a scenario violates one or more invariants."""

    def __init__(self, violations: Sequence["Violation"]):
        self.violations = list(violations)
        super().__init__("; ".join(str(v) for v in self.violations))


@dataclass(frozen=True)
class Violation:
    field: str
    message: str
    suggestion: float | None = None

    def __str__(self) -> str:
        s = f"{self.field}: {self.message}"
        if self.suggestion is not None:
            s += f" (nearest valid value {self.suggestion!r})"
        return s

    def to_dict(self) -> dict:
        return {"field": self.field, "message": self.message, "suggestion": self.suggestion}


class CarrierMode(str, enum.Enum):
    TWO_FREQUENCY = "two_frequency"
    SINGLE_FREQUENCY = "single_frequency"


@dataclass(frozen=True)
class CarrierConfig:
    photon_flux_N: float
    omega_big: float
    phi: float = 0.0
    mode: CarrierMode = CarrierMode.TWO_FREQUENCY

    @property
    def alpha(self) -> float:
        """Mean amplitude of each carrier, N = 2 alpha**2."""
        return math.sqrt(self.photon_flux_N / 2.0)


@dataclass(frozen=True)
class PhaseSignal:
    """Phase modulation theta(t) = sum_s theta_s cos(w_s t)."""

    components: tuple[tuple[float, float], ...] = ()

    def __post_init__(self):
        object.__setattr__(
            self, "components", tuple((float(w), float(a)) for w, a in self.components)
        )

    @property
    def frequencies(self) -> np.ndarray:
        return np.array([w for w, _ in self.components], dtype=float)

    @property
    def amplitudes(self) -> np.ndarray:
        return np.array([a for _, a in self.components], dtype=float)

    def amplitude_at(self, w: float) -> float:
        """Amplitude of the component at |w| (0 if absent); theta_w = theta_{-w}."""
        w = abs(w)
        for ws, a in self.components:
            if math.isclose(abs(ws), w, rel_tol=1e-9, abs_tol=1e-9):
                return a
        return 0.0

    def evaluate(self, t: np.ndarray) -> np.ndarray:
        out = np.zeros_like(t, dtype=float)
        for w, a in self.components:
            out += a * np.cos(w * t)
        return out


# --- spectrum functions ----------------------------------------------------


@dataclass(frozen=True)
class Flat:
    value: float

    def __call__(self, omega):
        return np.full_like(np.asarray(omega, dtype=float), self.value, dtype=float)


@dataclass(frozen=True)
class Tabulated:
    """Linear interpolation in |omega|, clamped to the end values."""

    omegas: tuple[float, ...]
    values: tuple[float, ...]

    def __post_init__(self):
        om = tuple(float(x) for x in self.omegas)
        va = tuple(float(x) for x in self.values)
        if len(om) != len(va) or len(om) == 0:
            raise ValueError("tabulated spectrum needs equal-length, non-empty tables")
        if any(b <= a for a, b in zip(om, om[1:])):
            raise ValueError("tabulated frequencies must be strictly increasing")
        object.__setattr__(self, "omegas", om)
        object.__setattr__(self, "values", va)

    def __call__(self, omega):
        return np.interp(np.abs(np.asarray(omega, dtype=float)), self.omegas, self.values)


@dataclass(frozen=True)
class LorentzianOPO:
    """Below-threshold OPO output spectrum.

    ``anti=False`` gives the squeezed quadrature
    1 - 4 eta x / ((1 + x)^2 + (omega/gamma)^2), ``anti=True`` the
    anti-squeezed one 1 + 4 eta x / ((1 - x)^2 + (omega/gamma)^2).
    """

    eta: float
    x: float
    gamma: float
    anti: bool = False

    def __post_init__(self):
        if not 0.0 <= self.eta <= 1.0:
            raise ValueError("escape efficiency eta must lie in [0, 1]")
        if not 0.0 <= self.x < 1.0:
            raise ValueError("pump parameter x must lie in [0, 1)")
        if self.gamma <= 0:
            raise ValueError("cavity half-width gamma must be positive")

    def __call__(self, omega):
        u = (np.asarray(omega, dtype=float) / self.gamma) ** 2
        if self.anti:
            return 1.0 + 4.0 * self.eta * self.x / ((1.0 - self.x) ** 2 + u)
        return 1.0 - 4.0 * self.eta * self.x / ((1.0 + self.x) ** 2 + u)


SpectrumFn = Union[Flat, Tabulated, LorentzianOPO]


@dataclass(frozen=True)
class SqueezingModel:
    v_min: SpectrumFn
    v_max: SpectrumFn
    mismatch_angle: float = 0.0

    @classmethod
    def vacuum(cls) -> "SqueezingModel":
        return cls(Flat(1.0), Flat(1.0))

    @classmethod
    def flat(cls, v_min: float, v_max: float | None = None, mismatch_angle: float = 0.0):
        """Flat squeezing; ``v_max`` defaults to the minimum-uncertainty value 1/v_min."""
        if v_max is None:
            v_max = math.inf if v_min == 0 else 1.0 / v_min
        return cls(Flat(v_min), Flat(v_max), mismatch_angle)

    @classmethod
    def lorentzian(cls, eta: float, x: float, gamma: float, mismatch_angle: float = 0.0):
        return cls(
            LorentzianOPO(eta, x, gamma), LorentzianOPO(eta, x, gamma, anti=True), mismatch_angle
        )

    def _mix(self, omega, c2: float, s2: float):
        vmin = np.asarray(self.v_min(omega), dtype=float)
        vmax = np.asarray(self.v_max(omega), dtype=float)
        # skip zero-weighted terms so an infinite anti-squeezed variance reads as 0 * inf = 0
        out = vmin * c2 if c2 != 0.0 else np.zeros_like(vmin)
        if s2 != 0.0:
            out = out + vmax * s2
        return out

    def effective_variance(self, omega):
        return effective_variance(self, omega)

    def orthogonal_variance(self, omega):
        """Variance of the quadrature orthogonal to the readout."""
        c2, s2 = _cos2_sin2(self.mismatch_angle)
        return self._mix(omega, s2, c2)


def _cos2_sin2(angle: float) -> tuple[float, float]:
    c, s = math.cos(angle), math.sin(angle)
    c2, s2 = c * c, s * s
    # snap the exact-alignment cases so flat endpoints come out exact
    if abs(s2) < 1e-30:
        s2, c2 = 0.0, 1.0
    elif abs(c2) < 1e-30:
        c2, s2 = 0.0, 1.0
    return c2, s2


def effective_variance(model: SqueezingModel, omega):
    """Variance read at the quadrature phi + pi/2.

    V_eff = v_min cos^2(mismatch) + v_max sin^2(mismatch). Returns a float
    for scalar ``omega`` and an array otherwise.
    """
    c2, s2 = _cos2_sin2(model.mismatch_angle)
    out = model._mix(omega, c2, s2)
    if np.ndim(omega) == 0:
        return float(out)
    return out


# --- grid and traces ------------------------------------------------------


@dataclass(frozen=True)
class TimeGrid:
    sample_rate: float
    duration_T: float

    @property
    def n_samples(self) -> int:
        return int(round(self.sample_rate * self.duration_T))

    @property
    def dt(self) -> float:
        return 1.0 / self.sample_rate

    @property
    def delta_omega(self) -> float:
        """Resolution bandwidth in rad per unit time."""
        return 2.0 * math.pi / self.duration_T

    @property
    def nyquist(self) -> float:
        return math.pi * self.sample_rate

    @property
    def times(self) -> np.ndarray:
        return np.arange(self.n_samples) / self.sample_rate

    @property
    def bin_omegas(self) -> np.ndarray:
        return np.arange(self.n_samples // 2 + 1) * self.delta_omega

    def bin_index(self, omega: float) -> int:
        """Index of the on-bin frequency ``omega``; ValueError if off-bin."""
        k = omega / self.delta_omega
        kr = int(round(k))
        if not math.isclose(k, kr, rel_tol=0, abs_tol=1e-6):
            raise ValueError(f"frequency {omega!r} is not on the grid (bin {k:.6f})")
        return kr

    def nearest_on_bin(self, omega: float) -> float:
        return round(omega / self.delta_omega) * self.delta_omega

    def is_on_bin(self, omega: float) -> bool:
        try:
            self.bin_index(omega)
        except ValueError:
            return False
        return True


@dataclass(frozen=True, eq=False)
class PhotocurrentTrace:
    grid: TimeGrid
    samples: np.ndarray
    signal: np.ndarray | None = None
    noise: np.ndarray | None = None

    def __post_init__(self):
        if len(self.samples) != self.grid.n_samples:
            raise ValueError("trace length does not match the grid")


def photon_flux_from_power(power_watts: float, wavelength_m: float) -> float:
    """Photon flux P / (hbar omega0) in photons per second, omega0 = 2 pi c / lambda."""
    if not (power_watts > 0 and wavelength_m > 0):
        raise ValueError("power and wavelength must be positive")
    omega0 = 2.0 * math.pi * constants.c / wavelength_m
    return power_watts / (constants.hbar * omega0)


# --- validation -----------------------------------------------------------


@dataclass(frozen=True)
class Scenario:
    """A validated, immutable scenario."""

    carrier: CarrierConfig
    signal: PhaseSignal
    squeezing: SqueezingModel
    grid: TimeGrid
    warnings: tuple[str, ...] = field(default=(), compare=False)

    @property
    def parts(self):
        return self.carrier, self.signal, self.squeezing, self.grid


def _check_spectrum(squeezing: SqueezingModel, omegas: np.ndarray) -> list[Violation]:
    out = []
    vmin = np.asarray(squeezing.v_min(omegas), dtype=float)
    vmax = np.asarray(squeezing.v_max(omegas), dtype=float)
    if np.any(np.isnan(vmin)) or np.any(np.isnan(vmax)):
        out.append(Violation("squeezing", "variance spectrum contains NaN"))
        return out
    if np.any(vmin < 0):
        out.append(Violation("squeezing.v_min", "variance must be non-negative"))
    if np.any(vmax < vmin):
        out.append(Violation("squeezing.v_max", "anti-squeezed variance below squeezed variance"))
    with np.errstate(invalid="ignore"):
        prod = np.where(np.isinf(vmax) & (vmin == 0), np.inf, vmin * vmax)
    if np.any(prod < 1.0 - 1e-9):
        i = int(np.argmin(prod))
        out.append(
            Violation(
                "squeezing",
                f"uncertainty product v_min*v_max = {prod[i]:.6g} < 1 at omega = {omegas[i]:.6g}",
            )
        )
    return out


def validate_scenario(
    carrier: CarrierConfig | Scenario,
    signal: PhaseSignal | None = None,
    squeezing: SqueezingModel | None = None,
    grid: TimeGrid | None = None,
) -> Scenario:
    """Check every invariant and return a sealed :class:`Scenario`.

    Raises :class:`ScenarioError` listing all violations. Passing an
    already validated scenario returns it unchanged.
    """
    if isinstance(carrier, Scenario):
        return carrier
    v: list[Violation] = []
    notes: list[str] = []
    two = carrier.mode == CarrierMode.TWO_FREQUENCY

    if not carrier.photon_flux_N > 0:
        v.append(Violation("carrier.photon_flux_N", "must be > 0"))
    if two and not carrier.omega_big > 0:
        v.append(Violation("carrier.omega_big", "must be > 0 in two-frequency mode"))

    if not (grid.sample_rate > 0 and grid.duration_T > 0):
        v.append(Violation("grid", "sample_rate and duration_T must be > 0"))
        raise ScenarioError(v)
    n_exact = grid.sample_rate * grid.duration_T
    n = grid.n_samples
    if not math.isclose(n_exact, n, rel_tol=0, abs_tol=1e-9) or n < 2:
        v.append(Violation("grid.n_samples", f"sample_rate*duration_T = {n_exact!r} is not an integer"))
    elif n & (n - 1):
        v.append(Violation("grid.n_samples", f"{n} is not a power of two"))

    ws = signal.frequencies
    amps = signal.amplitudes
    if len(set(ws.tolist())) != len(ws):
        v.append(Violation("signal.components", "component frequencies must be distinct"))
    for w, a in signal.components:
        if not w > 0:
            v.append(Violation("signal.components", f"frequency {w!r} must be > 0"))
        if a < 0:
            v.append(Violation("signal.components", f"amplitude {a!r} must be >= 0"))
        elif a > SMALL_SIGNAL_REJECT:
            v.append(
                Violation(
                    "signal.components",
                    f"amplitude {a!r} at {w!r} exceeds the small-signal limit {SMALL_SIGNAL_REJECT}",
                )
            )
        elif a > SMALL_SIGNAL_WARN:
            notes.append(f"amplitude {a!r} at {w!r} is above {SMALL_SIGNAL_WARN}; linearization degrades")
        if w > 0 and w * grid.duration_T < MIN_CYCLES_RAD:
            v.append(
                Violation("signal.components", f"w*T = {w * grid.duration_T:.4g} < {MIN_CYCLES_RAD} at {w!r}")
            )
        if w > 0 and not grid.is_on_bin(w):
            v.append(
                Violation("signal.components", f"frequency {w!r} is not a multiple of delta_omega",
                          grid.nearest_on_bin(w))
            )

    if two and carrier.omega_big > 0:
        # the sideband mapping omega -> omega +- Omega is exact only for an on-bin Omega
        if not grid.is_on_bin(carrier.omega_big):
            v.append(
                Violation("carrier.omega_big", "Omega is not a multiple of delta_omega",
                          grid.nearest_on_bin(carrier.omega_big))
            )
    top = (2.0 * carrier.omega_big if two else 0.0) + (float(ws.max()) if len(ws) else 0.0)
    if grid.nyquist <= NYQUIST_SAFETY * top:
        v.append(
            Violation(
                "grid.sample_rate",
                f"Nyquist {grid.sample_rate / 2:.6g} must exceed {NYQUIST_SAFETY} x {top / (2 * math.pi):.6g}",
            )
        )

    if n >= 2 and not (n & (n - 1)):
        omegas = np.concatenate([grid.bin_omegas, _table_points(squeezing)])
        v.extend(_check_spectrum(squeezing, omegas))

    if v:
        raise ScenarioError(v)
    for msg in notes:
        warnings.warn(msg, stacklevel=2)
    return Scenario(carrier, signal, squeezing, grid, tuple(notes))


def _table_points(squeezing: SqueezingModel) -> np.ndarray:
    pts = []
    for fn in (squeezing.v_min, squeezing.v_max):
        if isinstance(fn, Tabulated):
            pts.extend(fn.omegas)
    return np.asarray(pts, dtype=float)
