"""Semiclassical simulator and closed-form calculator for low-frequency
phase readout in a two-frequency, squeezing-enhanced Mach-Zehnder
interferometer."""

from .analytic import BRIDGE_K, SnrReport, noise_band_power, signal_band_power, snr
from .model import (
    CarrierConfig,
    CarrierMode,
    PhaseSignal,
    Scenario,
    ScenarioError,
    SqueezingModel,
    TimeGrid,
    effective_variance,
    validate_scenario,
)

__version__ = "0.1.0"
