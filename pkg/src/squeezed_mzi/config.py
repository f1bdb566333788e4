"""Run configuration files and the shipped presets.

Configs are TOML with sections ``[carrier]``, ``[signal]``,
``[squeezing]``, ``[grid]`` and ``[run]``. Frequencies are given in cycles
per unit time and converted to rad here.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace
from importlib import resources
from pathlib import Path

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from .model import (
    CarrierConfig,
    CarrierMode,
    Flat,
    LorentzianOPO,
    PhaseSignal,
    Scenario,
    ScenarioError,
    SqueezingModel,
    Tabulated,
    TimeGrid,
    Violation,
    validate_scenario,
)

TWO_PI = 2.0 * math.pi
PRESETS = ("clean", "contaminated", "diagnostic", "lorentzian")
OUTPUT_KINDS = {"summary", "spectrum", "trace"}


@dataclass(frozen=True)
class RunConfig:
    scenario: Scenario
    w1: float
    n_realizations: int = 500
    seed: int = 1
    outputs: frozenset = frozenset({"summary"})
    output_dir: Path | None = None
    workers: int = 1
    threshold: float = 5.0
    combined: bool = False

    def with_scenario(self, **changes) -> "RunConfig":
        """Copy with scenario parts replaced, re-validated."""
        parts = dict(zip(("carrier", "signal", "squeezing", "grid"), self.scenario.parts))
        parts.update(changes)
        return replace(self, scenario=validate_scenario(**parts))


def _spectrum(section: dict, key: str, fallback=None):
    value = section.get(key, fallback)
    if isinstance(value, dict):
        freqs = [TWO_PI * f for f in value["freqs"]]
        return Tabulated(tuple(freqs), tuple(value["values"]))
    if value is None:
        raise ScenarioError([Violation(f"squeezing.{key}", "missing")])
    return Flat(float(value))


def parse_squeezing(section: dict) -> SqueezingModel:
    kind = section.get("kind", "flat")
    mismatch = float(section.get("mismatch", 0.0))
    if kind == "vacuum":
        return SqueezingModel(Flat(1.0), Flat(1.0), mismatch)
    if kind == "flat":
        v_min = float(section.get("v_min", 1.0))
        v_max = section.get("v_max")
        return SqueezingModel.flat(v_min, None if v_max is None else float(v_max), mismatch)
    if kind == "tabulated":
        return SqueezingModel(_spectrum(section, "v_min"), _spectrum(section, "v_max"), mismatch)
    if kind == "lorentzian":
        eta, x = float(section["eta"]), float(section["x"])
        gamma = TWO_PI * float(section["gamma"])
        return SqueezingModel(
            LorentzianOPO(eta, x, gamma), LorentzianOPO(eta, x, gamma, anti=True), mismatch
        )
    raise ScenarioError([Violation("squeezing.kind", f"unknown kind {kind!r}")])


def parse_config(data: dict) -> RunConfig:
    try:
        car = data["carrier"]
        sig = data.get("signal", {})
        grd = data["grid"]
        run = data.get("run", {})
        mode = CarrierMode(car.get("mode", CarrierMode.TWO_FREQUENCY.value))
        carrier = CarrierConfig(
            float(car["photon_flux"]), TWO_PI * float(car.get("omega", 0.0)), float(car.get("phi", 0.0)), mode
        )
        comps = tuple((TWO_PI * float(c["freq"]), float(c["theta"])) for c in sig.get("components", []))
        signal = PhaseSignal(comps)
        squeezing = parse_squeezing(data.get("squeezing", {"kind": "vacuum"}))
        grid = TimeGrid(float(grd["sample_rate"]), float(grd["duration"]))
        if "w1" in sig:
            w1 = TWO_PI * float(sig["w1"])
        elif comps:
            w1 = comps[0][0]
        else:
            raise ScenarioError([Violation("signal.w1", "no readout frequency and no components")])
        outputs = frozenset(run.get("outputs", ["summary"])) | {"summary"}
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, ScenarioError):
            raise
        raise ScenarioError([Violation("config", f"malformed config: {exc!r}")]) from exc
    bad = outputs - OUTPUT_KINDS
    if bad:
        raise ScenarioError([Violation("run.outputs", f"unknown outputs {sorted(bad)}")])
    scenario = validate_scenario(carrier, signal, squeezing, grid)
    if not grid.is_on_bin(w1):
        raise ScenarioError([Violation("signal.w1", "w1 is not on the grid", grid.nearest_on_bin(w1))])
    n_real = int(run.get("n_realizations", 500))
    seed = int(run.get("seed", 1))
    if n_real < 1:
        raise ScenarioError([Violation("run.n_realizations", "must be >= 1")])
    if not 0 <= seed < 2 ** 64:
        raise ScenarioError([Violation("run.seed", "must be an unsigned 64-bit integer")])
    out_dir = run.get("output_dir")
    return RunConfig(
        scenario=scenario,
        w1=w1,
        n_realizations=n_real,
        seed=seed,
        outputs=outputs,
        output_dir=Path(out_dir) if out_dir else None,
        workers=int(run.get("workers", 1)),
        threshold=float(run.get("threshold", 5.0)),
        combined=bool(run.get("combined", False)),
    )


def load_config(path) -> RunConfig:
    """Load a config file, or a shipped preset by name."""
    text = preset_text(str(path)) if str(path) in PRESETS else Path(path).read_text()
    try:
        data = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ScenarioError([Violation("config", f"invalid TOML: {exc}")]) from exc
    return parse_config(data)


def preset_text(name: str) -> str:
    return resources.files("squeezed_mzi.presets").joinpath(f"{name}.toml").read_text()
