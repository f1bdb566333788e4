import csv
import io as _io
import json
import math

import pytest

from squeezed_mzi import cli
from squeezed_mzi.config import load_config, parse_config, preset_text
from squeezed_mzi.model import ScenarioError


def run_cli(capsys, *argv):
    code = cli.main(list(argv))
    return code, capsys.readouterr().out


def read_csv(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


@pytest.mark.parametrize("name", ["clean", "contaminated", "diagnostic", "lorentzian"])
def test_presets_load(name):
    cfg = load_config(name)
    assert cfg.w1 == pytest.approx(2 * math.pi * 5)
    assert cfg.scenario.grid.n_samples == (65536 if name == "diagnostic" else 16384)


def test_analytic_summary(capsys, tmp_path):
    code, out = run_cli(capsys, "analytic", "--config", "clean", "--out", str(tmp_path))
    assert code == 0
    summary = json.loads(out)
    for key in ("snr_paper", "snr_clean_paper", "snr_est", "p_s_paper", "p_n_paper", "p_s_est", "p_n_est",
                "bridge_k", "contaminated", "contamination_terms", "seed", "n_realizations"):
        assert key in summary
    assert summary["snr_clean_paper"] == 8.0
    assert summary["snr_est"] is None
    assert (tmp_path / "summary.json").read_text() == out


def test_analytic_contaminated(capsys):
    code, out = run_cli(capsys, "analytic", "--config", "contaminated")
    summary = json.loads(out)
    assert code == 0 and summary["contaminated"]
    assert summary["snr_paper"] == pytest.approx(18.0)
    assert summary["contamination_terms"][0]["omega"] == pytest.approx(2 * math.pi * 405)


def test_invalid_grid_exits_2(capsys, tmp_path):
    bad = preset_text("clean").replace("sample_rate = 2048", "sample_rate = 1500")
    path = tmp_path / "bad.toml"
    path.write_text(bad)
    code, out = run_cli(capsys, "analytic", "--config", str(path))
    assert code == 2
    assert any("power of two" in e["message"] for e in json.loads(out)["errors"])


def test_missing_config_exits_2(capsys, tmp_path):
    code, _ = run_cli(capsys, "analytic", "--config", str(tmp_path / "nope.toml"))
    assert code == 2


def test_malformed_config_raises(tmp_path):
    with pytest.raises(ScenarioError, match="malformed"):
        parse_config({"carrier": {"photon_flux": "lots"}, "grid": {"sample_rate": 2048, "duration": 8}})
    path = tmp_path / "broken.toml"
    path.write_text("[carrier\n")
    with pytest.raises(ScenarioError, match="TOML"):
        load_config(path)


def test_diagnostic_preset_flags_hazard(capsys):
    code, out = run_cli(capsys, "diagnose", "--config", "diagnostic", "--realizations", "200")
    report = json.loads(out)
    assert code == 0 and report["contaminated"]
    assert report["hazards"] == [pytest.approx(2 * math.pi * 405)]


def test_empty_sweep_exits_2(capsys):
    code, _ = run_cli(capsys, "sweep", "--config", "clean", "--axis", "v", "--values", "")
    assert code == 2


def test_bad_emit_exits_2(capsys):
    code, _ = run_cli(capsys, "simulate", "--config", "clean", "--emit", "hologram", "--realizations", "2")
    assert code == 2


def test_retune_csv(capsys, tmp_path):
    code, _ = run_cli(capsys, "retune", "--config", "contaminated", "--omegas", "200,190", "--out", str(tmp_path))
    assert code == 0
    rows = read_csv(tmp_path / "retune.csv")
    assert float(rows[0]["omega"]) == pytest.approx(2 * math.pi * 190)
    assert float(rows[0]["snr_paper"]) == pytest.approx(8.0)
    assert rows[0]["contaminated"] == "false" and rows[1]["contaminated"] == "true"


def test_sweep_squeezing(capsys, tmp_path):
    code, _ = run_cli(capsys, "sweep", "--config", "clean", "--axis", "v", "--values", "1,0.5,0.25,0.1",
                      "--out", str(tmp_path))
    assert code == 0
    rows = read_csv(tmp_path / "sweep.csv")
    assert [float(r["snr_paper"]) for r in rows] == pytest.approx([8, 16, 32, 80])


def test_sweep_mismatch_angle(capsys, tmp_path):
    # Flat{0.1} with 1/V anti-squeezing: a quarter-turn swaps 0.1 for 10
    text = preset_text("clean").replace('kind = "vacuum"', 'kind = "flat"\nv_min = 0.1')
    path = tmp_path / "flat.toml"
    path.write_text(text)
    code, out = run_cli(capsys, "sweep", "--config", str(path), "--axis", "mismatch_angle",
                        "--values", f"0,{math.pi / 2}")
    assert code == 0
    rows = list(csv.DictReader(_io.StringIO(out)))
    assert float(rows[0]["snr_paper"]) / float(rows[1]["snr_paper"]) == pytest.approx(100.0)


def test_simulate_dumps(capsys, tmp_path):
    code, out = run_cli(capsys, "simulate", "--config", "contaminated", "--realizations", "20",
                        "--emit", "spectrum,trace", "--out", str(tmp_path))
    assert code == 0
    summary = json.loads(out)
    assert summary["n_realizations"] == 20 and summary["snr_est"] > 0
    spec = read_csv(tmp_path / "spectrum.csv")
    assert len(spec) == 8193 and spec[0]["n_avg"] == "20"
    trace = read_csv(tmp_path / "trace.csv")
    assert len(trace) == 16384
    first = trace[0]
    assert float(first["i"]) == pytest.approx(float(first["signal"]) + float(first["noise"]))
    bands = {round(float(r["center"]) / (2 * math.pi), 6): float(r["value"]) for r in read_csv(tmp_path / "bandpower.csv")}
    assert bands[5.0] > 0 and 395.0 in bands


def _outputs(tmp_path, workers, tag):
    out = tmp_path / tag
    assert cli.main(["simulate", "--config", "contaminated", "--realizations", "60", "--seed", "42",
                     "--workers", str(workers), "--emit", "spectrum,trace", "--out", str(out)]) == 0
    return {p.name: p.read_bytes() for p in sorted(out.iterdir())}


def test_outputs_are_byte_identical_across_workers(tmp_path, capsys):
    a = _outputs(tmp_path, 1, "a")
    b = _outputs(tmp_path, 1, "b")
    c = _outputs(tmp_path, 4, "c")
    capsys.readouterr()
    assert a == b == c
    assert set(a) == {"summary.json", "spectrum.csv", "bandpower.csv", "trace.csv"}
