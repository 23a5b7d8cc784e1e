import csv
import json

import pytest

from rigidspec.cli import main, parse_grid, ConfigError


def test_parse_grid_inclusive():
    g = parse_grid("0.05:1.5:0.05")
    assert len(g) == 30 and g[0] == 0.05 and g[-1] == pytest.approx(1.5)
    assert parse_grid("0.1:0.32:0.1") == pytest.approx([0.1, 0.2, 0.3])
    for bad in ("1:0:0.1", "0:1:0.1", "a:b:c", "0.1:1"):
        with pytest.raises(ConfigError):
            parse_grid(bad)


def test_spectrum_outputs(tmp_path):
    assert main(["spectrum", "--r", "0.5", "--out-dir", str(tmp_path)]) == 0
    data = json.loads((tmp_path / "annulus.json").read_text())
    assert abs(data["r_inner"] - 0.5) <= 0.05 and abs(data["r_outer"] - 1) <= 0.05
    assert data["unit_circle_contact"] is True
    rows = list(csv.DictReader(open(tmp_path / "profile.csv")))
    assert rows[0]["rho"] == "0" and set(rows[0]) >= {"rho", "log_resolvent_sup", "verdict"}
    assert len(rows) == 31


def test_spectrum_zero_radius(tmp_path):
    assert main(["spectrum", "--r", "0", "--out-dir", str(tmp_path)]) == 0
    data = json.loads((tmp_path / "annulus.json").read_text())
    assert data["origin_verdict"] == "InSpectrum" and data["r_inner"] == 0.0
    assert data["inverse_annulus"] == "operator not invertible"


def test_spectrum_diagonal_roots(tmp_path):
    assert main(["spectrum", "--r", "1", "--out-dir", str(tmp_path)]) == 2
    assert main(["spectrum", "--r", "1", "--diagonal-roots", "--out-dir", str(tmp_path)]) == 0
    data = json.loads((tmp_path / "annulus.json").read_text())
    assert data["r_inner"] >= 0.95 and abs(data["r_outer"] - 1) <= 0.05


@pytest.mark.parametrize("argv", [
    ["spectrum", "--r", "1.5"],
    ["spectrum", "--r", "0.5", "--grid", "1:0:1"],
    ["spectrum", "--r", "0.5", "--k-max", "40"],
    ["rigidity", "--r", "1"],
    ["verify", "--only", "no-such-suite"],
    ["bogus"],
])
def test_config_errors(argv, tmp_path):
    assert main(argv + ["--out-dir", str(tmp_path)] if argv != ["bogus"] else argv) == 2


def test_rigidity_command(tmp_path):
    assert main(["rigidity", "--r", "0.5", "--k-max", "7", "--ell-max", "6", "--out-dir", str(tmp_path)]) == 0
    rows = [json.loads(line) for line in (tmp_path / "rigidity.jsonl").read_text().splitlines()]
    assert [r["ell"] for r in rows] == [2, 3, 4, 5, 6]
    assert main(["rigidity", "--r", "0", "--out-dir", str(tmp_path)]) == 0
    assert main(["rigidity", "--r", "0.5", "--ell-max", "8", "--out-dir", str(tmp_path)]) == 0
    rows = [json.loads(line) for line in (tmp_path / "rigidity.jsonl").read_text().splitlines()]
    assert rows[-1]["saturated"] and rows[-1]["deficit"] == 0.0
    assert main(["rigidity", "--r", "0.5", "--goal", "0.1", "--out-dir", str(tmp_path)]) == 1


def test_verify_single_suite(capsys):
    assert main(["verify", "--only", "inner-divergence", "--seed", "3"]) == 0
    out = capsys.readouterr().out
    assert "inner-divergence" in out and "PASS" in out
