import json
import subprocess
import sys

import numpy as np
import pytest

from volprod.cli import main
from volprod.simplexflags import RegularSimplex


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_body_volume(capsys):
    code, out, _ = run(capsys, "body", "volume", "--builtin", "simplex:2")
    assert code == 0
    assert float(out) == pytest.approx(3 * np.sqrt(3) / 4, rel=1e-15)
    assert out.strip().startswith("1.29903810567665")
    assert float(run(capsys, "body", "volume", "--builtin", "cube:3")[1]) == 8.0


def test_body_polar_of_simplex(capsys):
    code, out, _ = run(capsys, "body", "polar", "--builtin", "simplex:3", "--center", "0")
    V = np.array(json.loads(out)["vertices"])
    ref = -3 * RegularSimplex(3).vertices
    d = np.linalg.norm(V[:, None] - ref[None], axis=2)
    assert d.min(axis=1).max() <= 1e-10


def test_body_other_actions(capsys):
    assert json.loads(run(capsys, "body", "contains", "--builtin", "cube:2", "--point", "0.5,1")[1]) is True
    assert json.loads(run(capsys, "body", "contains", "--builtin", "cube:2", "--point", "1.5,0")[1]) is False
    np.testing.assert_allclose(json.loads(run(capsys, "body", "centroid", "--builtin", "cube:2")[1]), 0, atol=1e-15)
    hull = json.loads(run(capsys, "body", "hull", "--builtin", "cube:2")[1])
    assert len(hull["vertices"]) == 4 and len(hull["halfspaces"]) == 4
    assert run(capsys, "body", "contains", "--builtin", "cube:2")[0] == 2


@pytest.mark.parametrize("body,expected", [("simplex:2", 6.75), ("cube:2", 8.0), ("simplex:4", 3125 / 576)])
def test_vp(capsys, body, expected):
    code, out, _ = run(capsys, "vp", "--builtin", body)
    data = json.loads(out)
    assert code == 0 and abs(data["vp"] - expected) <= 1e-9
    assert set(data) == {"vp", "santalo", "volumes", "iterations"}


def test_santalo_and_tolerance_env(capsys, monkeypatch):
    code, out, _ = run(capsys, "santalo", "--builtin", "vertex-shrink:2:0.04:3")
    assert code == 0 and json.loads(out)["centroid_norm"] <= 1e-10
    monkeypatch.setenv("VOLPROD_TOL", "-1")
    assert run(capsys, "santalo", "--builtin", "cube:2")[0] == 2
    monkeypatch.setenv("VOLPROD_TOL", "1e-3")
    assert json.loads(run(capsys, "santalo", "--builtin", "vertex-shrink:2:0.04:3")[1])["centroid_norm"] <= 1e-3


def test_exit_codes(capsys, tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert run(capsys, "vp", "--file", str(bad))[0] == 2
    assert run(capsys, "vp", "--file", str(tmp_path / "missing.json"))[0] == 2
    assert run(capsys, "vp", "--builtin", "sphere:2")[0] == 2
    assert run(capsys, "body", "polar", "--builtin", "cube:2", "--center", "1")[0] == 3
    outside = tmp_path / "far.json"
    outside.write_text(json.dumps({"n": 2, "vertices": [[3, 3], [4, 3], [3, 4]]}))
    code, _, err = run(capsys, "flags", "--file", str(outside))
    assert code == 3 and "SandwichError" in err
    flat = tmp_path / "flat.json"
    flat.write_text(json.dumps({"n": 2, "vertices": [[0, 0], [1, 1], [2, 2]]}))
    assert run(capsys, "body", "volume", "--file", str(flat))[0] == 3
    assert run(capsys, "vp")[0] == 2


def test_flags_report(capsys):
    code, out, _ = run(capsys, "flags", "--builtin", "facet-cut:2:0.02:4")
    rep = json.loads(out)
    assert code == 0 and rep["lemma32"]["ok"] and rep["n"] == 2
    assert run(capsys, "flags", "--builtin", "cube:2", "--n", "3")[0] == 2


def test_sweep_and_fit(capsys, tmp_path):
    args = ["sweep", "--family", "vertex-shrink", "--n", "2", "--deltas", "0.04,0.02,0.01",
            "--samples", "20", "--seed", "3"]
    code, out, _ = run(capsys, *args, "--out", str(tmp_path / "a.csv"))
    summary = json.loads(out)
    assert code == 0 and summary["rows"] == 60 and summary["checks"]["slope_positive"]
    assert len((tmp_path / "a.csv").read_text().splitlines()) == 61
    assert json.loads((tmp_path / "a.json").read_text())["fits"]["vp_gap_vs_delta"]["slope"] > 0
    run(capsys, *args, "--out", str(tmp_path / "b.csv"), "--jobs", "2")
    assert (tmp_path / "a.csv").read_bytes() == (tmp_path / "b.csv").read_bytes()
    fit = json.loads(run(capsys, "fit", str(tmp_path / "a.csv"))[1])
    assert fit["vertex-shrink"]["slope"]["slope"] > 0

    run(capsys, "sweep", "--family", "scaling", "--samples", "2", "--out", str(tmp_path / "s.csv"))
    fit = json.loads(run(capsys, "fit", str(tmp_path / "s.csv"))[1])
    assert fit["scaling"]["flag"] == "affine-trivial family"
    assert abs(fit["scaling"]["slope"]["slope"]) < 1e-9


def test_sweep_errors(capsys, tmp_path):
    assert run(capsys, "sweep", "--out", str(tmp_path / "nodir" / "x.csv"))[0] == 2
    assert run(capsys, "sweep", "--deltas", "0.1,0.05", "--out", str(tmp_path / "x.csv"))[0] == 2
    assert run(capsys, "fit", str(tmp_path / "none.csv"))[0] == 2


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "volprod", "vp", "--builtin", "simplex:3"],
                          capture_output=True, text=True, check=True)
    assert json.loads(proc.stdout)["vp"] == pytest.approx(256 / 36, rel=1e-12)
