import json

import numpy as np
import pytest

from epsapprox.cli import main
from epsapprox.geometry import WeightedPointSet
from epsapprox.io import read_points_csv, write_points_csv


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    return code, capsys.readouterr()


@pytest.fixture
def ground(tmp_path, rng):
    p = tmp_path / "d.csv"
    write_points_csv(p, WeightedPointSet(rng.random((600, 2))))
    return p


def test_gen_vdc(tmp_path, capsys):
    out = tmp_path / "p.csv"
    code, _ = run(capsys, "gen", "vdc", "--n", 16, "--out", out)
    assert code == 0
    rows = out.read_text().splitlines()
    assert len(rows) == 16 and rows[0] == "0,0"
    man = json.loads((tmp_path / "p.manifest.json").read_text())
    assert man["command"] == "gen" and man["seed"] == 0
    assert str(out) in man["outputs"] and "version" in man


def test_gen_lattice_and_stretched(tmp_path, capsys):
    code, _ = run(capsys, "gen", "lattice", "--m", 10, "--out", tmp_path / "l.csv")
    assert code == 0 and len(read_points_csv(tmp_path / "l.csv")) > 0
    patch = tmp_path / "patch.json"
    patch.write_text(json.dumps({"lo": [0, 0], "hi": [1, 1], "coeffs": [1, 1, 1]}))
    code, _ = run(capsys, "gen", "stretched", "--n", 32, "--patch", patch, "--out", tmp_path / "s.csv")
    S = read_points_csv(tmp_path / "s.csv")
    assert code == 0 and len(S) == 32
    assert S.total_weight == pytest.approx(2.0, abs=1e-12)


def test_approx_then_eval(tmp_path, capsys, ground):
    out = tmp_path / "p.csv"
    code, _ = run(capsys, "approx", "--input", ground, "--family", "rect", "--eps", 0.2,
                  "--out", out, "--dump-curve", tmp_path / "c.tsv")
    assert code == 0
    assert (tmp_path / "p.cert.json").exists()
    assert (tmp_path / "c.tsv").read_text().startswith("# step")
    code, cap = run(capsys, "eval", "--approx", out, "--ground", ground, "--family", "rect")
    assert code == 0
    assert json.loads(cap.out)["max_error"] <= 0.2


def test_outputs_are_deterministic(tmp_path, capsys, ground):
    digests = []
    for name in ("a.csv", "b.csv"):
        run(capsys, "approx", "--input", ground, "--eps", 0.3, "--out", tmp_path / name)
        m = json.loads((tmp_path / name.replace(".csv", ".manifest.json")).read_text())
        digests.append(m["outputs"][str(tmp_path / name)])
    assert digests[0] == digests[1]


def test_random_baseline(tmp_path, capsys, ground):
    code, _ = run(capsys, "approx", "--input", ground, "--method", "random", "--eps", 0.3,
                  "--seed", 4, "--out", tmp_path / "r.csv")
    assert code == 0 and len(read_points_csv(tmp_path / "r.csv")) < 600


def test_scan_exact_and_approx(tmp_path, capsys, rng):
    for name in ("m", "b"):
        write_points_csv(tmp_path / f"{name}.csv", WeightedPointSet(rng.random((20, 2))))
    code, cap = run(capsys, "scan", "--measured", tmp_path / "m.csv", "--baseline", tmp_path / "b.csv",
                    "--stat", "poisson", "--eps", 0.5, "--exact")
    assert code == 0
    res = json.loads(cap.out)
    assert res["result"]["value"] <= res["exact"]["value"] + 1e-12
    assert res["exact"]["value"] - res["result"]["value"] <= 0.5
    code, cap = run(capsys, "scan", "--measured", tmp_path / "m.csv", "--baseline", tmp_path / "b.csv",
                    "--stat", "linear", "--coeffs", "1,-1,0", "--eps", 0.5)
    assert code == 0 and json.loads(cap.out)["result"]["value"] >= 0


def test_color(tmp_path, capsys, rng):
    write_points_csv(tmp_path / "x.csv", WeightedPointSet(rng.random((64, 2))))
    code, _ = run(capsys, "color", "--input", tmp_path / "x.csv", "--out", tmp_path / "c.json")
    res = json.loads((tmp_path / "c.json").read_text())
    assert code == 0 and sum(res["signs"]) == 0 and len(res["signs"]) == 64


def test_terrain_signed_split(tmp_path, capsys):
    tin = tmp_path / "t.json"
    tin.write_text(json.dumps({"vertices": [[0, 0, 1], [1, 0, -1], [1, 1, 1], [0, 1, -1]],
                               "triangles": [[0, 1, 2], [0, 2, 3]]}))
    code, _ = run(capsys, "terrain", "approx", "--tin", tin, "--eps", 0.5, "--out", tmp_path / "o.csv")
    assert code == 0
    assert (tmp_path / "o.pos.csv").exists() and (tmp_path / "o.neg.csv").exists()


def test_terrain_positive(tmp_path, capsys):
    tin = tmp_path / "t.json"
    tin.write_text(json.dumps({"vertices": [[0, 0, 1], [1, 0, 0.5], [1, 1, 1], [0, 1, 0.5]],
                               "triangles": [[0, 1, 2], [0, 2, 3]]}))
    code, _ = run(capsys, "terrain", "approx", "--tin", tin, "--eps", 0.5, "--out", tmp_path / "o.csv")
    assert code == 0
    code, cap = run(capsys, "eval", "--approx", tmp_path / "o.csv", "--tin", tin, "--resolution", 16,
                    "--report", tmp_path / "r.json")
    assert code == 0 and json.loads((tmp_path / "r.json").read_text())["max_error"] <= 0.5


def test_gaussian(tmp_path, capsys):
    code, _ = run(capsys, "gaussian", "approx", "--sigma", "1,1", "--eps", 0.3, "--out", tmp_path / "g.csv")
    assert code == 0 and len(read_points_csv(tmp_path / "g.csv")) > 0


def test_sentinel(tmp_path, capsys, rng):
    write_points_csv(tmp_path / "d.csv", WeightedPointSet(rng.random((256, 2))))
    code, _ = run(capsys, "sentinel", "--input", tmp_path / "d.csv", "--eps", 0.4, "--out", tmp_path / "s.csv")
    assert code == 0
    rep = json.loads((tmp_path / "s.report.json").read_text())
    assert rep["sets"][0]["verdict"]["ok"]
    assert (tmp_path / "s.0.csv").exists()


def test_usage_errors_exit_2(tmp_path, capsys, ground):
    assert run(capsys, "approx", "--input", ground, "--eps", 1.5, "--out", tmp_path / "x.csv")[0] == 2
    assert run(capsys, "approx", "--input", ground, "--eps", 0.2, "--family", "tri",
               "--out", tmp_path / "x.csv")[0] == 2
    assert run(capsys, "nonsense")[0] == 2
    code, cap = run(capsys, "gen", "vdc")
    assert code == 2 and "usage" in cap.err


def test_domain_errors_exit_1(tmp_path, capsys):
    (tmp_path / "empty.csv").write_text("")
    code, cap = run(capsys, "sentinel", "--input", tmp_path / "empty.csv", "--eps", 0.2, "--out", tmp_path / "s.csv")
    assert code == 1
    err = json.loads(cap.out)
    assert set(err) == {"error", "message", "command"} and err["command"] == "sentinel"
    code, cap = run(capsys, "approx", "--input", tmp_path / "missing.csv", "--eps", 0.2, "--out", tmp_path / "x.csv")
    assert code == 1 and json.loads(cap.out)["error"]
