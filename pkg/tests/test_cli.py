import csv
import json
import math
from pathlib import Path

import jsonschema
import numpy as np
import pytest

from unitaylor.cli import main, schema

SCENARIOS = Path(__file__).resolve().parents[1] / "scenarios"
DISK = SCENARIOS / "disk_oscillation" / "scene.json"
SEG = {"factors": [{"kind": "segment", "a": [2, 0], "b": [3, 0]}]}


def run(*args):
    return main([str(a) for a in args])


def dump(path, doc):
    path.write_text(json.dumps(doc))
    return path


@pytest.fixture(scope="module")
def oscillation(tmp_path_factory):
    d = tmp_path_factory.mktemp("osc")
    sched = dump(d / "schedule.json", [
        {"id": "one", "compact": SEG, "target": {"kind": "expression", "expr": "1"}, "epsilon": 0.01, "m": 2},
        {"id": "minus-one", "compact": SEG, "target": {"kind": "expression", "expr": "-1"}, "epsilon": 0.01, "m": 2},
    ])
    cert = d / "cert.json"
    assert run("construct", DISK, sched, "-o", cert) == 0
    return d, sched, cert


@pytest.fixture
def empty_cert(tmp_path):
    sched = dump(tmp_path / "empty.json", [])
    cert = tmp_path / "cert.json"
    assert run("construct", DISK, sched, "-o", cert) == 0
    return cert


def test_empty_schedule_gives_zero_function(empty_cert):
    doc = json.loads(empty_cert.read_text())
    assert doc["f"]["entries"] == [] and doc["cuts"] == []
    jsonschema.validate(doc, schema("certificate"))


def test_verify_fresh_tampered_and_foreign(oscillation, tmp_path):
    d, sched, cert = oscillation
    report = tmp_path / "report.json"
    assert run("verify", cert, DISK, sched, "--resolution", 2, "--report", report) == 0
    jsonschema.validate(json.loads(report.read_text()), schema("report"))
    doc = json.loads(cert.read_text())
    doc["cuts"][1] -= 1
    bad = dump(tmp_path / "bad.json", doc)
    assert run("verify", bad, DISK, sched) == 2
    other = json.loads(DISK.read_text())
    other["mu"] = {"kind": "residues", "modulus": 2, "residues": [0]}
    assert run("verify", cert, dump(tmp_path / "other.json", other), sched) == 1


def test_disjointness_violation_is_config_error(tmp_path, capsys):
    sched = dump(tmp_path / "s.json", [{"id": "x", "compact": {"factors": [{"kind": "segment", "a": [0.5, 0], "b": [2, 0]}]},
                                        "target": {"kind": "expression", "expr": "1"}, "epsilon": 0.01, "m": 2}])
    assert run("construct", DISK, sched, "-o", tmp_path / "c.json") == 1
    err = capsys.readouterr().err.strip().splitlines()
    msg = json.loads(err[-1])
    assert msg["event"] == "config-error" and "disjointness" in msg["message"]


def test_unknown_scene_key_rejected(tmp_path):
    doc = json.loads(DISK.read_text())
    doc["colour"] = "blue"
    assert run("check", dump(tmp_path / "s.json", doc)) == 1


def test_construction_failure_exit_two(tmp_path):
    doc = json.loads(DISK.read_text())
    doc["caps"] = {"degree": 6, "retries": 0}
    sched = dump(tmp_path / "s.json", [{"id": "tight", "compact": SEG, "target": {"kind": "expression", "expr": "1"},
                                        "epsilon": 1e-9, "m": 2}])
    out = tmp_path / "fail.json"
    assert run("construct", dump(tmp_path / "scene.json", doc), sched, "-o", out) == 2
    rep = json.loads(out.read_text())
    assert rep["status"] == "failure" and rep["requirement"] == "tight"


@pytest.mark.parametrize("name, code", [("strip_derivative", 0), ("half_plane_rationals", 2), ("disk_oscillation", 0)])
def test_check_fixtures(name, code, capsys):
    assert run("check", SCENARIOS / name / "scene.json") == code
    out = capsys.readouterr().out
    assert ("infeasible" in out) == (code == 2)


def read_scan(path):
    with open(path) as fh:
        rows = list(csv.DictReader(fh))
    return [complex(float(r["re"]), float(r["im"])) for r in rows], rows


def test_scan_zero_function(empty_cert, tmp_path, capsys):
    out = tmp_path / "scan.csv"
    assert run("scan", empty_cert, "--z", "2.5,0", "--csv", out) == 0
    vals, _ = read_scan(out)
    assert set(vals) == {0j}
    assert "coverage: 1 of" in capsys.readouterr().out


def test_scan_oscillation_and_horizon_zero(oscillation, tmp_path):
    d, _, cert = oscillation
    rep = tmp_path / "scan.json"
    assert run("scan", cert, "--z", "2.5,0", "--report", rep) == 0
    summary = json.loads(rep.read_text())
    jsonschema.validate({k: v for k, v in summary.items()}, schema("report"))
    assert len(summary["cells_hit"]) >= 2
    out = tmp_path / "h0.csv"
    assert run("scan", cert, "--z", "2.5,0", "--horizon", 0, "--csv", out) == 0
    vals, _ = read_scan(out)
    entries = json.loads(cert.read_text())["f"]["entries"]
    a0 = next(complex(e["re"], e["im"]) for e in entries if e["alpha"] == [0])
    assert vals == [a0]


def test_scan_csv_is_bit_stable(oscillation, tmp_path):
    _, _, cert = oscillation
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    run("scan", cert, "--z", "2.5,0", "--csv", a)
    run("scan", cert, "--z", "2.5,0", "--csv", b)
    assert a.read_bytes() == b.read_bytes()


def test_scan_bad_point(oscillation):
    assert run("scan", oscillation[2], "--z", "two") == 1


def read_points(path):
    with open(path) as fh:
        return np.array([complex(float(r["re"]), float(r["im"])) for r in csv.DictReader(fh)])


def test_exhaustion_disk(tmp_path):
    one = tmp_path / "one.csv"
    assert run("exhaustion", DISK, "--n", 1, "--csv", one) == 0
    assert np.allclose(read_points(one), [0])
    two = tmp_path / "two.csv"
    assert run("exhaustion", DISK, "--n", 2, "--csv", two) == 0
    pts = read_points(two)
    assert np.max(np.abs(pts)) == pytest.approx(0.5, abs=1e-9)
    assert np.min(np.abs(pts)) == 0


def test_exhaustion_half_plane_with_arc_matches_predicate(tmp_path):
    scene = dump(tmp_path / "hp.json", {
        "domains": [{"kind": "half-plane", "angle": math.pi / 2, "offset": 0}],
        "portions": [{"arcs": [{"component": 0, "t0": -1, "t1": 1}]}],
        "center": [[0, 1]],
        "grid": {"validation_density": 0.05},
    })
    out = tmp_path / "l4.csv"
    assert run("exhaustion", scene, "--n", 4, "--csv", out) == 0
    pts = read_points(out)

    def dist_unmarked(z):
        # distance to (-inf, -1] ∪ [1, inf) on the real axis
        x = np.clip(np.abs(z.real), 1, None) * np.sign(z.real + (z.real == 0))
        return np.abs(z - x)

    def inside(z, slack):
        return (z.imag >= -slack) & (np.abs(z) <= 4 + slack) & (dist_unmarked(z) >= 0.25 - slack)

    assert np.all(inside(pts, 1e-9))
    xs, ys = np.meshgrid(np.arange(-4, 4.001, 0.05), np.arange(0, 4.001, 0.05))
    grid = (xs + 1j * ys).ravel()
    strict = grid[inside(grid, -1e-9)]
    gap = np.min(np.abs(strict[:, None] - pts[None, :]), axis=1)
    assert np.max(gap) <= 0.05 * math.sqrt(2)
