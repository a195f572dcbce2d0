import json

import pytest

from topodd.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def run_json(capsys, *argv):
    code, out, _ = run(capsys, *argv)
    return code, json.loads(out)


@pytest.mark.parametrize("flag,value,faces,edges", [("--torus", "6", 36, 72), ("--planar", "1x2", 2, 7),
                                                    ("--planar", "3x3", 9, 24)])
def test_lattice(capsys, flag, value, faces, edges):
    code, doc = run_json(capsys, "lattice", flag, value)
    assert code == 0 and doc["schema"] == "topodd.lattice/1"
    assert (doc["faces"], doc["edges"]) == (faces, edges)
    assert doc["dual"]["edges"] == edges


@pytest.mark.parametrize("argv", [["lattice"], ["lattice", "--planar", "2by3"],
                                  ["lattice", "--torus", "1"], ["nonsense"],
                                  ["verify", "--group", "Q", "--class", "HSE"]])
def test_usage_errors(capsys, argv):
    assert run(capsys, *argv)[0] == 2


@pytest.mark.parametrize("group,cls,shape", [
    ("Txz", "HSE", ["--torus", "3"]),
    ("Bxz", "local", ["--torus", "2"]),
    ("Txz", "nn", ["--torus", "3"]),
    ("Bz", "heisenberg", ["--torus", "3"]),
    ("Bxz", "logical", ["--torus", "3"]),
    ("Txz", "HSE", ["--planar", "1x2"]),
    ("Txz", "nn", ["--planar", "3x3"]),
])
def test_verify_passes(capsys, group, cls, shape):
    code, doc = run_json(capsys, "verify", "--group", group, "--class", cls, *shape)
    assert code == 0 and doc["status"] == "pass", doc


def test_verify_zonly_reports_survivors(capsys):
    code, doc = run_json(capsys, "verify", "--group", "Tz", "--class", "HSE-zonly")
    assert code == 0
    assert len(doc["surviving_terms"]) == 18
    assert all("E_z" in t for t in doc["surviving_terms"])


def test_verify_failure_exit_code(capsys):
    # the T groups are themselves logical operators and do not preserve the other logicals
    code, doc = run_json(capsys, "verify", "--group", "Txz", "--class", "logical", "--torus", "3")
    assert code == 1 and doc["status"] == "fail"
    assert doc["checks"][0]["counterexample"]


def test_groups_dump(capsys, tmp_path):
    out = tmp_path / "g.json"
    assert run(capsys, "groups", "dump", "--group", "Bz", "--torus", "2", "--out", str(out))[0] == 0
    doc = json.loads(out.read_text())
    assert doc["order"] == 8 and len(doc["elements"]) == 8


def test_schedule(capsys):
    code, doc = run_json(capsys, "schedule", "--group", "Tz", "--mode", "eulerian", "--tau", "0.1")
    assert code == 0 and doc["schema"] == "topodd.schedule/1"
    assert len(doc["events"]) == 8
    code, doc = run_json(capsys, "schedule", "--group", "Txz", "--mode", "eulerian")
    assert len(doc["events"]) == 64
    code, doc = run_json(capsys, "schedule", "--group", "Tz", "--mode", "eulerian",
                         "--logical", "+ Z{4,5,6}")
    assert sum(e["kind"] == "slot" for e in doc["events"]) == 4


def test_simulate_t0(capsys):
    code, out, _ = run(capsys, "simulate", "--schedule", "none", "--t", "0")
    assert code == 0
    assert out.splitlines() == ["time,fidelity,stderr", "0,1.000000000000,0.000e+00"]


def test_simulate_manifest_roundtrip(capsys, tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"omega_ab": 0.03, "schedule": "Tz:eulerian", "t_final": 1.6,
                               "bath": {"mode": "ou", "strength": 0.02, "trajectories": 16, "seed": 3}}))
    a = tmp_path / "a.csv"
    assert run(capsys, "simulate", "--config", str(cfg), "--out", str(a))[0] == 0
    manifest = json.loads((tmp_path / "a.csv.manifest.json").read_text())
    assert manifest["schema"] == "topodd.manifest/1" and manifest["seeds"]["bath"] == 3
    b = tmp_path / "b.csv"
    assert run(capsys, "simulate", "--config", str(tmp_path / "a.csv.manifest.json"), "--out", str(b))[0] == 0
    assert a.read_bytes() == b.read_bytes()


def test_simulate_bad_config(capsys, tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"nonsense": 1}))
    assert run(capsys, "simulate", "--config", str(cfg))[0] == 2
    assert run(capsys, "simulate", "--config", str(tmp_path / "missing.json"))[0] == 2


def test_reproduce_fig7a(capsys, tmp_path):
    code, doc = run_json(capsys, "reproduce", "fig7a", "--out", str(tmp_path))
    assert code == 0
    finals = doc["final_fidelity"]["fig7a"]
    assert finals["ideal"] > finals["free"] and finals["eulerian"] > finals["free"]
    assert sorted(p.name for p in tmp_path.iterdir()) == [
        "fig7a_eulerian.csv", "fig7a_free.csv", "fig7a_ideal.csv", "manifest.json"]
    first = (tmp_path / "fig7a_ideal.csv").read_bytes()
    run(capsys, "reproduce", "fig7a", "--out", str(tmp_path))
    assert (tmp_path / "fig7a_ideal.csv").read_bytes() == first


def test_calibrate(capsys):
    code, doc = run_json(capsys, "calibrate")
    assert code == 0 and abs(doc["free_fidelity"] - 0.882) <= 0.005
