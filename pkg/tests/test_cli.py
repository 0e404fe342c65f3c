import csv
import json
import shutil
import subprocess
import sys

import pytest

from bshadow.cli import main, thread_cap
from bshadow.io import MalformedFile

import oracles


def run(*args):
    return main([str(a) for a in args])


def read(path):
    return json.loads(path.read_text())


@pytest.fixture(scope="module")
def f2_certificate(tmp_path_factory):
    """certificate.json for F2 with the shadowing constants at l = 5."""
    out = tmp_path_factory.mktemp("cert")
    cfg = out / "cfg.json"
    cfg.write_text(json.dumps({"group": "builtin:f2.json", "seed": 0, "radius": 8, "constants": {"l": 5}}))
    assert run("certify", "--config", cfg, "--out", out) == 0
    return out / "certificate.json"


def shadow_config(tmp_path, cert, orbits, **shadow):
    cfg = tmp_path / "run.json"
    cfg.write_text(json.dumps({
        "group": "builtin:f2.json",
        "seed": 0,
        "certificate": str(cert),
        "constants": {"l": 5},
        "shadow": {"check_radius": 3, **shadow},
        "pseudo_orbits": orbits,
    }))
    return cfg


ZERO = {"name": "zero", "x0": {"prefix": "", "period": "a"}, "noise": 0, "support_radius": 56}
NOISY = {"name": "noisy", "x0": {"prefix": "ab", "period": "aB"}, "noise": 40, "support_radius": 56, "seed": 7}


# -- certify -----------------------------------------------------------------------


def test_certify_free_group(tmp_path):
    assert run("certify", "--group", "builtin:f2.json", "--radius", 5, "--seed", 0, "--out", tmp_path) == 0
    doc = read(tmp_path / "certificate.json")
    assert doc["delta"]["delta"] == 0 and doc["delta"]["stabilized"]
    assert doc["status"] == "certified"
    assert "constants" not in doc


def test_certify_with_constants(f2_certificate):
    doc = read(f2_certificate)
    c = doc["constants"]
    assert (c["J"], c["C"], c["L"]) == (6, 13, 20)


def test_certify_z2_does_not_stabilize(tmp_path):
    assert run("certify", "--group", "builtin:z2.json", "--radius", 3, "--out", tmp_path) == 0
    d = read(tmp_path / "certificate.json")["delta"]
    assert d["delta"] == 3 and not d["stabilized"]


def test_budget_gives_partial(tmp_path):
    code = run("certify", "--group", "builtin:genus2.json", "--radius", 2, "--budget", 50, "--out", tmp_path)
    assert code == 2
    doc = read(tmp_path / "certificate.json")
    assert doc["status"] == "partial" and doc["delta"]["truncated"]


def test_split_profiles_grow_linearly(tmp_path):
    run("certify", "--group", "builtin:f2.json", "--radius", 6, "--out", tmp_path)
    for p in read(tmp_path / "certificate.json")["divergence_profiles"]:
        c, c2 = p["c"], p["c_prime"]
        want = [min(oracles.free_distance(c[:t], c2[:s]) for s in range(len(c2) + 1)) for t in range(len(c) + 1)]
        assert p["profile"] == want
        assert p["profile"][-1] == 6 - p["split"]


# -- malformed input -----------------------------------------------------------------


def test_missing_group_file(tmp_path, capsys):
    assert run("certify", "--group", tmp_path / "nope.json", "--out", tmp_path) == 1
    assert "nope.json" in capsys.readouterr().err


def test_malformed_json_reports_line(tmp_path, capsys):
    bad = tmp_path / "g.json"
    bad.write_text('{\n  "generators": ["a", "b"],\n  "mode": free\n}\n')
    assert run("certify", "--group", bad, "--out", tmp_path) == 1
    assert "g.json:3" in capsys.readouterr().err


def test_bad_group_field_reports_key_line(tmp_path, capsys):
    bad = tmp_path / "g.json"
    bad.write_text('{\n  "generators": ["a"],\n  "mode": "hyperbolic"\n}\n')
    assert run("certify", "--group", bad, "--out", tmp_path) == 1
    assert "g.json:" in capsys.readouterr().err


def test_radius_beyond_r_max(tmp_path):
    assert run("certify", "--group", "builtin:z2.json", "--radius", 21, "--out", tmp_path) == 1


def test_plotdata_needs_inputs(tmp_path):
    assert run("plotdata", "--out", tmp_path) == 1


def test_shadow_needs_seed(tmp_path, f2_certificate):
    cfg = tmp_path / "run.json"
    cfg.write_text(json.dumps({"group": "builtin:f2.json", "certificate": str(f2_certificate),
                               "pseudo_orbits": [ZERO]}))
    assert run("shadow", "--config", cfg, "--out", tmp_path) == 1


def test_thread_cap(monkeypatch):
    monkeypatch.setenv("BSHADOW_THREADS", "4")
    assert thread_cap() == 4
    for bad in ("0", "many"):
        monkeypatch.setenv("BSHADOW_THREADS", bad)
        with pytest.raises(MalformedFile):
            thread_cap()


# -- shadow ------------------------------------------------------------------------


def test_shadow_and_plotdata(tmp_path, f2_certificate):
    cfg = shadow_config(tmp_path, f2_certificate, [ZERO, NOISY])
    assert run("shadow", "--config", cfg, "--out", tmp_path) == 0
    report = read(tmp_path / "report.json")
    assert report["status"] == "ok"
    runs = {r["name"]: r for r in report["runs"]}
    assert runs["zero"]["classification"] == runs["noisy"]["classification"] == "pass"
    assert runs["zero"]["recovers_x0"] is True
    assert runs["zero"]["shadow"]["shadow"] == "a^∞"
    assert runs["zero"]["verify"]["checked"] == 1 + 4 + 12 + 36
    assert not (tmp_path / "witness.json").exists()

    assert run("plotdata", "--out", tmp_path) == 0
    heads = {}
    for name in ("delta_vs_radius", "divergence_profile", "shadow_depth"):
        with open(tmp_path / f"{name}.csv", newline="") as fh:
            rows = list(csv.reader(fh))
        heads[name] = rows[0]
        assert len(rows) > 1
    assert heads == {"delta_vs_radius": ["radius", "delta"],
                     "divergence_profile": ["pair", "t", "distance"],
                     "shadow_depth": ["run", "depth", "distance"]}


def test_negative_control_is_invalid_input(tmp_path, f2_certificate):
    bad = dict(ZERO, name="corrupted", points={"a": {"prefix": "", "period": "B"}})
    cfg = shadow_config(tmp_path, f2_certificate, [bad])
    assert run("shadow", "--config", cfg, "--out", tmp_path) == 0
    [r] = read(tmp_path / "report.json")["runs"]
    assert r["classification"] == "invalid input"
    assert {"kind": "membership", "f": "a", "g": "1", "fg": "a"} in r["pseudo_orbit_check"]["violations"]


def test_invalid_point_is_invalid_input(tmp_path, f2_certificate):
    bad = dict(ZERO, name="bad-period", x0={"prefix": "a", "period": "aA"})
    cfg = shadow_config(tmp_path, f2_certificate, [bad])
    assert run("shadow", "--config", cfg, "--out", tmp_path) == 0
    assert read(tmp_path / "report.json")["runs"][0]["classification"] == "invalid input"


def test_reruns_are_byte_identical(tmp_path, f2_certificate):
    cfg = shadow_config(tmp_path, f2_certificate, [NOISY], check_radius=2)
    a, b = tmp_path / "a", tmp_path / "b"
    assert run("shadow", "--config", cfg, "--out", a) == 0
    assert run("shadow", "--config", cfg, "--out", b) == 0
    assert (a / "report.json").read_bytes() == (b / "report.json").read_bytes()


def test_console_script(tmp_path):
    exe = shutil.which("bshadow")
    cmd = [exe] if exe else [sys.executable, "-m", "bshadow.cli"]
    proc = subprocess.run(cmd + ["certify", "--group", "builtin:f2.json", "--radius", "3", "--out", str(tmp_path)],
                          capture_output=True, text=True)
    assert proc.returncode == 0, proc.stderr
    assert (tmp_path / "certificate.json").is_file()
