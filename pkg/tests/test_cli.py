import json
import subprocess
import sys

import numpy as np
import pytest

from thinbands.cli import RunConfig, main
from thinbands.cone_solver import KSequence, solve_widths
from thinbands.errors import ConfigurationError
from thinbands.surface_sections import SurfaceModel


def run(tmp_path, command, cfg=None, extra=(), name="out"):
    argv = [command, "--out", str(tmp_path / name)]
    if cfg is not None:
        path = tmp_path / f"{name}.json"
        path.write_text(json.dumps(cfg))
        argv += ["--config", str(path)]
    return main(argv + list(extra))


# -- config -----------------------------------------------------------------

def test_config_defaults_and_digest():
    a = RunConfig.from_dict({"command": "widths"})
    b = RunConfig.from_dict({"command": "widths", "threads": 8})
    assert a.ks == {"doubling": {"k0": 2}}
    assert a.digest == b.digest and len(a.digest) == 16
    assert a.digest != RunConfig.from_dict({"command": "widths", "depth": 10}).digest
    assert a.header()[0] == "thinbands widths"


@pytest.mark.parametrize("doc", [
    {"command": "widths", "bogus": 1},
    {"command": "widths", "depth": -1},
    {"command": "widths", "tol": 0},
    {"command": "section", "radius": 0},
    {"command": "widths", "ks": {"bogus": 1}},
])
def test_config_rejects_bad_documents(doc):
    with pytest.raises(ConfigurationError):
        RunConfig.from_dict(doc)


# -- exit codes -----------------------------------------------------------------

def test_widths_ok(tmp_path, capsys):
    assert run(tmp_path, "widths", {"ks": {"constant": 1}, "depth": 60, "tol": 1e-20}) == 0
    out = capsys.readouterr().out
    assert "stage inequalities" in out and "verified" in out
    text = (tmp_path / "out" / "widths.csv").read_text().splitlines()
    assert text[0] == "# thinbands widths" and text[1].startswith("# config_sha256=")
    assert text[3].startswith("stage,k,w1")
    assert json.loads((tmp_path / "out" / "widths.json").read_text())["stage_inequalities"]


def test_usage_errors_exit_1(tmp_path, capsys):
    assert run(tmp_path, "widths", {"depth": -1}) == 1
    assert run(tmp_path, "widths", {"command": "rips"}) == 1
    with pytest.raises(SystemExit) as info:
        main(["widths", "--nope"])
    assert info.value.code == 1
    with pytest.raises(SystemExit) as info:
        main(["frobnicate"])
    assert info.value.code == 1
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert main(["widths", "--config", str(bad)]) == 1


def test_accuracy_error_exit_2(tmp_path, capsys):
    assert run(tmp_path, "widths", {"depth": 6, "tol": 1e-40}) == 2
    assert "achieved" in capsys.readouterr().err


def critical_level_config():
    # a level placed exactly on a singular value for the first sampled seed
    sol = solve_widths(KSequence.doubling(2), 24, tol=1e300)
    m = SurfaceModel.from_solution(sol)
    n1, n2 = (int(x) for x in np.random.default_rng(0).integers(-1000, 1000, size=2))
    H = m.H
    a = 2 * (H[0] * n1 + H[1] * n2 + 5 * H[2]) + m.w[0]
    return {"levels": [str(a)], "per_level": 1, "trace_steps": 0, "radius": 20}


def test_critical_level_exit_3_and_jitter(tmp_path, capsys):
    cfg = critical_level_config()
    assert run(tmp_path, "section", cfg) == 3
    assert run(tmp_path, "section", cfg, extra=["--jitter"], name="jit") == 0


def test_verify_passes_and_broken_table_exits_4(tmp_path, capsys):
    assert run(tmp_path, "verify") == 0
    out = capsys.readouterr().out
    assert "FAIL" not in out and out.count("PASS") >= 7
    assert run(tmp_path, "verify", {"r_perturbation": [[0, 2, 8, 1]]}, name="broken") == 4
    doc = json.loads((tmp_path / "broken" / "verify.json").read_text())
    assert doc["failed"]


# -- commands --------------------------------------------------------------------

def test_rips_short_chain(tmp_path, capsys):
    assert run(tmp_path, "rips", {"rips_steps": 6}) == 0
    rows = (tmp_path / "out" / "rips.csv").read_text().splitlines()[4:]
    assert len(rows) == 6 and all(r.endswith(",1,1") for r in rows)
    assert json.loads((tmp_path / "out" / "complex.json").read_text())["format"]


def test_rips_zero_steps_prints_complex(tmp_path, capsys):
    assert run(tmp_path, "rips", {"rips_steps": 0}) == 0
    out = capsys.readouterr().out
    assert '"bands"' in out


def test_iet_reports_balanced_cone(tmp_path, capsys):
    assert run(tmp_path, "iet", {"orbit_length": 100000}) == 0
    doc = json.loads((tmp_path / "out" / "iet.json").read_text())
    assert abs(doc["ratio"] - 1) < 1e-6 and doc["sin_angle"] > 0 and doc["dense"]
    orbit = (tmp_path / "out" / "orbit.csv").read_text().splitlines()
    assert orbit[3] == "step,transversal,offset,label"
    assert len(orbit) == 4 + 10_000


def test_section_outputs(tmp_path, capsys):
    cfg = {"level_count": 3, "per_level": 2, "radius": 60, "trace_steps": 2000, "svg": True}
    assert run(tmp_path, "section", cfg) == 0
    d = tmp_path / "out"
    assert (d / "gamma.svg").read_text().startswith("<!-- config_sha256=")
    comps = (d / "components.csv").read_text().splitlines()
    assert len(comps) == 3 + 1 + 6


def test_determinism(tmp_path, capsys):
    cfg = {"level_count": 2, "per_level": 2, "radius": 60, "trace_steps": 1000}
    run(tmp_path, "section", cfg, name="a")
    run(tmp_path, "section", cfg, extra=["--threads", "3"], name="b")
    run(tmp_path, "iet", {"orbit_length": 5000}, name="c")
    run(tmp_path, "iet", {"orbit_length": 5000}, name="d")
    for x, y in (("a", "b"), ("c", "d")):
        files = sorted(p.name for p in (tmp_path / x).iterdir())
        for f in files:
            assert (tmp_path / x / f).read_bytes() == (tmp_path / y / f).read_bytes(), f


def test_seed_flag_changes_output(tmp_path, capsys):
    cfg = {"orbit_length": 5000}
    run(tmp_path, "iet", cfg, name="a")
    run(tmp_path, "iet", cfg, extra=["--seed", "9"], name="b")
    a = (tmp_path / "a" / "orbit.csv").read_text()
    b = (tmp_path / "b" / "orbit.csv").read_text()
    assert "seed=0" in a and "seed=9" in b and a != b


def test_console_entry_point():
    res = subprocess.run([sys.executable, "-m", "thinbands.cli", "widths", "--seed", "x"],
                         capture_output=True, text=True)
    assert res.returncode == 1 and "error" in res.stderr
