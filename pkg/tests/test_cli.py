import csv
import json
import math
import shutil
import subprocess

import numpy as np
import pytest

from fracresolvent import ConfigError
from fracresolvent.cli import main, run, validate_config

SMALL_GRID = {"start": 0.01, "stop": 5.0, "points": 12}


def _run(tmp_path, cfg, *extra):
    cfg_path = tmp_path / "cfg.json"
    cfg_path.write_text(json.dumps(cfg))
    out = tmp_path / "out"
    code = main(["--config", str(cfg_path), "--out", str(out), *extra])
    return code, out


def _report(out):
    return json.loads((out / "report.json").read_text())


def _csv(path):
    with open(path) as fh:
        return list(csv.reader(fh))


class TestVerify:
    def test_prop_lav_random(self, tmp_path):
        code, out = _run(tmp_path, {"command": "verify", "scenario": {"name": "prop_lav_random"}, "seed": 11})
        rep = _report(out)
        assert code == 0
        assert rep["schema"] == 1 and rep["passed"]
        assert len(rep["checks"]) == 100
        assert all(c["residual"] <= 1e-10 for c in rep["checks"])

    def test_closure_identity(self, tmp_path):
        cfg = {"command": "verify", "scenario": {"name": "closure_identity_random", "count": 20, "dim": 3}}
        code, out = _run(tmp_path, cfg)
        assert code == 0 and len(_report(out)["checks"]) == 20

    def test_transform_identities(self, tmp_path):
        code, out = _run(tmp_path, {"command": "verify", "scenario": {"name": "transform_identities"}})
        assert code == 0
        assert {c["name"] for c in _report(out)["checks"]} == {"bessel_identity", "wright_identity"}


class TestSubordinate:
    def test_bessel_scalar(self, tmp_path):
        code, out = _run(tmp_path, {"command": "subordinate", "scenario": {"name": "bessel_scalar"}})
        assert code == 0
        rows = _csv(out / "family.csv")
        assert rows[0] == ["t", "re_0_0", "im_0_0"]
        t = np.array([float(r[0]) for r in rows[1:]])
        vals = np.array([float(r[1]) for r in rows[1:]])
        np.testing.assert_allclose(vals, 1 - np.exp(-t), atol=1e-6)

    def test_wright_scalar(self, tmp_path):
        cfg = {"command": "subordinate", "scenario": {"name": "wright_scalar", "sigma": -0.5, "eta": 2.0, "grid": SMALL_GRID}}
        code, out = _run(tmp_path, cfg)
        assert code == 0
        assert len(_csv(out / "family.csv")) == 13

    def test_family_from_pencil(self, tmp_path):
        cfg = {"command": "subordinate",
               "scenario": {"name": "family", "operator": {"pencil": {"B": [[1, 0], [0, 0]], "L": [[-1, 0], [0, 1]]}},
                            "kernel_a": {"power": 1}, "kernel_k": {"power": 1}, "grid": SMALL_GRID}}
        code, out = _run(tmp_path, cfg)
        assert code == 0
        assert _csv(out / "family.csv")[0][:3] == ["t", "re_0_0", "im_0_0"]

    def test_numerical_error_exit(self, tmp_path):
        # gamma must exceed beta + 1/2
        cfg = {"command": "subordinate", "scenario": {"name": "bessel_scalar", "gamma": 0.3}}
        code, out = _run(tmp_path, cfg)
        assert code == 3
        assert not out.exists()

    def test_failed_check_exit(self, tmp_path):
        cfg = {"command": "subordinate", "scenario": {"name": "wright_scalar", "grid": SMALL_GRID}}
        code, out = _run(tmp_path, cfg, "--tol-scale", "1e-30")
        assert code == 1
        rep = _report(out)
        assert not rep["passed"] and rep["tol_scale"] == 1e-30


class TestSolveAndDemo:
    def test_reversed_heat(self, tmp_path):
        cfg = {"command": "solve", "scenario": {"name": "reversed_heat", "mode": 2, "alpha": 0.5, "size": 32, "times": [1.0]}}
        code, out = _run(tmp_path, cfg)
        assert code == 0
        row = _csv(out / "solution.csv")[1]
        # grid point 4 of 32 is x = pi/4, where sin(2x) = 1
        from fracresolvent import mittag_leffler

        assert float(row[1 + 2 * 4]) == pytest.approx(mittag_leffler(0.5, 1, -0.25), abs=1e-10)

    def test_poisson_wave(self, tmp_path):
        cfg = {"command": "demo", "scenario": {"name": "poisson_wave", "u1": [1.0, 0.5], "v1": [0.0, 1.0],
                                               "density": [1.0] * 16, "grid": SMALL_GRID}}
        code, out = _run(tmp_path, cfg)
        assert code == 0
        rows = _csv(out / "trajectory.csv")
        assert rows[0] == ["t", "u_0", "u_1", "v_0", "v_1"]

    def test_contour(self, tmp_path):
        code, out = _run(tmp_path, {"command": "demo", "scenario": {"name": "contour_scalar"}})
        assert code == 0
        assert _report(out)["checks"][0]["residual"] <= 1e-6


class TestConfig:
    @pytest.mark.parametrize("cfg", [
        {"command": "verify"},
        {"command": "bake", "scenario": {"name": "x"}},
        {"command": "verify", "scenario": {"name": "bessel_scalar"}},
        {"command": "verify", "scenario": {"name": "prop_lav_random", "count": 0}},
        {"command": "verify", "scenario": {"name": "prop_lav_random", "tolerances": {"prop_lav": -1}}},
        {"command": "subordinate", "scenario": {"name": "family", "operator": {"matrix": [[1]]}}},
        {"schema": 2, "command": "verify", "scenario": {"name": "transform_identities"}},
    ])
    def test_malformed(self, tmp_path, cfg):
        code, out = _run(tmp_path, cfg)
        assert code == 2
        assert not out.exists()

    def test_unreadable(self, tmp_path):
        bad = tmp_path / "cfg.json"
        bad.write_text("{not json")
        out = tmp_path / "out"
        assert main(["--config", str(bad), "--out", str(out)]) == 2
        assert main(["--config", str(tmp_path / "missing.json"), "--out", str(out)]) == 2
        assert not out.exists()

    def test_bad_tol_scale_and_seed(self, tmp_path):
        cfg = {"command": "verify", "scenario": {"name": "transform_identities"}}
        assert _run(tmp_path, cfg, "--tol-scale", "0")[0] == 2
        assert _run(tmp_path, cfg, "--seed", "-4")[0] == 2

    def test_validate_raises(self):
        with pytest.raises(ConfigError):
            validate_config({"command": "verify", "scenario": {"name": "nope"}})

    def test_tolerance_override(self, tmp_path):
        cfg = {"command": "demo", "scenario": {"name": "contour_scalar", "tolerances": {"residue_oracle": 1e-30}}}
        code, out = _run(tmp_path, cfg)
        assert code == 1
        checks = {c["name"]: c for c in _report(out)["checks"]}
        assert checks["residue_oracle"]["tolerance"] == 1e-30 and checks["cauchy"]["pass"]


def test_deterministic_output(tmp_path):
    cfg = {"command": "verify", "scenario": {"name": "prop_lav_random", "count": 10}}
    a = tmp_path / "a"
    b = tmp_path / "b"
    assert run(cfg, a, seed=5) == 0
    assert run(cfg, b, seed=5) == 0
    assert (a / "report.json").read_bytes() == (b / "report.json").read_bytes()
    cfg = {"command": "subordinate", "scenario": {"name": "wright_scalar", "grid": SMALL_GRID}}
    run(cfg, a, seed=1)
    run(cfg, b, seed=1)
    assert (a / "family.csv").read_bytes() == (b / "family.csv").read_bytes()


def test_seed_changes_samples(tmp_path):
    cfg = {"command": "verify", "scenario": {"name": "prop_lav_random", "count": 5}}
    run(cfg, tmp_path / "a", seed=1)
    run(cfg, tmp_path / "b", seed=2)
    ra = json.loads((tmp_path / "a" / "report.json").read_text())
    rb = json.loads((tmp_path / "b" / "report.json").read_text())
    assert [c["residual"] for c in ra["checks"]] != [c["residual"] for c in rb["checks"]]
    assert ra["seed"] == 1 and math.isfinite(rb["checks"][0]["residual"])


@pytest.mark.skipif(shutil.which("fracresolvent") is None, reason="console script not installed")
def test_console_script(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"command": "demo", "scenario": {"name": "contour_scalar"}}))
    proc = subprocess.run(["fracresolvent", "--config", str(cfg), "--out", str(tmp_path / "o")],
                          capture_output=True, text=True)
    assert proc.returncode == 0
    assert proc.stdout.startswith("PASS")
