import math

import numpy as np
import pytest

from hjfront import cli, tracker
from hjfront.errors import RunError

from conftest import SHOCK, SQ125


def _run(argv, tmp_path):
    return cli.main(argv + ["--out", str(tmp_path)])


def _table(path):
    return np.loadtxt(path, comments="#", ndmin=2)


def test_run_interface(tmp_path):
    assert _run(["run", "--config", "builtin:interface"], tmp_path) == 0
    u = _table(tmp_path / "u_t1.txt")
    p = _table(tmp_path / "p_t1.txt")
    k = np.argmin(np.abs(u[:, 0] - 0.2))
    assert u[k, 0] == pytest.approx(0.2) and u[k, 1] == pytest.approx(-1 - 0.2 * SQ125, abs=1e-8)
    mid = (p[:, 0] > 1e-6) & (p[:, 0] < SHOCK - 1e-6)
    assert np.allclose(p[mid, 1], -SQ125) and np.all(p[p[:, 0] < 0, 1] == 0)
    tr = _table(tmp_path / "trace.txt")
    assert tr[-1, 1] == pytest.approx(-1.0, abs=1e-12)
    for name in ("events.txt", "monitors.txt", "fronts_t1.txt", "summary.txt"):
        assert (tmp_path / name).read_text().startswith("# ")


def test_run_constant(tmp_path):
    assert _run(["run", "--config", "builtin:constant"], tmp_path) == 0
    p = _table(tmp_path / "p_t1.txt")
    assert np.ptp(p[:, 1]) == 0.0 and p[0, 1] == pytest.approx(0.3, abs=1e-14)


def test_run_deterministic(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    assert _run(["run", "--config", "builtin:smooth", "--seed", "3"], a) == 0
    assert _run(["run", "--config", "builtin:smooth", "--seed", "3"], b) == 0
    for f in sorted(a.iterdir()):
        assert f.read_bytes() == (b / f.name).read_bytes(), f.name


def test_config_errors(tmp_path):
    assert _run(["run", "--delta", "0"], tmp_path) == 1
    bad = tmp_path / "bad.yaml"
    bad.write_text("u0: '0'\nmystery: 1\n")
    assert _run(["run", "--config", str(bad)], tmp_path) == 1
    bad.write_text("u0: 'x +'\n")
    assert _run(["run", "--config", str(bad)], tmp_path) == 1
    bad.write_text("u0: '0'\na: 3.0\n")
    assert _run(["run", "--config", str(bad)], tmp_path) == 1
    assert _run(["run", "--config", "builtin:nope"], tmp_path) == 1


def test_solver_failure_dumps_state(tmp_path, monkeypatch):
    def boom(self, tc, f1, f2):
        raise RunError("forced", self.dump())

    monkeypatch.setattr(tracker.Tracker, "_collide", boom)
    cfg = tmp_path / "c.yaml"
    cfg.write_text("u0: {jumps: [-0.2, 0.2], pieces: ['-x', '0.2', 'x']}\ndomain: [-2, 2]\n")
    assert _run(["run", "--config", str(cfg)], tmp_path) == 2
    assert "fid kind" in (tmp_path / "state_dump.txt").read_text()


def test_riemann(tmp_path, capsys):
    assert _run(["riemann"], tmp_path) == 0
    out = capsys.readouterr().out.splitlines()
    rows = [x.split() for x in out if not x.startswith("#")]
    assert [r[-1] for r in rows] == ["a", "p"]
    assert float(rows[1][0]) == pytest.approx(SHOCK, abs=1e-12)
    assert float(rows[1][1]) == pytest.approx(-SQ125, abs=1e-12)


def test_grid_dump(tmp_path):
    assert _run(["grid-dump", "--config", "builtin:interface", "--delta", "0.2"], tmp_path) == 0
    g = _table(tmp_path / "grid.txt")
    assert g.shape[1] == 5
    for lev in np.unique(g[:, 0]):
        rows = g[g[:, 0] == lev]
        assert np.all(np.diff(rows[:, 2]) > 0)


def test_convergence_constant(tmp_path):
    cfg = tmp_path / "c.yaml"
    cfg.write_text("u0: '0.3*x'\na: 1.5\nconvergence: {deltas: [0.2, 0.1], fd_dx: 0.01}\n")
    assert _run(["convergence", "--config", str(cfg)], tmp_path) == 0
    t = _table(tmp_path / "convergence.txt")
    assert t[0, 2] <= 1e-12 and t[0, 5] <= 1e-12


def test_verify_empty_selection(tmp_path, capsys):
    cfg = tmp_path / "c.yaml"
    cfg.write_text("u0: '0'\nverify: {suites: []}\n")
    assert _run(["verify", "--config", str(cfg)], tmp_path) == 0
    assert "no suites selected" in capsys.readouterr().out
    assert (tmp_path / "verify_summary.txt").read_text() == ""


def test_verify_forged_case_fails(tmp_path):
    cfg = tmp_path / "c.yaml"
    cfg.write_text("preset: stationary_shock\ndelta: 0.1\nverify: {suites: [entropy], forged: {}, test_functions: 2}\n")
    assert _run(["verify", "--config", str(cfg)], tmp_path) == 3
    lines = (tmp_path / "verify_summary.txt").read_text().splitlines()
    assert lines[0] == "entropy FAIL"
    assert lines[1].strip().startswith("case solution") and lines[1].endswith("PASS")
    assert lines[2].strip().startswith("case forged") and lines[2].endswith("FAIL")


@pytest.mark.slow
@pytest.mark.parametrize("preset", ["constant", "interface", "stationary_shock", "rarefaction"])
def test_verify_presets_pass(tmp_path, preset):
    assert _run(["verify", "--config", f"builtin:{preset}"], tmp_path) == 0


def test_verify_single_suite(tmp_path):
    assert _run(["verify", "--config", "builtin:interface", "--suite", "monitors",
                 "--suite", "interface-viscosity"], tmp_path) == 0
    text = (tmp_path / "verify_summary.txt").read_text()
    assert text.startswith("monitors PASS") and "interface-viscosity PASS" in text
