"""Smoke tests for the python module and the CLI."""

import os
import subprocess
import tempfile

import pytest

rbmcore = pytest.importorskip("rbmcore")


def make_params(Pr=2.0, R=1.0, b=-1.0, M=0.5, B=1.0):
    p = rbmcore.NondimParams()
    p.Pr, p.R, p.b, p.M, p.B = Pr, R, b, M, B
    return p


def test_nondimensionalize_unit_data():
    pp = rbmcore.PhysicalParams()
    pp.theta_c, pp.theta_a = 2.0, 1.0
    q = rbmcore.nondimensionalize(pp)
    assert q.Pr == pytest.approx(1.0)
    assert q.R == pytest.approx(1.0)
    assert q.b == pytest.approx(-1.0)
    assert q.M == pytest.approx(1.0)
    assert q.B == pytest.approx(1.0)


def test_basic_state_solve():
    prob = rbmcore.Problem(8, 8, 8, 1.0, 1.0, make_params())
    prob.set_conduction_controls()
    rep = prob.solve()
    assert rep["converged"]
    assert rep["picard_iters"] <= 2
    assert rep["max_abs_div"] < 1e-8
    assert prob.max_speed() < 1e-9
    # theta matches the exact conduction profile at a probe cell
    z = (3 + 0.5) / 8.0
    assert prob.theta_at(4, 4, 3) == pytest.approx(
        rbmcore.basic_state_theta(1.0, 1.0, z), abs=1e-9
    )


def test_uniqueness_gap_zero_data_equals_Pr():
    prob = rbmcore.Problem(6, 6, 6, 1.0, 1.0, make_params(Pr=3.0))
    assert prob.uniqueness_gap(1.0) == pytest.approx(3.0)


def test_small_optimization_descends():
    prob = rbmcore.Problem(6, 6, 6, 1.0, 1.0, make_params(Pr=5.0, R=0.1, M=0.1))
    prob.set_conduction_controls()
    prob.set_phi2_uniform(1.1)
    prob.set_targets_basic_state()
    prob.set_weights(0.0, 1e-2, 1e-2, 1e-2, 1e-2, 1e-2)
    out = prob.optimize(tol=1e-5, max_iters=60, seed=3)
    hist = out["cost_history"]
    assert len(hist) >= 2
    assert all(b <= a + 1e-15 for a, b in zip(hist, hist[1:]))
    assert out["stationarity"] < 1e-5


def test_cli_verify_and_solve():
    rbmctl = os.environ.get("RBMCTL")
    if not rbmctl or not os.path.exists(rbmctl):
        pytest.skip("RBMCTL not set")
    cfg = """
[grid]
nx = 6
ny = 6
nz = 6
[params]
Pr = 2.0
R = 1.0
b = -1.0
M = 0.5
B = 1.0
[controls]
phi2_init = 1.0
[weights]
gamma2 = 1.0
gamma3 = 1.0
gamma4 = 1e-2
gamma5 = 1e-2
gamma6 = 1e-2
"""
    with tempfile.TemporaryDirectory() as tmp:
        cfg_path = os.path.join(tmp, "scenario.toml")
        with open(cfg_path, "w", encoding="utf-8") as f:
            f.write(cfg + f'[output]\ndir = "{tmp}/out"\n')
        r = subprocess.run([rbmctl, "verify", "--config", cfg_path], capture_output=True)
        assert r.returncode == 0, r.stdout
        r = subprocess.run([rbmctl, "solve", "--config", cfg_path], capture_output=True)
        assert r.returncode == 0, r.stdout
        assert os.path.exists(os.path.join(tmp, "out", "state.vtk"))
        assert os.path.exists(os.path.join(tmp, "out", "manifest.json"))
        # malformed config exits 1
        bad_path = os.path.join(tmp, "bad.toml")
        with open(bad_path, "w", encoding="utf-8") as f:
            f.write("[weights]\nmode = \"ii\"\ngamma4 = 0.0\n")
        r = subprocess.run([rbmctl, "solve", "--config", bad_path], capture_output=True)
        assert r.returncode == 1


def _write_cfg(tmp, body):
    path = os.path.join(tmp, "cfg.toml")
    with open(path, "w", encoding="utf-8") as f:
        f.write(body)
    return path


def test_cli_exit_codes_for_nonconvergence():
    rbmctl = os.environ.get("RBMCTL")
    if not rbmctl or not os.path.exists(rbmctl):
        pytest.skip("RBMCTL not set")
    with tempfile.TemporaryDirectory() as tmp:
        hostile = _write_cfg(
            tmp,
            f"""
[grid]
nx = 6
ny = 6
nz = 6
[params]
Pr = 1.0
R = 1.0
b = -1.0
M = 800.0
B = 1.0
[controls]
phi2_init = 1.0
phi1_perturb = 2.0
phi2_perturb = 2.0
[weights]
gamma2 = 1.0
gamma3 = 1.0
gamma4 = 1e-2
gamma5 = 1e-2
gamma6 = 1e-2
[solver]
max_iters = 25
[optimizer]
seed = 5
[output]
dir = "{tmp}/hostile"
""",
        )
        r = subprocess.run([rbmctl, "solve", "--config", hostile], capture_output=True)
        assert r.returncode == 2, r.stdout
        # best-iterate artifacts still written
        assert os.path.exists(os.path.join(tmp, "hostile", "state.vtk"))

        zb = _write_cfg(
            tmp,
            f"""
[grid]
nx = 6
ny = 6
nz = 6
[params]
Pr = 5.0
R = 0.1
b = -1.0
M = 0.1
B = 1.0
[controls]
phi2_init = 1.0
phi2_perturb = 0.1
[weights]
gamma2 = 1e-2
gamma3 = 1e-2
gamma4 = 1e-2
gamma5 = 1e-2
gamma6 = 1e-2
[targets]
kind = "basic_state"
[optimizer]
max_iters = 0
seed = 1
[output]
dir = "{tmp}/zb"
""",
        )
        r = subprocess.run([rbmctl, "optimize", "--config", zb], capture_output=True)
        assert r.returncode == 2, r.stdout
