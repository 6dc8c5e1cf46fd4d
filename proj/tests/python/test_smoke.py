import math
from pathlib import Path

import numpy as np
import pytest

import zorsn

CONFIGS = Path(__file__).resolve().parents[1] / "configs"


def test_quadratic_solve_converges():
    q = zorsn.make_quadratic(8, [1, 2, 3, 4, 5, 6, 7, 8], seed=3)
    cfg = zorsn.SolverConfig()
    cfg.m = 8
    cfg.m_max = 8
    cfg.alpha = 1e-5
    cfg.f_target = q.f_star
    cfg.tolerance = 1e-8
    trace = zorsn.zo_rsn_solve(q.value, q.start_point, cfg)
    assert trace.outcome == "Converged"
    assert trace.final_f - q.f_star <= 1e-8
    assert trace.total_queries == trace.records[-1].queries_cumulative


def test_python_callable_counts_queries():
    calls = []

    def f(x):
        calls.append(x.copy())
        return 0.5 * float(x @ x)

    s = np.eye(4)[:, :3]
    g, h, queries = zorsn.sketched_model(f, np.ones(4), s, 1e-3)
    assert queries == zorsn.model_query_count(3) == 10
    assert len(calls) == 10
    np.testing.assert_allclose(h, np.eye(3), atol=1e-6)
    np.testing.assert_allclose(g, np.ones(3) + 0.5e-3, atol=1e-9)


def test_attack_stays_in_box():
    a = zorsn.make_toy_attack(16, 5, weights_seed=21, instance_seed=2, epsilon=0.3)
    cfg = zorsn.SolverConfig()
    cfg.alpha = 0.1
    cfg.m_max = 16
    cfg.query_budget = 20000
    cfg.record_iterates = True
    trace = zorsn.zo_rsn_sqp_solve(a.value, a.x_nat, 0.3, -a.omega, cfg)
    for x in trace.iterates:
        assert np.max(np.abs(x - a.x_nat)) <= 0.3 + 1e-12
    fs = [r.f_value for r in trace.records]
    assert all(b <= a_ for a_, b in zip(fs, fs[1:]))


def test_box_qp_clamps():
    lam = zorsn.solve_box_qp(np.array([-2.0]), np.array([[1.0]]), 1.0, np.array([-0.5]), np.array([0.5]))
    assert lam[0] == pytest.approx(0.5)


def test_theory_values():
    t = zorsn.TheoryInputs()
    t.n, t.m, t.mu, t.lambda_s1 = 100, 4, 1.0, 1.0
    assert zorsn.speedup_factors(t)["iteration"] == pytest.approx(359.04, rel=1e-12)
    h = np.diag([1.0, 4.0])
    assert zorsn.compute_rho_exact(h, "coordinate", 1) == pytest.approx(0.5)


def test_errors_are_typed():
    cfg = zorsn.SolverConfig()
    cfg.m = 0
    with pytest.raises(zorsn.ConfigError):
        zorsn.zo_rsn_solve(lambda x: float(x @ x), np.ones(3), cfg)
    with pytest.raises(zorsn.Error):
        zorsn.make_quadratic(3, [1.0, -1.0, 2.0])


def test_run_command(tmp_path):
    code, out, err = zorsn.run_command("solve", str(CONFIGS / "solve_quadratic.ini"), out_dir=str(tmp_path))
    assert code == 0, err
    assert (tmp_path / "trace.csv").exists()
    code, _, err = zorsn.run_command("solve", str(CONFIGS / "bad_missing_gamma.ini"), out_dir=str(tmp_path))
    assert code == 1
    assert "gamma" in err
