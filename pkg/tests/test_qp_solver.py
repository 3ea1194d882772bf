import numpy as np
import pytest

from polygauge import build_l1, build_linf, closed_form_solution, eval_gauge, solve_p0, solve_p_lambda
from polygauge.errors import InputError, SolverFailure
from polygauge.qp_solver import solve_qp

from oracles import positive_pool

EYE = np.eye(2)


def objective(phi, H, y, lam, x):
    return 0.5 * np.sum((y - phi @ x) ** 2) + lam * eval_gauge(H, x)


def test_p_lambda_examples():
    r = solve_p_lambda(EYE, build_l1(2), [3.0, 0.0], 0.2)
    assert r.x == pytest.approx([2.8, 0.0], abs=1e-8)
    assert r.support.indices == (0, 1)
    r = solve_p_lambda(EYE, build_linf(2), [2.1, 1.0], 0.05)
    assert r.x == pytest.approx([2.05, 1.0], abs=1e-8)
    assert r.kkt_residual <= 1e-8


def test_large_lambda_gives_zero():
    r = solve_p_lambda(EYE, build_l1(2), [3.0, -1.0], 100.0)
    assert np.abs(r.x).max() <= 1e-8
    assert r.support is None


def test_p_lambda_input_checks():
    with pytest.raises(InputError):
        solve_p_lambda(EYE, build_l1(2), [1.0, 0.0], 0.0)
    with pytest.raises(InputError):
        solve_p_lambda(EYE, build_l1(3), [1.0, 0.0], 1.0)


def test_p0_examples():
    r = solve_p0(EYE, build_linf(2), [2.0, 1.0])
    assert r.x == pytest.approx([2.0, 1.0]) and r.objective == pytest.approx(2.0)
    r = solve_p0([[1.0, 1.0]], build_l1(2), [2.0])
    assert r.objective == pytest.approx(2.0)
    assert r.x.sum() == pytest.approx(2.0) and r.x.min() >= -1e-12
    r = solve_p0(EYE, build_l1(2), [0.0, 0.0])
    assert r.x == pytest.approx([0.0, 0.0]) and r.objective == pytest.approx(0.0)


def test_p0_infeasible():
    r = solve_p0(np.array([[1.0, 0.0], [1.0, 0.0]]), build_l1(2), [1.0, 2.0])
    assert r.status == "infeasible" and r.x is None


def test_solver_failure_is_reported():
    P = np.eye(2)
    with pytest.raises(SolverFailure) as err:
        solve_qp(P, np.array([1.0, -1.0]), np.eye(2), np.zeros(2), max_iter=1)
    assert "residual" in err.value.diagnostics


def test_crosscheck_attaches_witness():
    r = solve_p_lambda(EYE, build_linf(2), [2.1, 1.0], 0.05, crosscheck=True)
    assert r.optimality is not None
    assert r.optimality.v == pytest.approx([1.0], abs=1e-6)


def test_mutual_objective_check():
    for entry in positive_pool("l1", 8, base_seed=21):
        inst, H, y, lam = entry["inst"], entry["H"], entry["y"], entry["lam"]
        cf = closed_form_solution(inst.phi, H, y, lam, entry["sup"], entry["geom"])
        r = solve_p_lambda(inst.phi, H, y, lam)
        f_cf = objective(inst.phi, H, y, lam, cf.x_hat)
        f_qp = objective(inst.phi, H, y, lam, r.x)
        assert f_qp <= f_cf + 1e-8 and f_cf <= f_qp + 1e-8


def test_gauge_nonincreasing_as_lambda_grows():
    rng = np.random.default_rng(4)
    H = build_l1(5)
    for _ in range(5):
        phi = rng.standard_normal((4, 5))
        y = rng.standard_normal(4)
        values = [eval_gauge(H, solve_p_lambda(phi, H, y, lam).x) for lam in (1.0, 0.3, 0.1, 0.03)]
        assert all(b >= a - 1e-8 for a, b in zip(values, values[1:]))


def test_deterministic():
    rng = np.random.default_rng(6)
    phi = rng.standard_normal((4, 6))
    y = rng.standard_normal(4)
    a = solve_p_lambda(phi, build_linf(6), y, 0.2)
    b = solve_p_lambda(phi, build_linf(6), y, 0.2)
    assert np.array_equal(a.x, b.x) and a.iterations == b.iterations
