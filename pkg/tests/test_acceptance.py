"""Acceptance criteria at their stated tolerances.

Run with ``pytest tests/test_acceptance.py -s`` to see one PASS/FAIL line
per criterion.
"""

import numpy as np
import pytest

from polygauge import (
    LinearProgram,
    build_block_l1_linf,
    build_l1,
    build_linf,
    closed_form_solution,
    constants,
    eval_gauge,
    face_coordinates,
    h_support,
    ic,
    lambda_range,
    noiseless_certificate,
    pinv,
    solve_lp,
    solve_p0,
    solve_p_lambda,
    subdifferential,
    support_geometry,
)
from polygauge.certify import CERTIFIED, POSITIVE
from polygauge.errors import PolygaugeError
from polygauge.experiments import run_experiment

from oracles import ACCEPTANCE_LINES, mesh_maxmin, positive_pool, soft_threshold, vertex_enumeration

SCALES = (1.0, 0.5, 0.25, 0.125)


def report(number, title, ok, detail):
    line = f"{'PASS' if ok else 'FAIL'} criterion {number}: {title} ({detail})"
    ACCEPTANCE_LINES.append(line)
    print("\n" + line)
    assert ok, f"criterion {number} failed: {detail}"


@pytest.fixture(scope="module")
def pool():
    return (positive_pool("linf", 34, base_seed=101)
            + positive_pool("l1", 33, base_seed=102)
            + positive_pool("block", 33, base_seed=103))


@pytest.fixture(scope="module")
def oracle_runs(pool):
    runs = []
    for e in pool:
        cf = closed_form_solution(e["inst"].phi, e["H"], e["y"], e["lam"], e["sup"], e["geom"])
        qp = solve_p_lambda(e["inst"].phi, e["H"], e["y"], e["lam"])
        runs.append((e, cf, qp))
    return runs


def test_criterion_1_closed_form_matches_oracle(oracle_runs):
    gaps, same_face, certified = [], 0, 0
    for e, cf, qp in oracle_runs:
        gaps.append(np.linalg.norm(cf.x_hat - qp.x) / np.linalg.norm(qp.x))
        if cf.verdict == CERTIFIED:
            certified += 1
            same_face += h_support(e["H"], cf.x_hat) == e["sup"]
    n = len(oracle_runs)
    ok = n >= 100 and max(gaps) <= 1e-6 and certified == n and same_face == certified
    report(1, "closed form vs QP oracle", ok,
           f"{n} instances, max rel gap {max(gaps):.2e}, certified {certified}/{n}, "
           f"same face {same_face}/{certified}")


def test_criterion_2_mu_formula(oracle_runs):
    gaps = [abs(cf.mu - eval_gauge(e["H"], qp.x)) for e, cf, qp in oracle_runs]
    ok = len(gaps) >= 100 and max(gaps) <= 1e-6
    report(2, "observable mu equals J_H(oracle)", ok,
           f"{len(gaps)} instances, max |mu - J(x_qp)| {max(gaps):.2e}")


def test_criterion_3_noise_linearity(pool):
    spreads, in_range = [], 0
    for e in pool:
        inst, H, w = e["inst"], e["H"], e["w"]
        c = e["lam"] / np.linalg.norm(w)
        ratios = []
        for s in SCALES:
            ws = s * w
            lam = c * np.linalg.norm(ws)
            in_range += lam in lambda_range(inst.phi, H, inst.x0, ws, e["geom"], e["cert"])
            cf = closed_form_solution(inst.phi, H, inst.phi @ inst.x0 + ws, lam, e["sup"],
                                      e["geom"])
            ratios.append(np.linalg.norm(cf.x_hat - inst.x0) / np.linalg.norm(ws))
        spreads.append(max(ratios) / min(ratios) - 1.0)
    ok = len(spreads) >= 100 and max(spreads) <= 0.10
    report(3, "error ratio constant under noise scaling", ok,
           f"{len(spreads)} instances, max spread {max(spreads):.2e}, "
           f"lambda in range {in_range}/{len(spreads) * len(SCALES)}")


def test_criterion_4_noiseless_identifiability(pool):
    errors, residuals, min_v = [], [], []
    for e in pool[::2] + pool[1::2][:10]:
        inst, H = e["inst"], e["H"]
        r = solve_p0(inst.phi, H, inst.phi @ inst.x0)
        errors.append(np.linalg.norm(r.x - inst.x0))
        d = noiseless_certificate(inst.phi, H, inst.x0, e["geom"], e["cert"])
        residuals.append(np.abs(inst.phi.T @ d.eta - e["geom"].h_sub @ d.v).max())
        min_v.append(d.v.min())
    n = len(errors)
    ok = n >= 50 and max(errors) <= 1e-8 and max(residuals) <= 1e-8 and min(min_v) > 0
    report(4, "noiseless recovery and dual certificate", ok,
           f"{n} instances, max |x_p0 - x0| {max(errors):.2e}, "
           f"max certificate residual {max(residuals):.2e}, min v {min(min_v):.2e}")


def test_criterion_5_negative_criterion():
    total, mismatches = 0, 0
    for gauge, n, q, k in (("linf", 8, 6, 4), ("l1", 8, 6, 2), ("block", 8, 6, None)):
        cfg = {"gauge": gauge, "n": n, "q": q, "sparsity": k, "count": 8,
               "noise_ratio": 1e-3, "ic_margin": 1e-4}
        rows, _ = run_experiment("negative-ic", cfg, seed=7)
        assert all(r["ic"] < -1e-4 for r in rows)
        assert all(abs(r["noise_norm"] / r["lambda"] - 1e-3) <= 1e-12 for r in rows)
        total += len(rows)
        mismatches += sum(r["mismatch"] for r in rows)
    ok = total >= 20 and mismatches == total
    report(5, "negative criterion forces a different face", ok,
           f"{total} instances with IC < -1e-4, mismatch {mismatches}/{total}")


def _ic_no_kernel_cases():
    rng = np.random.default_rng(61)
    cases = []
    while len(cases) < 40:
        n, q = 8, 6
        phi = rng.standard_normal((q, n))
        x0 = rng.uniform(-0.8, 0.8, n)
        idx = rng.choice(n, size=4, replace=False)
        x0[idx] = rng.choice([-1.0, 1.0], 4) * 1.5
        cases.append((phi, build_linf(n), x0))
    return cases


def _ic_kernel_cases(dim):
    rng = np.random.default_rng(62 + dim)
    cases = []
    while len(cases) < 15:
        if dim == 1:
            # l1 with two zero coordinates: |I| = 4, Ker H_I of dimension 1
            H = build_l1(6)
            x0 = rng.choice([-1.0, 1.0], 6) * rng.uniform(1, 2, 6)
            x0[rng.choice(6, 2, replace=False)] = 0.0
        else:
            # block gauge with a 3-way and a 2-way tie: |I| = 6, Ker H_I of dimension 2
            H = build_block_l1_linf([[0, 1, 2], [3, 4], [5]])
            x0 = np.array([1.5, -1.5, 1.5, 2.0, -2.0, 0.7])
        phi = rng.standard_normal((5, 6))
        cases.append((phi, H, x0))
    return cases


def test_criterion_6_ic_correctness():
    worst_exact = 0.0
    for phi, H, x0 in _ic_no_kernel_cases():
        geom = support_geometry(phi, H, h_support(H, x0))
        assert geom.ker_hi_basis.shape[1] == 0
        b = geom.phi_tilde.T @ geom.gamma_perp @ geom.direction
        worst_exact = max(worst_exact, abs(ic(phi, H, geom.support, geom).ic_value - b.min()))
    worst_mesh, checked = 0.0, {1: 0, 2: 0}
    for dim in (1, 2):
        for phi, H, x0 in _ic_kernel_cases(dim):
            try:
                geom = support_geometry(phi, H, h_support(H, x0))
            except PolygaugeError:
                continue
            k = geom.ker_hi_basis
            assert k.shape[1] == dim and len(geom.support) <= 6
            b = geom.phi_tilde.T @ geom.gamma_perp @ geom.direction
            value = ic(phi, H, geom.support, geom).ic_value
            brute = mesh_maxmin(b, k, radius=10.0 * (1.0 + np.abs(b).max()))
            worst_mesh = max(worst_mesh, abs(value - brute))
            checked[dim] += 1
    ok = worst_exact <= 1e-10 and worst_mesh <= 1e-4 and min(checked.values()) >= 10
    report(6, "criterion LP vs closed form and kernel mesh", ok,
           f"no-kernel max diff {worst_exact:.2e} on 40, mesh max diff {worst_mesh:.2e} "
           f"on dim1 {checked[1]} / dim2 {checked[2]}")


def test_criterion_7_specializations():
    rng = np.random.default_rng(71)
    H = build_l1(6)
    worst, count = 0.0, 0
    while count < 30:
        phi, _ = np.linalg.qr(rng.standard_normal((6, 6)))
        y = 2.0 * rng.standard_normal(6)
        lam = rng.uniform(0.05, 1.0)
        x_st = soft_threshold(phi.T @ y, lam)
        if not np.any(x_st):
            continue
        cf = closed_form_solution(phi, H, y, lam, h_support(H, x_st))
        worst = max(worst, np.abs(cf.x_hat - x_st).max())
        count += 1
    cf = closed_form_solution(np.eye(2), build_linf(2), [2.1, 1.0], 0.05, [0])
    hinf = np.abs(cf.x_hat - [2.05, 1.0]).max()
    ok = worst <= 1e-10 and hinf <= 1e-12
    report(7, "soft thresholding and the l-infinity example", ok,
           f"soft-threshold max diff {worst:.2e} on {count}, x_hat {cf.x_hat.tolist()}")


def test_criterion_8_structural_invariants(pool):
    rng = np.random.default_rng(81)
    failures = {}

    def fail(name):
        failures[name] = failures.get(name, 0) + 1

    gauges = [build_l1(5), build_linf(5), build_block_l1_linf([[0, 1], [2], [3, 4]])]
    for _ in range(500):
        x, y = rng.standard_normal(5), rng.standard_normal(5)
        a = rng.uniform(1e-3, 1e3)
        for H in gauges:
            jx = eval_gauge(H, x)
            if abs(eval_gauge(H, a * x) - a * jx) > 1e-12 * a * abs(jx):
                fail("homogeneity")
            if eval_gauge(H, x + y) > jx + eval_gauge(H, y) + 1e-12:
                fail("sublinearity")
    for t in range(1000):
        H = gauges[t % 3]
        x = rng.standard_normal(5) * (rng.random(5) < 0.6)
        if not np.any(x):
            x[0] = 1.0
        g, _ = subdifferential(H, x).sample(rng)
        y = rng.standard_normal(5)
        if eval_gauge(H, y) < eval_gauge(H, x) + g @ (y - x) - 1e-10:
            fail("subgradient")
    for e in pool:
        geom, phi = e["geom"], e["inst"].phi
        gp = geom.gamma_perp
        if max(np.abs(gp @ gp - gp).max(), np.abs(gp - gp.T).max(),
               np.abs(gp @ phi @ geom.u_basis).max(initial=0)) > 1e-10:
            fail("projector")
        hp = pinv(geom.h_sub)
        if max(np.abs(geom.h_sub @ hp @ geom.h_sub - geom.h_sub).max(),
               np.abs(hp.T - geom.hi_pinv_star).max()) > 1e-10:
            fail("pseudo-inverse")
        if face_coordinates(geom, e["inst"].x0, eval_gauge(e["H"], e["inst"].x0))[1] > 1e-9:
            fail("face decomposition")
        d = geom.u_basis.shape[1]
        r, _ = np.linalg.qr(rng.standard_normal((d, d))) if d else (np.zeros((0, 0)), None)
        g2 = geom.with_basis(geom.u_basis @ r)
        c2 = ic(phi, e["H"], e["sup"], g2)
        k1 = constants(phi, e["H"], e["inst"].x0, e["sup"], geom)
        k2 = constants(phi, e["H"], e["inst"].x0, e["sup"], g2)
        f1 = closed_form_solution(phi, e["H"], e["y"], e["lam"], e["sup"], geom)
        f2 = closed_form_solution(phi, e["H"], e["y"], e["lam"], e["sup"], g2)
        diffs = [abs(c2.ic_value - e["cert"].ic_value), abs(k1.c1 - k2.c1), abs(k1.c2 - k2.c2),
                 abs(k1.t - k2.t), abs(k1.rho2 - k2.rho2), np.abs(f1.x_hat - f2.x_hat).max(),
                 abs(f1.mu - f2.mu)]
        if max(diffs) > 1e-9:
            fail("basis invariance")
    ok = not failures
    report(8, "structural invariants", ok,
           f"failures {failures or 'none'} over 500 gauge pairs x 3 gauges, 1000 subgradient "
           f"triples, {len(pool)} faces")


def test_criterion_9_lp_solver():
    rng = np.random.default_rng(91)
    worst, infeasible, mismatched_status = 0.0, 0, 0
    deterministic = True
    for _ in range(200):
        n = int(rng.integers(1, 7))
        m = int(rng.integers(1, 9))
        a = rng.standard_normal((m, n))
        b = rng.uniform(-0.5, 2.0, m)
        box = rng.uniform(0.5, 3.0, n)
        c = rng.standard_normal(n)
        p = LinearProgram(c, a_le=a, b_le=b, bounds=[(-u, u) for u in box])
        sol = solve_lp(p)
        again = solve_lp(p)
        deterministic &= sol.status == again.status and (
            not sol.optimal or (sol.value == again.value and np.array_equal(sol.z, again.z)))
        ref, _ = vertex_enumeration(c, np.vstack([a, np.eye(n), -np.eye(n)]),
                                    np.concatenate([b, box, box]))
        if ref is None:
            infeasible += 1
            mismatched_status += sol.status != "infeasible"
            continue
        if not sol.optimal:
            mismatched_status += 1
            continue
        worst = max(worst, abs(sol.value - ref) / (1 + abs(ref)))
    ok = worst <= 1e-8 and mismatched_status == 0 and deterministic
    report(9, "simplex vs vertex enumeration", ok,
           f"200 LPs ({infeasible} infeasible), max rel diff {worst:.2e}, "
           f"status mismatches {mismatched_status}, deterministic {deterministic}")
