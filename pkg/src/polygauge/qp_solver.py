"""Reference solvers for the penalized and equality-constrained problems.

Neither solver uses the face-wise closed form: the penalized problem is
solved through its epigraph QP by a Mehrotra predictor-corrector
interior-point method, and the constrained problem as an LP by the simplex
code in :mod:`polygauge.lp`.
"""

from dataclasses import dataclass

import numpy as np

from .errors import InputError, PolygaugeError, SolverFailure
from .gauge import HMatrix, HSupport, eval_gauge, h_support
from .lp import LinearProgram, solve_lp

__all__ = ["SolveResult", "solve_p_lambda", "solve_p0", "solve_qp", "ORACLE_SUPPORT_TOL"]

ORACLE_SUPPORT_TOL = 1e-6
DEFAULT_TOL = 1e-8
# x-accuracy tracks the KKT residual roughly linearly, so iterate well past
# the success tolerance whenever round-off allows it
TARGET_TOL = 1e-13
STALL_ITERATIONS = 10


@dataclass
class SolveResult:
    x: np.ndarray | None
    objective: float
    kkt_residual: float
    support: HSupport | None
    iterations: int
    status: str = "optimal"
    optimality: object = None


def _oracle_support(H, x, tol):
    scale = max(1.0, float(np.abs(x).max(initial=0.0)))
    if eval_gauge(H, x) <= 1e-9 * scale or not np.any(x):
        return None
    return h_support(H, x, tol)


def _kkt_residual(P, q, G, h, u, s, z):
    qn = 1.0 + np.abs(q).max(initial=0.0)
    hn = 1.0 + np.abs(h).max(initial=0.0)
    rd = P @ u + q + G.T @ z
    rp = G @ u + s - h
    return max(np.abs(rd).max() / qn, np.abs(rp).max() / hn, (s @ z) / z.size / qn)


def _polish(P, q, G, h, u, s, z):
    """Re-solve the KKT system with the active set guessed from ``(s, z)`` as equalities.

    Returns the polished triple, or ``None`` when the guess yields an
    infeasible point or a negative multiplier.
    """
    active = np.flatnonzero(z > s)
    n = u.size
    k = active.size
    ga = G[active]
    kkt = np.block([[P, ga.T], [ga, np.zeros((k, k))]])
    rhs = np.concatenate([-q, h[active]])
    sol = np.linalg.lstsq(kkt, rhs, rcond=None)[0]
    u_p = sol[:n]
    z_p = np.zeros_like(z)
    z_p[active] = sol[n:]
    s_p = h - G @ u_p
    scale = 1.0 + np.abs(h).max(initial=0.0) + np.abs(G @ u_p).max(initial=0.0)
    if s_p.min(initial=0.0) < -1e-13 * scale or z_p.min(initial=0.0) < 0:
        return None
    return u_p, np.maximum(s_p, 0.0), z_p


def solve_qp(P, q, G, h, tol=DEFAULT_TOL, target=TARGET_TOL, max_iter=200, polish=True):
    """Minimize ``0.5 u^T P u + q^T u`` subject to ``G u <= h``.

    Dense Mehrotra predictor-corrector.  ``P + G^T D G`` must be positive
    definite for every positive diagonal ``D``.  Iterates until the scaled
    KKT residual reaches ``target`` or stops improving; the run succeeds if
    the best iterate is within ``tol``.  With ``polish`` the answer is then
    refined by one active-set KKT solve, kept only if it lowers the residual.

    Returns ``(u, s, z, info)`` with slacks ``s`` and multipliers ``z``.
    """
    n = q.size
    m = h.size
    # infeasible start: u = 0 with slacks and multipliers at least one
    u = np.zeros(n)
    s = np.maximum(h, 1.0)
    z = np.ones(m)
    qn = 1.0 + np.abs(q).max(initial=0.0)
    hn = 1.0 + np.abs(h).max(initial=0.0)
    best = (np.inf, u, s, z, 0)
    since_best = 0

    with np.errstate(all="ignore"):
        for it in range(max_iter + 1):
            rd = P @ u + q + G.T @ z
            rp = G @ u + s - h
            mu = s @ z / m
            res = max(np.abs(rd).max() / qn, np.abs(rp).max() / hn, mu / qn)
            if not np.isfinite(res):
                break
            if res < best[0]:
                best = (res, u, s, z, it)
                since_best = 0
            else:
                since_best += 1
            if res <= target or since_best >= STALL_ITERATIONS or it == max_iter:
                break

            d = z / s
            kkt = P + (G.T * d) @ G
            try:
                chol = np.linalg.cholesky(kkt)

                def solve_kkt(rhs):
                    return np.linalg.solve(chol.T, np.linalg.solve(chol, rhs))
            except np.linalg.LinAlgError:
                def solve_kkt(rhs):
                    return np.linalg.lstsq(kkt, rhs, rcond=None)[0]

            def newton(rc):
                # Z ds + S dz = -rc, G du + ds = -rp, P du + G^T dz = -rd
                du = solve_kkt(-rd - G.T @ ((-rc + z * rp) / s))
                ds = -rp - G @ du
                dz = (-rc - z * ds) / s
                return du, ds, dz

            du_a, ds_a, dz_a = newton(s * z)
            alpha_a = min(_step(s, ds_a), _step(z, dz_a))
            mu_aff = (s + alpha_a * ds_a) @ (z + alpha_a * dz_a) / m
            sigma = (mu_aff / mu) ** 3
            du, ds, dz = newton(s * z + ds_a * dz_a - sigma * mu)
            alpha = min(0.99 * min(_step(s, ds), _step(z, dz)), 1.0)
            if not alpha > 1e-14:
                break
            u = u + alpha * du
            s = s + alpha * ds
            z = z + alpha * dz

    res, u, s, z, it = best
    if not res <= tol:
        raise SolverFailure(
            "interior-point method did not reach the KKT tolerance",
            {"iterations": it, "residual": float(res), "tol": tol},
        )
    info = {"iterations": it, "residual": float(res), "polished": False}
    if polish:
        refined = _polish(P, q, G, h, u, s, z)
        if refined is not None:
            res_p = _kkt_residual(P, q, G, h, *refined)
            if res_p < res:
                u, s, z = refined
                info.update(residual=float(res_p), polished=True)
    return u, s, z, info


def _step(v, dv):
    neg = dv < 0
    if not np.any(neg):
        return 1.0
    return float(min(1.0, np.min(-v[neg] / dv[neg])))


def _check(phi, H, y):
    phi = np.atleast_2d(np.asarray(phi, dtype=float))
    y = np.asarray(y, dtype=float).ravel()
    if phi.shape[1] != H.n or phi.shape[0] != y.size:
        raise InputError(f"phi {phi.shape}, y {y.shape}, H acts on R^{H.n}")
    return phi, y


def solve_p_lambda(phi, H: HMatrix, y, lam, tol=DEFAULT_TOL, support_tol=ORACLE_SUPPORT_TOL,
                   crosscheck=False, target=TARGET_TOL) -> SolveResult:
    """Minimize ``0.5 ||y - phi x||^2 + lam J_H(x)`` through its epigraph QP.

    Variables ``(x, t)``; constraints ``H^T x <= t``.  With ``crosscheck``
    the first-order certificate of :func:`polygauge.certify.verify_optimality`
    is attached when the detected face admits one (``None`` otherwise).
    """
    if not lam > 0:
        raise InputError("lambda must be positive")
    phi, y = _check(phi, H, y)
    n = H.n
    nh = H.n_cols
    P = np.zeros((n + 1, n + 1))
    P[:n, :n] = phi.T @ phi
    q = np.concatenate([-(phi.T @ y), [lam]])
    G = np.hstack([H.columns.T, -np.ones((nh, 1))])
    h = np.zeros(nh)
    u, _, _, info = solve_qp(P, q, G, h, tol=tol, target=target)
    x = u[:n]
    obj = 0.5 * float(np.sum((y - phi @ x) ** 2)) + lam * eval_gauge(H, x)
    res = SolveResult(x, obj, float(info["residual"]), _oracle_support(H, x, support_tol),
                      info["iterations"])
    if crosscheck and res.support is not None:
        from .certify import verify_optimality
        try:
            res.optimality = verify_optimality(phi, H, y, lam, x, tol=support_tol)
        except PolygaugeError:
            res.optimality = None
    return res


def solve_p0(phi, H: HMatrix, y, tol=1e-9, support_tol=ORACLE_SUPPORT_TOL) -> SolveResult:
    """Minimize ``J_H(x)`` subject to ``phi x = y`` as an LP in ``(x, t)``.

    ``status`` is ``"infeasible"`` when ``y`` is outside the range of ``phi``.
    The LP returns one vertex; on non-unique problems only the objective is
    meaningful.
    """
    phi, y = _check(phi, H, y)
    n = H.n
    nh = H.n_cols
    q = phi.shape[0]
    obj = np.zeros(n + 1)
    obj[-1] = -1.0
    a_le = np.hstack([H.columns.T, -np.ones((nh, 1))])
    a_eq = np.hstack([phi, np.zeros((q, 1))])
    sol = solve_lp(LinearProgram(obj, a_eq=a_eq, b_eq=y, a_le=a_le, b_le=np.zeros(nh)))
    if sol.status != "optimal":
        return SolveResult(None, np.nan, np.nan, None, sol.iterations, status=sol.status)
    x = sol.z[:n]
    t = sol.z[n]
    jx = eval_gauge(H, x)
    resid = max(sol.primal_residual, sol.gap, abs(t - jx) / (1.0 + abs(jx)))
    if resid > tol:
        raise SolverFailure("LP solution misses the requested accuracy",
                            {"residual": resid, "gap": sol.gap})
    return SolveResult(x, jx, float(resid), _oracle_support(H, x, support_tol), sol.iterations)
