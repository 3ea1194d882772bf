"""Identifiability criterion, certified closed-form solutions and dual certificates.

Notation used in the code:

``a``      the direction ``Phi~_I 1_I`` (``geom.direction``)
``rho2``   ``<a, a>`` in the ``Gamma_perp`` inner product
``b``      the vector ``Phi~_I^T Gamma_perp a``, whose minimum entry (after the
           best shift inside ``Ker H_I``) is the identifiability criterion
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import NotOptimalError, PreconditionError, SolverFailure
from .gauge import SUPPORT_TOL, HMatrix, HSupport, eval_gauge, h_support
from .lp import LinearProgram, solve_lp
from .numlin import gamma_inner, support_geometry

__all__ = [
    "POSITIVE",
    "NEGATIVE",
    "INCONCLUSIVE",
    "CERTIFIED",
    "Constants",
    "Certificate",
    "ClosedForm",
    "OptimalityWitness",
    "LambdaInterval",
    "DualCertificate",
    "ic",
    "constants",
    "closed_form_solution",
    "verify_optimality",
    "lambda_range",
    "noiseless_certificate",
]

POSITIVE = "certified-positive"
NEGATIVE = "certified-negative"
INCONCLUSIVE = "inconclusive"
CERTIFIED = "certified"

IC_THRESHOLD = 1e-8
SIMPLEX_TOL = 1e-9
STATIONARITY_TOL = 1e-7
SOURCE_TOL = 1e-8


@dataclass
class Constants:
    c1: float
    c2: float
    t: float
    rho2: float

    def as_dict(self):
        return {"C1": self.c1, "C2": self.c2, "T": self.t, "rho2": self.rho2}


@dataclass
class Certificate:
    support: HSupport
    ic_value: float
    z_star: np.ndarray
    verdict: str
    ic_error: float = 0.0
    constants: Constants | None = None


@dataclass
class OptimalityWitness:
    """Simplex vector ``v`` with ``Phi^T (Phi x - y) + lambda H_I v = 0``."""

    v: np.ndarray
    support: HSupport
    in_simplex: bool
    in_relint: bool
    stationarity: float = 0.0

    @property
    def unique(self):
        return self.in_relint


@dataclass
class ClosedForm:
    x_hat: np.ndarray
    mu: float
    support: HSupport
    lam: float
    v_tilde: np.ndarray | None
    margin: float
    verdict: str
    violated: list = field(default_factory=list)


@dataclass(frozen=True)
class LambdaInterval:
    """Open interval ``(lo, hi)`` of admissible regularization weights."""

    lo: float
    hi: float

    @property
    def empty(self):
        return not self.lo < self.hi

    def __contains__(self, lam):
        return self.lo < lam < self.hi

    def interior_point(self, frac=0.5):
        if self.empty:
            raise ValueError("empty interval")
        return self.lo + frac * (self.hi - self.lo)

    def as_list(self):
        return None if self.empty else [self.lo, self.hi]


@dataclass
class DualCertificate:
    eta: np.ndarray
    v: np.ndarray
    residual: float

    @property
    def certified(self):
        return (self.residual <= SOURCE_TOL and self.v.min() > 0
                and abs(self.v.sum() - 1.0) <= SIMPLEX_TOL)


def _geometry(phi, H, support, geom):
    if geom is None:
        geom = support_geometry(phi, H, support)
    return geom


def _direction(geom):
    a = geom.direction
    if np.linalg.norm(a) <= 1e-12 * (1.0 + np.linalg.norm(geom.phi)):
        raise PreconditionError("Phi~_I 1_I vanishes on this face")
    return a


def _maxmin_over_kernel(c, kernel):
    """``max_{z in span(kernel)} min_i (c + z)_i`` and its maximizer.

    Returns ``(value, z, gap)``; ``gap`` is the LP duality gap (0 when no LP
    is needed).
    """
    k = kernel.shape[1]
    if k == 0:
        return float(c.min()), np.zeros_like(c), 0.0
    m = c.size
    # variables (r, beta): maximize r subject to r - (K beta)_i <= c_i
    a_le = np.hstack([np.ones((m, 1)), -kernel])
    obj = np.zeros(k + 1)
    obj[0] = 1.0
    sol = solve_lp(LinearProgram(obj, a_le=a_le, b_le=c))
    if not sol.optimal:
        raise SolverFailure(f"max-min LP over Ker H_I is {sol.status}", {"status": sol.status})
    z = kernel @ sol.z[1:]
    return float((c + z).min()), z, float(sol.gap)


def _verdict(value):
    if value > IC_THRESHOLD:
        return POSITIVE
    if value < -IC_THRESHOLD:
        return NEGATIVE
    return INCONCLUSIVE


def ic(phi, H: HMatrix, support, geom=None) -> Certificate:
    """Identifiability criterion of the face ``support``.

    Maximizes ``min_i (Phi~^T Gamma_perp Phi~ 1 + z)_i`` over ``z`` in
    ``Ker H_I``, parametrized by an orthonormal kernel basis.
    """
    geom = _geometry(phi, H, support, geom)
    a = _direction(geom)
    b = geom.phi_tilde.T @ geom.gamma_perp @ a
    value, z, gap = _maxmin_over_kernel(b, geom.ker_hi_basis)
    return Certificate(geom.support, value, z, _verdict(value), ic_error=gap)


def constants(phi, H: HMatrix, x0, support, geom=None) -> Constants:
    """The proof constants ``C1, C2, T`` and ``rho2`` at ``x0``."""
    geom = _geometry(phi, H, support, geom)
    x0 = np.asarray(x0, dtype=float)
    comp = geom.support.complement(H.n_cols)
    if comp.size == 0:
        raise PreconditionError("every column is active: T is undefined")
    h_out = H.columns[:, comp]
    solver = geom.face_solver
    drift = (solver @ geom.phi - np.eye(H.n)) @ geom.hi_pinv_star @ geom.ones
    c1 = float(np.abs(h_out.T @ drift).max())
    c2 = float(np.linalg.norm(h_out.T @ solver, axis=1).max())
    t = eval_gauge(H, x0) - float((x0 @ h_out).max())
    if not t > 0:
        raise PreconditionError(f"support is not the face of x0 (T = {t:.3e})")
    a = _direction(geom)
    return Constants(c1, c2, t, gamma_inner(geom, a, a))


def _witness(geom, y, lam, mu):
    a = geom.direction
    c = geom.phi_tilde.T @ geom.gamma_perp @ (y - mu * a) / lam
    low, z, _ = _maxmin_over_kernel(c, geom.ker_hi_basis)
    v = c + z
    in_simplex = low >= -SIMPLEX_TOL and abs(v.sum() - 1.0) <= SIMPLEX_TOL
    return v, in_simplex, in_simplex and low > SIMPLEX_TOL


def closed_form_solution(phi, H: HMatrix, y, lam, support, geom=None) -> ClosedForm:
    """Candidate minimizer living on face ``support``, with its verdict.

    ``mu = (<a, y>_Gamma_perp - lam) / rho2`` and
    ``x = mu H_I^{+,T} 1 + U M U^T Phi^T (y - mu a)``.  The verdict is
    ``"certified"`` only when ``mu > 0``, the point stays on the face with a
    strict margin outside it and the optimality witness is in the relative
    interior of the simplex.
    """
    if not lam > 0:
        raise PreconditionError("lambda must be positive")
    geom = _geometry(phi, H, support, geom)
    a = _direction(geom)
    y = np.asarray(y, dtype=float)
    rho2 = gamma_inner(geom, a, a)
    if rho2 <= 1e-14 * (1.0 + a @ a):
        raise PreconditionError("Phi~_I 1_I lies in Phi Ker H_I^T (rho2 = 0)")
    mu = (gamma_inner(geom, a, y) - lam) / rho2
    x_hat = mu * geom.hi_pinv_star @ geom.ones + geom.face_solver @ (y - mu * a)

    violated = []
    if not mu > 0:
        violated.append("mu-positivity")
    inside = geom.h_sub.T @ x_hat
    if np.abs(inside - mu).max() > 1e-8 * (1.0 + abs(mu)):
        violated.append("inside-support")
    comp = geom.support.complement(H.n_cols)
    margin = math.inf if comp.size == 0 else mu - float((x_hat @ H.columns[:, comp]).max())
    if not margin > 0:
        violated.append("outside-support")
    v, _, relint = _witness(geom, y, lam, mu)
    if not relint:
        violated.append("relint-witness")
    verdict = CERTIFIED if not violated else INCONCLUSIVE
    return ClosedForm(x_hat, float(mu), geom.support, float(lam), v, margin, verdict, violated)


def verify_optimality(phi, H: HMatrix, y, lam, x_hat, tol=SUPPORT_TOL,
                      stationarity_tol=STATIONARITY_TOL) -> OptimalityWitness:
    """Exhibit a simplex vector proving that ``x_hat`` minimizes the penalized problem.

    The face of ``x_hat`` is detected at relative tolerance ``tol``; the
    witness maximizes its smallest entry over shifts in ``Ker H_I``.

    Raises
    ------
    NotOptimalError
        when no simplex vector satisfies the first-order condition.
    """
    phi = np.atleast_2d(np.asarray(phi, dtype=float))
    y = np.asarray(y, dtype=float)
    x_hat = np.asarray(x_hat, dtype=float)
    sup = h_support(H, x_hat, tol)
    geom = support_geometry(phi, H, sup)
    mu = eval_gauge(H, x_hat)
    v, in_simplex, relint = _witness(geom, y, lam, mu)
    if not in_simplex:
        raise NotOptimalError(
            f"no simplex witness: min entry {v.min():.3e}, sum {v.sum():.6f}"
        )
    grad = phi.T @ (phi @ x_hat - y) + lam * geom.h_sub @ v
    scale = 1.0 + np.abs(phi.T @ y).max()
    stat = float(np.abs(grad).max() / scale)
    if stat > stationarity_tol:
        raise NotOptimalError(f"first-order residual {stat:.3e} at x_hat")
    return OptimalityWitness(v, sup, in_simplex, relint, stat)


def _outside_interval(c1, r):
    """Open set of shifts ``d`` with ``|d| c1 + d < r``, as ``(lo, hi)``."""
    hi = r / (1.0 + c1) if r > 0 else 0.0
    if c1 < 1.0:
        lo = -math.inf
        if r <= 0:
            hi = r / (1.0 - c1)
    elif c1 == 1.0:
        lo = -math.inf if r > 0 else 0.0
    else:
        lo = -r / (c1 - 1.0) if r > 0 else 0.0
    return lo, hi


def lambda_range(phi, H: HMatrix, x0, w, geom, cert: Certificate) -> LambdaInterval:
    """Weights for which the closed form at ``y = Phi x0 + w`` is provably the minimizer.

    Intersects three conditions, each linear in ``lam`` for the given noise:
    positivity of ``mu``; the triangle-inequality bound keeping the face
    strictly; positivity of the witness built from the criterion's maximizer.
    """
    if not cert.ic_value > 0:
        raise PreconditionError("lambda range needs a positive criterion")
    x0 = np.asarray(x0, dtype=float)
    w = np.asarray(w, dtype=float)
    geom = _geometry(phi, H, cert.support, geom)
    k = cert.constants or constants(phi, H, x0, cert.support, geom)
    a = _direction(geom)
    rho2 = k.rho2
    s = gamma_inner(geom, a, w)
    mu0 = eval_gauge(H, x0)

    lo, hi = 0.0, s + mu0 * rho2

    d_lo, d_hi = _outside_interval(k.c1, k.t - k.c2 * float(np.linalg.norm(w)))
    lo = max(lo, s + rho2 * d_lo)
    hi = min(hi, s + rho2 * d_hi)

    c = geom.phi_tilde.T @ geom.gamma_perp @ a + cert.z_star
    g = geom.phi_tilde.T @ geom.gamma_perp @ w
    lo = max(lo, float(np.max(s - rho2 * g / c)))
    return LambdaInterval(float(lo), float(hi))


def noiseless_certificate(phi, H: HMatrix, x0, geom, cert: Certificate) -> DualCertificate:
    """Dual pair ``(eta, v)`` with ``Phi^T eta = H_I v`` and ``v`` in the open simplex."""
    if not cert.ic_value > 0:
        raise PreconditionError(f"criterion {cert.ic_value:.3e} is not positive; no certificate")
    geom = _geometry(phi, H, cert.support, geom)
    a = _direction(geom)
    rho2 = gamma_inner(geom, a, a)
    # both halves carry 1/rho2 so that Phi^T eta = H_I v with v summing to one
    eta = geom.gamma_perp @ a / rho2
    v = cert.z_star / rho2 + geom.phi_tilde.T @ eta
    resid = float(np.abs(geom.phi.T @ eta - geom.h_sub @ v).max())
    return DualCertificate(eta, v, resid)
