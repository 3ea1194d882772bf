"""Kernel bases, pseudo-inverses and the per-face projection machinery.

Every rank decision uses the singular values of the matrix at hand with a
threshold ``rank_tol * s_max``.
"""

from dataclasses import dataclass

import numpy as np

from .errors import ConditioningError, InputError, PreconditionError
from .gauge import HMatrix, HSupport

__all__ = [
    "RANK_TOL",
    "SupportGeometry",
    "kernel_basis",
    "pinv",
    "restricted_injectivity",
    "support_geometry",
    "gamma_inner",
    "face_coordinates",
]

RANK_TOL = 1e-10
MAX_GRAM_COND = 1e12
PROJECTOR_TOL = 1e-10


def _numerical_rank(s, rank_tol):
    if s.size == 0 or s[0] == 0.0:
        return 0
    return int(np.sum(s > rank_tol * s[0]))


def kernel_basis(A, rank_tol=RANK_TOL):
    """Orthonormal basis of ``Ker A`` as the columns of an ``n x k`` array.

    >>> kernel_basis(np.eye(2)).shape
    (2, 0)
    """
    A = np.atleast_2d(np.asarray(A, dtype=float))
    n = A.shape[1]
    if A.shape[0] == 0:
        return np.eye(n)
    _, s, vt = np.linalg.svd(A, full_matrices=True)
    r = _numerical_rank(s, rank_tol)
    return vt[r:].T.copy()


def pinv(A, rank_tol=RANK_TOL):
    """Moore-Penrose pseudo-inverse with the package-wide relative cutoff."""
    A = np.atleast_2d(np.asarray(A, dtype=float))
    u, s, vt = np.linalg.svd(A, full_matrices=False)
    r = _numerical_rank(s, rank_tol)
    return (vt[:r].T / s[:r]) @ u[:, :r].T


def restricted_injectivity(phi, h_i, rank_tol=RANK_TOL) -> bool:
    """True iff ``Ker phi`` and ``Ker h_i^T`` meet only at 0."""
    phi = np.atleast_2d(np.asarray(phi, dtype=float))
    h_i = np.asarray(h_i, dtype=float)
    if h_i.ndim == 1:
        h_i = h_i[:, None]
    if phi.shape[1] != h_i.shape[0]:
        raise InputError("phi and H_I act on different dimensions")
    stacked = np.vstack([phi, h_i.T])
    s = np.linalg.svd(stacked, compute_uv=False)
    return _numerical_rank(s, rank_tol) == phi.shape[1]


@dataclass(frozen=True, eq=False)
class SupportGeometry:
    """Linear algebra attached to one face ``I`` of the gauge.

    Attributes
    ----------
    u_basis : (N, d) basis of ``Ker H_I^T``
    m_matrix : (d, d) inverse of ``U^T Phi^T Phi U``
    gamma_perp : (Q, Q) projector onto the complement of ``Phi Ker H_I^T``
    hi_pinv_star : (N, |I|) transpose of the pseudo-inverse of ``H_I``
    phi_tilde : (Q, |I|) ``Phi @ hi_pinv_star``
    ker_hi_basis : (|I|, k) orthonormal basis of ``Ker H_I``
    """

    support: HSupport
    phi: np.ndarray
    h_sub: np.ndarray
    u_basis: np.ndarray
    m_matrix: np.ndarray
    gamma_perp: np.ndarray
    hi_pinv_star: np.ndarray
    phi_tilde: np.ndarray
    ker_hi_basis: np.ndarray

    @property
    def gamma(self):
        return np.eye(self.gamma_perp.shape[0]) - self.gamma_perp

    @property
    def ones(self):
        return np.ones(len(self.support))

    @property
    def direction(self):
        """``Phi~_I 1_I``, the image of the face's barycentric direction."""
        return self.phi_tilde @ self.ones

    @property
    def face_solver(self):
        """``U M_I U^T Phi^T``, the least-squares map onto the face's subspace."""
        return self.u_basis @ self.m_matrix @ self.u_basis.T @ self.phi.T

    def with_basis(self, u_basis):
        """Same face, different basis of ``Ker H_I^T`` (must span the same space)."""
        return support_geometry(self.phi, self.h_sub, self.support, u_basis=u_basis)


def support_geometry(phi, H, support, rank_tol=RANK_TOL, u_basis=None) -> SupportGeometry:
    """Assemble the :class:`SupportGeometry` of face ``support``.

    ``H`` may be an :class:`HMatrix` or an already extracted ``N x |I|``
    submatrix.  ``u_basis`` overrides the SVD basis of ``Ker H_I^T``; any
    basis of that subspace gives the same projector.

    Raises
    ------
    PreconditionError
        if restricted injectivity fails on the face.
    ConditioningError
        if the Gram matrix ``U^T Phi^T Phi U`` is numerically singular or
        the resulting projector fails its identities.
    """
    phi = np.atleast_2d(np.asarray(phi, dtype=float))
    if not isinstance(support, HSupport):
        support = HSupport(tuple(support))
    if len(support) == 0:
        raise InputError("empty support")
    h_sub = H.sub(support.indices) if isinstance(H, HMatrix) else np.asarray(H, dtype=float)
    q, n = phi.shape
    if h_sub.shape[0] != n:
        raise InputError(f"phi acts on R^{n} but H lives in R^{h_sub.shape[0]}")
    if not restricted_injectivity(phi, h_sub, rank_tol):
        raise PreconditionError(
            f"restricted injectivity fails on support {list(support.indices)}"
        )

    if u_basis is None:
        u = kernel_basis(h_sub.T, rank_tol)
    else:
        u = np.asarray(u_basis, dtype=float).reshape(n, -1)
        if np.abs(h_sub.T @ u).max(initial=0.0) > 1e-8 * (1.0 + np.abs(u).max(initial=0.0)):
            raise InputError("supplied basis is not inside Ker H_I^T")
    d = u.shape[1]
    phi_u = phi @ u
    if d:
        gram = phi_u.T @ phi_u
        if np.linalg.cond(gram) > MAX_GRAM_COND:
            raise ConditioningError(
                f"U^T Phi^T Phi U has condition number {np.linalg.cond(gram):.3e}"
            )
        m = np.linalg.inv(gram)
        gamma = phi_u @ m @ phi_u.T
    else:
        m = np.zeros((0, 0))
        gamma = np.zeros((q, q))
    gamma_perp = np.eye(q) - gamma
    gamma_perp = 0.5 * (gamma_perp + gamma_perp.T)

    err_idem = np.abs(gamma_perp @ gamma_perp - gamma_perp).max()
    err_ann = np.abs(gamma_perp @ phi_u).max(initial=0.0) / (1.0 + np.abs(phi_u).max(initial=0.0))
    if err_idem > PROJECTOR_TOL or err_ann > PROJECTOR_TOL:
        raise ConditioningError(
            f"projector identities violated (idempotence {err_idem:.2e}, annihilation {err_ann:.2e})"
        )

    hi_pinv_star = pinv(h_sub, rank_tol).T
    return SupportGeometry(
        support=support,
        phi=phi,
        h_sub=h_sub,
        u_basis=u,
        m_matrix=m,
        gamma_perp=gamma_perp,
        hi_pinv_star=hi_pinv_star,
        phi_tilde=phi @ hi_pinv_star,
        ker_hi_basis=kernel_basis(h_sub, rank_tol),
    )


def gamma_inner(geom: SupportGeometry, u, v) -> float:
    """``<u, Gamma_perp v>``."""
    return float(np.asarray(u, dtype=float) @ geom.gamma_perp @ np.asarray(v, dtype=float))


def face_coordinates(geom: SupportGeometry, x, mu):
    """Split ``x = mu H_I^{+,T} 1 + U alpha``.

    Returns ``(alpha, residual)`` where ``residual`` is the Euclidean norm
    of what the decomposition fails to reconstruct.
    """
    x = np.asarray(x, dtype=float)
    base = mu * geom.hi_pinv_star @ geom.ones
    if geom.u_basis.shape[1] == 0:
        return np.zeros(0), float(np.linalg.norm(x - base))
    alpha, *_ = np.linalg.lstsq(geom.u_basis, x - base, rcond=None)
    return alpha, float(np.linalg.norm(geom.u_basis @ alpha + base - x))
