"""Polyhedral gauges ``J_H(x) = max_i <x, h_i>`` and their faces.

Column indices are 0-based throughout the package.
"""

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import InputError, UndefinedSupportError
from .lp import LinearProgram, solve_lp

__all__ = [
    "HMatrix",
    "HSupport",
    "SubdiffDescriptor",
    "eval_gauge",
    "h_support",
    "subdifferential",
    "is_valid_gauge",
    "SUPPORT_TOL",
]

SUPPORT_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class HMatrix:
    """Column collection ``H = (h_1, ..., h_NH)`` stored as an ``N x NH`` array.

    ``known_valid`` lets constructors that are valid by design skip the
    LP-based validity check; leave it ``None`` for arbitrary input.
    """

    columns: np.ndarray
    known_valid: bool | None = None
    label: str = "explicit"

    def __post_init__(self):
        h = np.array(self.columns, dtype=float)
        if h.ndim == 1:
            h = h.reshape(1, -1)
        if h.ndim != 2 or h.shape[0] < 1 or h.shape[1] < 1:
            raise InputError(f"H must be a nonempty 2-D array, got shape {h.shape}")
        if not np.all(np.isfinite(h)):
            raise InputError("H has non-finite entries")
        h.setflags(write=False)
        object.__setattr__(self, "columns", h)

    @classmethod
    def from_columns(cls, cols, **kw):
        """Build from a list of column vectors (the JSON ``explicit`` layout)."""
        return cls(np.asarray(cols, dtype=float).T, **kw)

    @property
    def n(self):
        return self.columns.shape[0]

    @property
    def n_cols(self):
        return self.columns.shape[1]

    def sub(self, indices):
        return self.columns[:, np.asarray(indices, dtype=int)]

    @cached_property
    def validity(self):
        if self.known_valid is not None:
            return self.known_valid, None
        return is_valid_gauge(self)

    @property
    def is_valid(self):
        return self.validity[0]


@dataclass(frozen=True)
class HSupport:
    """Sorted index set ``I`` together with the tolerance that produced it."""

    indices: tuple
    tol: float = 0.0

    def __post_init__(self):
        idx = tuple(sorted(set(int(i) for i in self.indices)))
        if any(i < 0 for i in idx):
            raise InputError("support indices must be nonnegative")
        if self.tol < 0:
            raise InputError("support tolerance must be nonnegative")
        object.__setattr__(self, "indices", idx)

    def __len__(self):
        return len(self.indices)

    def __iter__(self):
        return iter(self.indices)

    def __eq__(self, other):
        if isinstance(other, HSupport):
            return self.indices == other.indices
        return NotImplemented

    def __hash__(self):
        return hash(self.indices)

    def array(self):
        return np.asarray(self.indices, dtype=int)

    def complement(self, n_cols):
        mask = np.ones(n_cols, dtype=bool)
        mask[list(self.indices)] = False
        return np.flatnonzero(mask)


def _check_x(H, x):
    x = np.asarray(x, dtype=float).ravel()
    if x.size != H.n:
        raise InputError(f"x has length {x.size}, gauge acts on R^{H.n}")
    if not np.all(np.isfinite(x)):
        raise InputError("x has non-finite entries")
    return x


def eval_gauge(H: HMatrix, x) -> float:
    """Return ``max_i <x, h_i>``."""
    x = _check_x(H, x)
    return float(np.max(x @ H.columns))


def h_support(H: HMatrix, x, tol=SUPPORT_TOL) -> HSupport:
    """Indices whose inner product with ``x`` reaches ``(1 - tol) J_H(x)``.

    ``tol = 0`` returns the exact face, which in floating point only
    catches ties that are bit-exact.
    """
    x = _check_x(H, x)
    if tol < 0:
        raise InputError("tol must be nonnegative")
    if not np.any(x):
        raise UndefinedSupportError("the H-support of x = 0 is undefined")
    corr = x @ H.columns
    top = corr.max()
    keep = corr >= top - tol * abs(top)
    return HSupport(tuple(np.flatnonzero(keep)), tol)


@dataclass(frozen=True)
class SubdiffDescriptor:
    """``dJ_H(x) = { H_I v : v >= 0, sum(v) = 1 }``."""

    h_sub: np.ndarray
    index_set: HSupport

    def contains(self, g, tol=1e-9) -> bool:
        """Decide by LP whether ``g = H_I v`` for some ``v`` in the simplex."""
        g = np.asarray(g, dtype=float).ravel()
        if g.size != self.h_sub.shape[0]:
            raise InputError("g has the wrong length")
        k = self.h_sub.shape[1]
        # maximize -slack subject to |H_I v - g| <= slack, v in the simplex
        ones = np.ones((self.h_sub.shape[0], 1))
        a_le = np.block([[self.h_sub, -ones], [-self.h_sub, -ones]])
        b_le = np.concatenate([g, -g])
        obj = np.zeros(k + 1)
        obj[-1] = -1.0
        a_eq = np.concatenate([np.ones(k), [0.0]])[None, :]
        sol = solve_lp(LinearProgram(obj, a_eq=a_eq, b_eq=[1.0], a_le=a_le, b_le=b_le,
                                     bounds=[(0.0, None)] * (k + 1)))
        return sol.optimal and -sol.value <= tol * (1.0 + np.abs(g).max())

    def sample(self, rng):
        """Draw a uniformly random element of the subdifferential."""
        v = rng.dirichlet(np.ones(self.h_sub.shape[1]))
        return self.h_sub @ v, v


def subdifferential(H: HMatrix, x, tol=SUPPORT_TOL) -> SubdiffDescriptor:
    sup = h_support(H, x, tol)
    return SubdiffDescriptor(H.sub(sup.indices), sup)


def is_valid_gauge(H: HMatrix, tol=1e-10):
    """Check that ``0`` is interior to ``conv{h_i}``.

    Solves ``min t  s.t. <x, h_i> <= t, |x|_inf <= 1, x_k = s`` for every
    coordinate ``k`` and sign ``s``.  Any optimum with ``t <= tol`` gives a
    nonzero direction with ``J_H(x) <= 0``.

    Returns
    -------
    (bool, witness) where ``witness`` is ``None`` for a valid gauge.
    """
    hmat = H.columns
    n, nh = hmat.shape
    a_le = np.hstack([hmat.T, -np.ones((nh, 1))])
    b_le = np.zeros(nh)
    obj = np.zeros(n + 1)
    obj[-1] = -1.0
    for k in range(n):
        for s in (1.0, -1.0):
            bounds = [(-1.0, 1.0)] * n + [(None, None)]
            bounds[k] = (s, s)
            sol = solve_lp(LinearProgram(obj, a_le=a_le, b_le=b_le, bounds=bounds))
            if sol.optimal and -sol.value <= tol:
                return False, sol.z[:n]
    return True, None
