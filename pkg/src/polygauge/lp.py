"""Dense two-phase primal simplex with Bland's anti-cycling rule.

Problems are stated as

    maximize    c^T z
    subject to  A_eq z  = b_eq
                A_le z <= b_le
                lo <= z <= hi        (either side may be infinite)

and converted internally to the standard form ``min c'^T x, A x = b, x >= 0``
by shifting bounded variables, splitting free ones and adding slacks.
The final basis is re-solved against the original standard-form data, so
the reported optimizer and multipliers do not carry the tableau's round-off.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import InputError, SolverFailure

__all__ = ["LinearProgram", "LpSolution", "solve_lp"]

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
UNBOUNDED = "unbounded"

REDUCED_COST_TOL = 1e-10
PIVOT_TOL = 1e-9
REFACTOR_EVERY = 50


@dataclass(frozen=True)
class LinearProgram:
    """A linear program to be *maximized*.

    ``bounds`` is a sequence of ``(lo, hi)`` pairs, one per variable, where
    ``None`` or an infinite value means unbounded on that side.  Leaving it
    as ``None`` makes every variable free.
    """

    objective: np.ndarray
    a_eq: np.ndarray | None = None
    b_eq: np.ndarray | None = None
    a_le: np.ndarray | None = None
    b_le: np.ndarray | None = None
    bounds: tuple | None = None

    def __post_init__(self):
        c = np.asarray(self.objective, dtype=float).ravel()
        n = c.size
        if n == 0:
            raise InputError("linear program needs at least one variable")
        object.__setattr__(self, "objective", c)
        for a_name, b_name in (("a_eq", "b_eq"), ("a_le", "b_le")):
            a, b = getattr(self, a_name), getattr(self, b_name)
            if a is None and b is None:
                a, b = np.zeros((0, n)), np.zeros(0)
            elif a is None or b is None:
                raise InputError(f"{a_name} and {b_name} must be given together")
            a = np.atleast_2d(np.asarray(a, dtype=float))
            if a.size == 0:
                a = a.reshape(0, n)
            b = np.asarray(b, dtype=float).ravel()
            if a.shape[1] != n or a.shape[0] != b.size:
                raise InputError(f"{a_name} has shape {a.shape}, expected ({b.size}, {n})")
            object.__setattr__(self, a_name, a)
            object.__setattr__(self, b_name, b)
        lo = np.full(n, -np.inf)
        hi = np.full(n, np.inf)
        if self.bounds is not None:
            if len(self.bounds) != n:
                raise InputError("one (lo, hi) pair per variable is required")
            for j, (l, h) in enumerate(self.bounds):
                lo[j] = -np.inf if l is None else float(l)
                hi[j] = np.inf if h is None else float(h)
        if np.any(lo > hi):
            raise InputError("a lower bound exceeds its upper bound")
        object.__setattr__(self, "bounds", (lo, hi))
        for arr in (c, self.a_eq, self.b_eq, self.a_le, self.b_le):
            if not np.all(np.isfinite(arr)):
                raise InputError("linear program data must be finite")
        if np.any(np.isnan(lo)) or np.any(np.isnan(hi)):
            raise InputError("NaN bound")

    @property
    def n(self):
        return self.objective.size


@dataclass
class LpSolution:
    """Result of :func:`solve_lp`.

    ``dual_eq`` and ``dual_le`` are multipliers of the maximization problem:
    ``dual_le >= 0`` and, at an optimum with free variables,
    ``c = A_eq^T dual_eq + A_le^T dual_le`` up to bound multipliers.
    """

    status: str
    z: np.ndarray | None = None
    value: float = np.nan
    dual_eq: np.ndarray | None = None
    dual_le: np.ndarray | None = None
    gap: float = np.nan
    primal_residual: float = np.nan
    slackness: float = np.nan
    iterations: int = 0
    info: dict = field(default_factory=dict)

    @property
    def optimal(self):
        return self.status == OPTIMAL


class _StandardForm:
    """``min cost @ x  s.t.  A x = b, x >= 0`` plus the map back to z."""

    def __init__(self, p: LinearProgram):
        lo, hi = p.bounds
        n = p.n
        cols = []          # (original var, sign) for each structural std column
        offset = np.zeros(n)
        bound_rows = []    # (std column, width) for doubly bounded variables
        for j in range(n):
            if np.isfinite(lo[j]):
                offset[j] = lo[j]
                cols.append((j, 1.0))
                if np.isfinite(hi[j]):
                    bound_rows.append((len(cols) - 1, hi[j] - lo[j]))
            elif np.isfinite(hi[j]):
                offset[j] = hi[j]
                cols.append((j, -1.0))
            else:
                cols.append((j, 1.0))
                cols.append((j, -1.0))
        ns = len(cols)
        transform = np.zeros((n, ns))
        for k, (j, s) in enumerate(cols):
            transform[j, k] = s
        self.transform = transform
        self.offset = offset

        m_eq = p.a_eq.shape[0]
        m_le = p.a_le.shape[0]
        m_b = len(bound_rows)
        m_ineq = m_le + m_b
        m = m_eq + m_ineq
        a = np.zeros((m, ns + m_ineq))
        b = np.zeros(m)
        a[:m_eq, :ns] = p.a_eq @ transform
        b[:m_eq] = p.b_eq - p.a_eq @ offset
        a[m_eq:m_eq + m_le, :ns] = p.a_le @ transform
        b[m_eq:m_eq + m_le] = p.b_le - p.a_le @ offset
        for r, (k, width) in enumerate(bound_rows):
            a[m_eq + m_le + r, k] = 1.0
            b[m_eq + m_le + r] = width
        a[m_eq:, ns:] = np.eye(m_ineq)
        self.a = a
        self.b = b
        self.cost = np.concatenate([-(transform.T @ p.objective), np.zeros(m_ineq)])
        self.const = -float(p.objective @ offset)
        self.m_eq, self.m_le, self.n_struct = m_eq, m_le, ns
        # slack column owning each inequality row
        self.slack_of_row = {m_eq + r: ns + r for r in range(m_ineq)}

    def to_original(self, xs):
        return self.offset + self.transform @ xs[: self.n_struct]


def _pivot(tab, r, c):
    tab[r] /= tab[r, c]
    col = tab[:, c].copy()
    col[r] = 0.0
    tab -= np.outer(col, tab[r])


def _bland_entering(reduced, allowed):
    cand = np.flatnonzero((reduced < -REDUCED_COST_TOL) & allowed)
    return int(cand[0]) if cand.size else None


def _bland_leaving(tab, col, basis):
    m = tab.shape[0] - 1
    a = tab[:m, col]
    rhs = tab[:m, -1]
    rows = np.flatnonzero(a > PIVOT_TOL)
    if rows.size == 0:
        return None
    ratios = np.maximum(rhs[rows], 0.0) / a[rows]
    best = ratios.min()
    ties = rows[ratios <= best + 1e-12 * (1.0 + abs(best))]
    return int(ties[np.argmin(basis[ties])])


class _Tableau:
    def __init__(self, a, b, basis, cost, cap):
        m, ncol = a.shape
        self.a, self.b = a, b
        self.tab = np.zeros((m + 1, ncol + 1))
        self.tab[:m, :ncol] = a
        self.tab[:m, -1] = b
        self.basis = np.asarray(basis, dtype=int)
        self.iterations = 0
        self.cap = cap
        self.set_cost(cost)

    def set_cost(self, cost):
        self.cost = cost
        m = self.tab.shape[0] - 1
        self.tab[-1, :-1] = cost
        self.tab[-1, -1] = 0.0
        cb = cost[self.basis]
        self.tab[-1] -= cb @ self.tab[:m]

    def refactor(self):
        m = self.tab.shape[0] - 1
        bmat = self.a[:, self.basis]
        try:
            self.tab[:m, :-1] = np.linalg.solve(bmat, self.a)
            self.tab[:m, -1] = np.linalg.solve(bmat, self.b)
        except np.linalg.LinAlgError:
            return
        self.set_cost(self.cost)

    def run(self, allowed):
        """Iterate to optimality; return ``"optimal"`` or ``"unbounded"``."""
        while True:
            col = _bland_entering(self.tab[-1, :-1], allowed)
            if col is None:
                return OPTIMAL
            row = _bland_leaving(self.tab, col, self.basis)
            if row is None:
                return UNBOUNDED
            if self.iterations >= self.cap:
                raise SolverFailure(
                    "simplex iteration cap reached",
                    {"iterations": self.iterations, "objective": -self.tab[-1, -1]},
                )
            _pivot(self.tab, row, col)
            self.basis[row] = col
            self.iterations += 1
            if self.iterations % REFACTOR_EVERY == 0:
                self.refactor()

    def drop_row(self, r):
        keep = np.ones(self.tab.shape[0], dtype=bool)
        keep[r] = False
        self.tab = self.tab[keep]
        self.a = np.delete(self.a, r, axis=0)
        self.b = np.delete(self.b, r)
        self.basis = np.delete(self.basis, r)


def solve_lp(p: LinearProgram) -> LpSolution:
    """Maximize ``p.objective`` over the polyhedron described by ``p``.

    The returned status is ``"optimal"``, ``"infeasible"`` or ``"unbounded"``.
    Raises :class:`SolverFailure` when the iteration cap
    ``50 * (rows + cols)`` is exhausted.
    """
    sf = _StandardForm(p)
    a, b = sf.a.copy(), sf.b.copy()
    m, ns = a.shape
    cap = 50 * (m + ns)

    flipped = b < 0
    a[flipped] *= -1.0
    b[flipped] *= -1.0

    # initial basis: a slack where it is feasible, an artificial otherwise
    basis = []
    art_rows = []
    for i in range(m):
        s = sf.slack_of_row.get(i)
        if s is not None and not flipped[i]:
            basis.append(s)
        else:
            basis.append(ns + len(art_rows))
            art_rows.append(i)
    n_art = len(art_rows)
    a_full = np.hstack([a, np.zeros((m, n_art))])
    for k, i in enumerate(art_rows):
        a_full[i, ns + k] = 1.0
    is_art = np.zeros(ns + n_art, dtype=bool)
    is_art[ns:] = True
    row_ids = np.arange(m)

    tab = _Tableau(a_full, b, basis, np.where(is_art, 1.0, 0.0), cap)
    if n_art:
        tab.run(np.ones(ns + n_art, dtype=bool))
        tab.refactor()
        infeas = -tab.tab[-1, -1]
        if infeas > 1e-9 * (1.0 + np.abs(b).max(initial=0.0)):
            return LpSolution(INFEASIBLE, iterations=tab.iterations,
                              info={"phase1_objective": float(infeas)})
        # drive artificials out of the basis; rows that cannot be pivoted are redundant
        r = 0
        while r < tab.tab.shape[0] - 1:
            bv = tab.basis[r]
            if is_art[bv]:
                cand = np.flatnonzero((np.abs(tab.tab[r, :ns]) > PIVOT_TOL))
                if cand.size:
                    _pivot(tab.tab, r, int(cand[0]))
                    tab.basis[r] = int(cand[0])
                    tab.iterations += 1
                else:
                    tab.drop_row(r)
                    row_ids = np.delete(row_ids, r)
                    continue
            r += 1
    # phase 2 without artificial columns
    keep_cols = np.concatenate([np.arange(ns), [ns + n_art]])
    tab.tab = tab.tab[:, keep_cols]
    tab.a = tab.a[:, :ns]
    tab.set_cost(sf.cost.copy())
    tab.refactor()
    status = tab.run(np.ones(ns, dtype=bool))
    if status == UNBOUNDED:
        return LpSolution(UNBOUNDED, iterations=tab.iterations)

    # exact re-solve on the final basis
    bmat = tab.a[:, tab.basis]
    xb = np.linalg.solve(bmat, tab.b)
    xs = np.zeros(ns)
    xs[tab.basis] = np.maximum(xb, 0.0)
    y_kept = np.linalg.solve(bmat.T, sf.cost[tab.basis])
    y = np.zeros(m)
    y[row_ids] = y_kept
    y[flipped] *= -1.0          # undo the row sign flips
    reduced = sf.cost - sf.a.T @ y

    z = sf.to_original(xs)
    value = float(p.objective @ z)
    primal_min = float(sf.cost @ xs)
    dual_min = float(sf.b @ y)
    gap = abs(primal_min - dual_min) / (1.0 + abs(primal_min))
    slack = float(np.max(np.abs(reduced * xs), initial=0.0)) / (1.0 + abs(primal_min))
    res = 0.0
    if p.a_eq.size:
        res = max(res, float(np.max(np.abs(p.a_eq @ z - p.b_eq))))
    if p.a_le.size:
        res = max(res, float(np.max(p.a_le @ z - p.b_le, initial=0.0)))
    lo, hi = p.bounds
    res = max(res, float(np.max(lo - z, initial=0.0)), float(np.max(z - hi, initial=0.0)))
    scale = 1.0 + max(np.abs(p.b_eq).max(initial=0.0), np.abs(p.b_le).max(initial=0.0))
    return LpSolution(
        OPTIMAL,
        z=z,
        value=value,
        dual_eq=-y[: sf.m_eq],
        dual_le=-y[sf.m_eq: sf.m_eq + sf.m_le],
        gap=gap,
        primal_residual=res / scale,
        slackness=slack,
        iterations=tab.iterations,
        info={"min_reduced_cost": float(reduced.min(initial=0.0))},
    )
