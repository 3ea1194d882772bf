"""Independent reference computations used by the tests.

Nothing here calls the package's LP or QP code: vertex enumeration, mesh
search and soft-thresholding are computed directly with numpy.
"""

import itertools

import numpy as np

from polygauge import h_support, ic, support_geometry
from polygauge.certify import POSITIVE, constants, lambda_range
from polygauge.errors import PolygaugeError
from polygauge.instances import derive_seed, random_instance


def vertex_enumeration(c, a_le, b_le, a_eq=None, b_eq=None, tol=1e-9):
    """Maximize ``c @ x`` over a bounded polyhedron by trying every basis.

    Returns ``(value, x)`` or ``(None, None)`` when no vertex is feasible.
    """
    n = c.size
    a_eq = np.zeros((0, n)) if a_eq is None else a_eq
    b_eq = np.zeros(0) if b_eq is None else b_eq
    k = n - a_eq.shape[0]
    best_val, best_x = None, None
    subsets = np.array(list(itertools.combinations(range(a_le.shape[0]), k)), dtype=int)
    if subsets.size == 0:
        subsets = np.zeros((1, 0), dtype=int)
    mats = np.concatenate([np.broadcast_to(a_eq, (len(subsets),) + a_eq.shape),
                           a_le[subsets]], axis=1)
    rhs = np.concatenate([np.broadcast_to(b_eq, (len(subsets), b_eq.size)),
                          b_le[subsets]], axis=1)
    ok = np.abs(np.linalg.det(mats)) > 1e-10
    if not ok.any():
        return None, None
    xs = np.linalg.solve(mats[ok], rhs[ok][..., None])[..., 0]
    scale = 1.0 + np.abs(b_le).max(initial=0.0)
    feas = np.all(xs @ a_le.T <= b_le + tol * scale, axis=1)
    if a_eq.shape[0]:
        feas &= np.all(np.abs(xs @ a_eq.T - b_eq) <= tol * scale, axis=1)
    if not feas.any():
        return None, None
    vals = xs[feas] @ c
    j = int(np.argmax(vals))
    best_val, best_x = float(vals[j]), xs[feas][j]
    return best_val, best_x


def mesh_maxmin(b, kernel, radius, levels=12, points=41):
    """``max_beta min(b + kernel @ beta)`` over ``|beta|_inf <= radius`` by zooming grids.

    The objective is concave, so shrinking a grid around the best node
    converges to the maximum; the final spacing bounds the error.
    """
    k = kernel.shape[1]
    center = np.zeros(k)
    half = float(radius)
    best = -np.inf
    for _ in range(levels):
        axes = [np.linspace(c - half, c + half, points) for c in center]
        grid = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, k)
        vals = (b[None, :] + grid @ kernel.T).min(axis=1)
        j = int(np.argmax(vals))
        best = max(best, float(vals[j]))
        center = grid[j]
        half *= 4.0 / (points - 1)
    return best


def soft_threshold(u, t):
    return np.sign(u) * np.maximum(np.abs(u) - t, 0.0)


ACCEPTANCE_SHAPES = {
    "linf": (8, 6, 4),
    "l1": (8, 6, 2),
    "block": (8, 6, None),
}


def positive_pool(kind, count, base_seed, noise=1e-3, position=0.5):
    """Instances with a certified positive criterion and a nonempty lambda range.

    Each entry is a dict with the instance, its face data and a weight
    ``lam`` at the geometric ``position`` of the admissible interval.
    """
    n, q, k = ACCEPTANCE_SHAPES[kind]
    out = []
    i = 0
    while len(out) < count:
        row_seed = derive_seed(base_seed, i)
        i += 1
        if i > 50 * count:
            raise RuntimeError(f"could not draw {count} positive {kind} instances")
        inst = random_instance(row_seed, kind, n, q, k)
        H = inst.gauge
        try:
            sup = h_support(H, inst.x0)
            geom = support_geometry(inst.phi, H, sup)
            cert = ic(inst.phi, H, sup, geom)
            if cert.verdict != POSITIVE:
                continue
            cert.constants = constants(inst.phi, H, inst.x0, sup, geom)
        except PolygaugeError:
            continue
        rng = np.random.default_rng(row_seed)
        w = rng.standard_normal(q)
        w *= noise / np.linalg.norm(w)
        interval = lambda_range(inst.phi, H, inst.x0, w, geom, cert)
        if interval.empty:
            continue
        if interval.lo > 0:
            lam = float(np.exp((1 - position) * np.log(interval.lo)
                               + position * np.log(interval.hi)))
        else:
            lam = interval.interior_point(position)
        out.append(dict(inst=inst, H=H, sup=sup, geom=geom, cert=cert, w=w,
                        y=inst.phi @ inst.x0 + w, lam=lam, interval=interval, seed=row_seed))
    return out


# PASS/FAIL lines of the acceptance suite, echoed in the terminal summary
ACCEPTANCE_LINES = []
