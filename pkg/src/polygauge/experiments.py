"""Seeded experiment families over Gaussian ensembles.

Each family draws candidate instances row by row; candidate ``i`` uses the
seed ``derive_seed(seed, i)`` and can be regenerated from that value alone
(see :func:`draw`).  Only candidates passing the family's filter produce
rows, and rows keep their candidate index and seed.
"""

import numpy as np

from .certify import (
    CERTIFIED,
    POSITIVE,
    closed_form_solution,
    constants,
    ic,
    lambda_range,
)
from .errors import InputError, PolygaugeError
from .gauge import eval_gauge, h_support
from .instances import derive_seed, random_instance, rng_from
from .numlin import gamma_inner, support_geometry
from .qp_solver import solve_p_lambda

__all__ = ["KINDS", "DEFAULT_CONFIG", "COLUMNS", "draw", "run_experiment", "validate_config"]

KINDS = ("noise-scaling", "support-recovery", "negative-ic")

DEFAULT_CONFIG = {
    "gauge": "linf",
    "n": 8,
    "q": 6,
    "sparsity": None,
    "count": 20,
    "max_attempts": 2000,
    "noise": 1e-3,
    "scales": [1.0, 0.5, 0.25, 0.125],
    "lambda_position": 0.5,
    "noise_ratio": 1e-3,
    "lambda_fraction": 0.1,
    "ic_margin": 1e-4,
}

COLUMNS = {
    "noise-scaling": [
        "index", "seed", "gauge", "n", "q", "ic", "scale", "noise_norm", "lambda",
        "lambda_lo", "lambda_hi", "in_range", "verdict", "support_match", "error", "ratio",
        "oracle_rel_gap",
    ],
    "support-recovery": [
        "index", "seed", "gauge", "n", "q", "ic", "lambda", "lambda_lo", "lambda_hi",
        "verdict", "support_match", "oracle_support_match", "oracle_rel_gap", "mu",
        "mu_gap", "error",
    ],
    "negative-ic": [
        "index", "seed", "gauge", "n", "q", "ic", "lambda", "noise_norm",
        "oracle_support_match", "mismatch",
    ],
}


def validate_config(config):
    cfg = dict(DEFAULT_CONFIG)
    unknown = set(config) - set(cfg)
    if unknown:
        raise InputError(f"unknown config keys: {sorted(unknown)}")
    cfg.update(config)
    if cfg["gauge"] not in ("l1", "linf", "block"):
        raise InputError(f"gauge must be l1, linf or block, got {cfg['gauge']!r}")
    for key in ("n", "q", "count", "max_attempts"):
        if not isinstance(cfg[key], int) or cfg[key] < 1:
            raise InputError(f"{key} must be a positive integer")
    if cfg["gauge"] == "l1" and cfg["n"] > 12:
        raise InputError("l1 experiments are capped at n = 12")
    for key in ("noise", "noise_ratio", "lambda_fraction"):
        if not cfg[key] > 0:
            raise InputError(f"{key} must be positive")
    if not 0 < cfg["lambda_position"] < 1:
        raise InputError("lambda_position must lie in (0, 1)")
    if not cfg["scales"] or any(not s > 0 for s in cfg["scales"]):
        raise InputError("scales must be positive")
    return cfg


def draw(row_seed, cfg):
    """Instance and unit-norm noise direction for one candidate row."""
    inst = random_instance(row_seed, cfg["gauge"], cfg["n"], cfg["q"], cfg["sparsity"])
    w = rng_from(derive_seed(row_seed, 1)).standard_normal(cfg["q"])
    return inst, w / np.linalg.norm(w)


def _face(inst):
    H = inst.gauge
    sup = h_support(H, inst.x0)
    geom = support_geometry(inst.phi, H, sup)
    cert = ic(inst.phi, H, sup, geom)
    return H, sup, geom, cert


def _position(interval, frac):
    """Point of the open interval at geometric (or linear when lo = 0) position ``frac``."""
    if interval.lo > 0:
        return float(np.exp((1 - frac) * np.log(interval.lo) + frac * np.log(interval.hi)))
    return interval.interior_point(frac)


def _rel(a, b):
    return float(np.linalg.norm(a - b) / max(np.linalg.norm(b), 1e-300))


def _candidates(cfg, seed):
    for i in range(cfg["max_attempts"]):
        row_seed = derive_seed(seed, i)
        inst, direction = draw(row_seed, cfg)
        try:
            H, sup, geom, cert = _face(inst)
        except PolygaugeError:
            continue
        yield i, row_seed, inst, direction, H, sup, geom, cert


def _base(i, row_seed, cfg, cert):
    return {"index": i, "seed": row_seed, "gauge": cfg["gauge"], "n": cfg["n"],
            "q": cfg["q"], "ic": cert.ic_value}


def _noise_scaling(cfg, seed):
    rows, spreads = [], []
    for i, row_seed, inst, direction, H, sup, geom, cert in _candidates(cfg, seed):
        if len(spreads) >= cfg["count"]:
            break
        if cert.verdict != POSITIVE:
            continue
        try:
            cert.constants = constants(inst.phi, H, inst.x0, sup, geom)
        except PolygaugeError:
            continue
        w1 = cfg["noise"] * direction
        rng1 = lambda_range(inst.phi, H, inst.x0, w1, geom, cert)
        if rng1.empty:
            continue
        c = _position(rng1, cfg["lambda_position"]) / np.linalg.norm(w1)
        ratios = []
        for scale in cfg["scales"]:
            w = scale * w1
            lam = c * float(np.linalg.norm(w))
            interval = lambda_range(inst.phi, H, inst.x0, w, geom, cert)
            y = inst.phi @ inst.x0 + w
            cf = closed_form_solution(inst.phi, H, y, lam, sup, geom)
            oracle = solve_p_lambda(inst.phi, H, y, lam)
            err = float(np.linalg.norm(cf.x_hat - inst.x0))
            ratio = err / float(np.linalg.norm(w))
            ratios.append(ratio)
            row = _base(i, row_seed, cfg, cert)
            row.update(scale=scale, noise_norm=float(np.linalg.norm(w)), **{"lambda": lam},
                       lambda_lo=interval.lo, lambda_hi=interval.hi, in_range=lam in interval,
                       verdict=cf.verdict, support_match=h_support(H, cf.x_hat) == sup,
                       error=err, ratio=ratio, oracle_rel_gap=_rel(oracle.x, cf.x_hat))
            rows.append(row)
        spreads.append(max(ratios) / min(ratios) - 1.0)
    summary = {
        "instances": len(spreads),
        "max_ratio_spread": max(spreads) if spreads else None,
        "all_certified": all(r["verdict"] == CERTIFIED for r in rows),
        "max_oracle_rel_gap": max((r["oracle_rel_gap"] for r in rows), default=None),
    }
    return rows, summary


def _support_recovery(cfg, seed):
    rows = []
    attempts = 0
    for i, row_seed, inst, direction, H, sup, geom, cert in _candidates(cfg, seed):
        if len(rows) >= cfg["count"]:
            break
        attempts = i + 1
        if cert.verdict != POSITIVE:
            continue
        try:
            cert.constants = constants(inst.phi, H, inst.x0, sup, geom)
        except PolygaugeError:
            continue
        w = cfg["noise"] * direction
        interval = lambda_range(inst.phi, H, inst.x0, w, geom, cert)
        if interval.empty:
            continue
        lam = _position(interval, cfg["lambda_position"])
        y = inst.phi @ inst.x0 + w
        cf = closed_form_solution(inst.phi, H, y, lam, sup, geom)
        oracle = solve_p_lambda(inst.phi, H, y, lam)
        row = _base(i, row_seed, cfg, cert)
        row.update(**{"lambda": lam}, lambda_lo=interval.lo, lambda_hi=interval.hi,
                   verdict=cf.verdict, support_match=h_support(H, cf.x_hat) == sup,
                   oracle_support_match=oracle.support == sup,
                   oracle_rel_gap=_rel(oracle.x, cf.x_hat), mu=cf.mu,
                   mu_gap=abs(cf.mu - eval_gauge(H, oracle.x)),
                   error=float(np.linalg.norm(cf.x_hat - inst.x0)))
        rows.append(row)
    certified = [r for r in rows if r["verdict"] == CERTIFIED]
    summary = {
        "attempts": attempts,
        "instances": len(rows),
        "certified": len(certified),
        "recovery_fraction": (sum(r["support_match"] for r in certified) / len(certified)
                              if certified else None),
        "oracle_recovery_fraction": (sum(r["oracle_support_match"] for r in certified)
                                     / len(certified) if certified else None),
        "max_oracle_rel_gap": max((r["oracle_rel_gap"] for r in rows), default=None),
        "max_mu_gap": max((r["mu_gap"] for r in rows), default=None),
    }
    return rows, summary


def _negative_ic(cfg, seed):
    rows = []
    for i, row_seed, inst, direction, H, sup, geom, cert in _candidates(cfg, seed):
        if len(rows) >= cfg["count"]:
            break
        if not cert.ic_value < -cfg["ic_margin"]:
            continue
        a = geom.direction
        lam = cfg["lambda_fraction"] * gamma_inner(geom, a, a) * eval_gauge(H, inst.x0)
        w = cfg["noise_ratio"] * lam * direction
        oracle = solve_p_lambda(inst.phi, H, inst.phi @ inst.x0 + w, lam)
        match = oracle.support == sup
        row = _base(i, row_seed, cfg, cert)
        row.update(**{"lambda": lam}, noise_norm=float(np.linalg.norm(w)),
                   oracle_support_match=match, mismatch=not match)
        rows.append(row)
    summary = {
        "instances": len(rows),
        "mismatch_fraction": sum(r["mismatch"] for r in rows) / len(rows) if rows else None,
    }
    return rows, summary


def run_experiment(kind, config=None, seed=0):
    """Run one experiment family; returns ``(rows, summary)``."""
    cfg = validate_config(config or {})
    runners = {
        "noise-scaling": _noise_scaling,
        "support-recovery": _support_recovery,
        "negative-ic": _negative_ic,
    }
    if kind not in runners:
        raise InputError(f"unknown experiment kind {kind!r}; choose from {KINDS}")
    rows, summary = runners[kind](cfg, int(seed))
    summary.update(kind=kind, seed=int(seed), config=cfg)
    return rows, summary
