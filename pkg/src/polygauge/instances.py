"""Problem instances: JSON schema, seeded random ensembles, reproducibility helpers.

Instance JSON (``"schema": 1``), matrices as row-major lists of rows::

    {"schema": 1,
     "instances": [
        {"name": "...", "phi": [[...], ...],
         "h": {"kind": "linf", "n": 2},
         "x0": [...],                        # optional
         "w": [...] | "sigma": 0.01, "seed": 7,   # optional, exactly one form
         "y": [...],                         # optional, overrides x0 + w
         "lambda": 0.05}                     # optional
     ]}

A file holding a single instance object (without the ``instances`` list)
is accepted too.
"""

import hashlib
import json
from dataclasses import dataclass, field

import numpy as np

from .builders import build_from_descriptor
from .errors import InputError
from .gauge import HMatrix

__all__ = [
    "SCHEMA_VERSION",
    "PRNG_NAME",
    "Instance",
    "load_instances",
    "config_hash",
    "derive_seed",
    "random_gauge_descriptor",
    "random_face_point",
    "random_instance",
    "to_jsonable",
]

SCHEMA_VERSION = 1
PRNG_NAME = "PCG64"


def to_jsonable(obj):
    """Recursively turn numpy containers into plain JSON values (non-finite -> None)."""
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return to_jsonable(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        f = float(obj)
        return f if np.isfinite(f) else None
    return obj


def config_hash(obj) -> str:
    blob = json.dumps(to_jsonable(obj), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode()).hexdigest()[:16]


def derive_seed(seed: int, index: int) -> int:
    """64-bit seed of row ``index`` under base ``seed``; regenerates that row alone."""
    state = np.random.SeedSequence([int(seed), int(index)]).generate_state(1, np.uint64)
    return int(state[0])


def rng_from(seed):
    return np.random.Generator(np.random.PCG64(int(seed)))


@dataclass
class Instance:
    phi: np.ndarray
    h_desc: dict
    x0: np.ndarray | None = None
    w: np.ndarray | None = None
    y: np.ndarray | None = None
    lam: float | None = None
    name: str = ""
    seed: int | None = None
    raw: dict | None = None

    _gauge: HMatrix | None = field(default=None, repr=False, compare=False)

    @property
    def gauge(self) -> HMatrix:
        if self._gauge is None:
            self._gauge = build_from_descriptor(self.h_desc)
        return self._gauge

    @property
    def observation(self):
        if self.y is not None:
            return self.y
        if self.x0 is None:
            raise InputError(f"instance {self.name!r} has neither y nor x0")
        w = self.w if self.w is not None else 0.0
        return self.phi @ self.x0 + w

    @property
    def noise(self):
        return np.zeros(self.phi.shape[0]) if self.w is None else self.w

    @classmethod
    def from_dict(cls, d, index=0):
        try:
            phi = np.atleast_2d(np.asarray(d["phi"], dtype=float))
            h_desc = d["h"]
        except KeyError as exc:
            raise InputError(f"instance {index}: missing field {exc}") from exc
        q, n = phi.shape
        x0 = None if d.get("x0") is None else np.asarray(d["x0"], dtype=float)
        if x0 is not None and x0.size != n:
            raise InputError(f"instance {index}: x0 has length {x0.size}, phi has {n} columns")
        has_w, has_sigma = d.get("w") is not None, d.get("sigma") is not None
        if has_w and has_sigma:
            raise InputError(f"instance {index}: give either w or sigma, not both")
        w = None
        seed = d.get("seed")
        if has_w:
            w = np.asarray(d["w"], dtype=float)
        elif has_sigma:
            if seed is None:
                raise InputError(f"instance {index}: sigma requires a seed")
            w = float(d["sigma"]) * rng_from(seed).standard_normal(q)
        if w is not None and w.size != q:
            raise InputError(f"instance {index}: w has length {w.size}, phi has {q} rows")
        y = None if d.get("y") is None else np.asarray(d["y"], dtype=float)
        if y is not None and y.size != q:
            raise InputError(f"instance {index}: y has length {y.size}, phi has {q} rows")
        lam = d.get("lambda")
        if lam is not None and not float(lam) > 0:
            raise InputError(f"instance {index}: lambda must be positive")
        for arr in (phi, x0, w, y):
            if arr is not None and not np.all(np.isfinite(arr)):
                raise InputError(f"instance {index}: non-finite data")
        return cls(phi, h_desc, x0, w, y, None if lam is None else float(lam),
                   d.get("name", f"instance-{index}"), seed, d)

    def to_dict(self):
        out = {"name": self.name, "phi": self.phi, "h": self.h_desc}
        if self.x0 is not None:
            out["x0"] = self.x0
        if self.w is not None:
            out["w"] = self.w
        if self.y is not None:
            out["y"] = self.y
        if self.lam is not None:
            out["lambda"] = self.lam
        if self.seed is not None:
            out["seed"] = self.seed
        return to_jsonable(out)


def load_instances(path):
    with open(path) as fh:
        data = json.load(fh)
    if isinstance(data, dict) and "instances" in data:
        schema = data.get("schema", SCHEMA_VERSION)
        if schema != SCHEMA_VERSION:
            raise InputError(f"unsupported schema version {schema}")
        items = data["instances"]
    elif isinstance(data, dict):
        items = [data]
    elif isinstance(data, list):
        items = data
    else:
        raise InputError("instance file must hold an object or a list")
    return [Instance.from_dict(d, i) for i, d in enumerate(items)]


# ---------------------------------------------------------------- ensembles

def random_gauge_descriptor(kind, n, rng=None):
    if kind == "l1":
        return {"kind": "l1", "n": n}
    if kind == "linf":
        return {"kind": "linf", "n": n}
    if kind == "block":
        # contiguous blocks of size 1..3
        blocks, start = [], 0
        while start < n:
            size = int(min(n - start, rng.integers(1, 4)))
            blocks.append(list(range(start, start + size)))
            start += size
        return {"kind": "block", "blocks": blocks}
    raise InputError(f"no random ensemble for gauge kind {kind!r}")


def random_face_point(kind, desc, rng, sparsity=None):
    """A nonzero point on a randomly chosen face of the gauge ``desc``.

    l1: ``sparsity`` nonzeros with random signs; linf: ``sparsity``
    coordinates at the common maximal modulus, the others strictly inside;
    block: about half the blocks active, one saturated position each.
    """
    if kind == "l1":
        n = desc["n"]
        k = sparsity or max(1, n // 4)
        x = np.zeros(n)
        idx = rng.choice(n, size=k, replace=False)
        x[idx] = rng.choice([-1.0, 1.0], size=k) * rng.uniform(1.0, 2.0, size=k)
        return x
    if kind == "linf":
        n = desc["n"]
        k = sparsity or max(1, n // 2)
        top = rng.uniform(1.0, 2.0)
        x = rng.uniform(-0.8, 0.8, size=n) * top
        idx = rng.choice(n, size=k, replace=False)
        x[idx] = rng.choice([-1.0, 1.0], size=k) * top
        return x
    if kind == "block":
        blocks = desc["blocks"]
        n = sum(len(b) for b in blocks)
        x = np.zeros(n)
        active = rng.random(len(blocks)) < 0.5
        if not active.any():
            active[rng.integers(len(blocks))] = True
        for b, on in zip(blocks, active):
            if not on:
                continue
            top = rng.uniform(1.0, 2.0)
            vals = rng.uniform(-0.8, 0.8, size=len(b)) * top
            vals[rng.integers(len(b))] = rng.choice([-1.0, 1.0]) * top
            x[b] = vals
        return x
    raise InputError(f"no random ensemble for gauge kind {kind!r}")


def random_instance(seed, kind, n, q, sparsity=None):
    """Gaussian ``phi`` (q x n), gauge of ``kind`` and a face point ``x0``."""
    rng = rng_from(seed)
    desc = random_gauge_descriptor(kind, n, rng)
    phi = rng.standard_normal((q, n))
    x0 = random_face_point(kind, desc, rng, sparsity)
    return Instance(phi, desc, x0=x0, name=f"{kind}-{seed}", seed=seed)

