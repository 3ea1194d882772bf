"""Constructors for the standard polyhedral gauges.

Column orders are fixed so that H-support index sets are reproducible:

* ``l1``: all sign vectors in lexicographic order, ``+1`` before ``-1``;
* ``linf``: ``e_1, ..., e_n, -e_1, ..., -e_n``;
* ``block``: product over blocks (first block slowest) of the block's
  signed positions ``+e_p`` for ``p`` in the block, then ``-e_p``.
"""

import itertools
from dataclasses import dataclass

import numpy as np

from .errors import CapacityError, InputError
from .gauge import HMatrix

__all__ = [
    "MAX_COLUMNS",
    "Partition",
    "build_l1",
    "build_linf",
    "build_analysis_l1",
    "build_block_l1_linf",
    "build_from_descriptor",
]

MAX_COLUMNS = 2 ** 16
MAX_L1_DIM = 16


@dataclass(frozen=True)
class Partition:
    blocks: tuple

    def __post_init__(self):
        blocks = tuple(tuple(int(i) for i in b) for b in self.blocks)
        if not blocks or any(len(b) == 0 for b in blocks):
            raise InputError("partition blocks must be nonempty")
        flat = [i for b in blocks for i in b]
        if len(set(flat)) != len(flat):
            raise InputError("partition blocks overlap")
        if sorted(flat) != list(range(len(flat))):
            raise InputError("partition must cover 0..n-1 exactly")
        object.__setattr__(self, "blocks", blocks)

    @property
    def n(self):
        return sum(len(b) for b in self.blocks)


def _sign_patterns(n):
    return np.array(list(itertools.product((1.0, -1.0), repeat=n))).T


def build_l1(n: int) -> HMatrix:
    if n < 1:
        raise InputError("dimension must be positive")
    if n > MAX_L1_DIM:
        raise CapacityError(
            f"l1 gauge in dimension {n} needs 2^{n} columns; "
            "pass explicit columns instead"
        )
    return HMatrix(_sign_patterns(n), known_valid=True, label="l1")


def build_linf(n: int) -> HMatrix:
    if n < 1:
        raise InputError("dimension must be positive")
    eye = np.eye(n)
    return HMatrix(np.hstack([eye, -eye]), known_valid=True, label="linf")


def build_analysis_l1(L) -> HMatrix:
    """Gauge of ``x -> ||L x||_1``, i.e. ``H = L^T H_1``.

    It is a genuine gauge only when ``L`` has a trivial kernel; validity is
    left to :func:`polygauge.gauge.is_valid_gauge`.
    """
    L = np.atleast_2d(np.asarray(L, dtype=float))
    p = L.shape[0]
    if p < 1:
        raise InputError("L needs at least one row")
    if p > MAX_L1_DIM:
        raise CapacityError(f"analysis operator with {p} rows needs 2^{p} columns")
    return HMatrix(L.T @ _sign_patterns(p), label="analysis_l1")


def build_block_l1_linf(partition) -> HMatrix:
    """Gauge of ``x -> sum_b ||x_b||_inf`` for the blocks ``b`` of ``partition``."""
    if not isinstance(partition, Partition):
        partition = Partition(partition)
    count = 1
    for b in partition.blocks:
        count *= 2 * len(b)
    if count > MAX_COLUMNS:
        raise CapacityError(f"block gauge needs {count} columns (cap {MAX_COLUMNS})")
    n = partition.n
    choices = [[(p, 1.0) for p in b] + [(p, -1.0) for p in b] for b in partition.blocks]
    cols = np.zeros((n, count))
    for k, combo in enumerate(itertools.product(*choices)):
        for p, s in combo:
            cols[p, k] = s
    return HMatrix(cols, known_valid=True, label="block")


def build_from_descriptor(desc: dict) -> HMatrix:
    """Instantiate a gauge from its JSON descriptor."""
    try:
        kind = desc["kind"]
        if kind == "l1":
            return build_l1(int(desc["n"]))
        if kind == "linf":
            return build_linf(int(desc["n"]))
        if kind == "block":
            return build_block_l1_linf(Partition(desc["blocks"]))
        if kind == "analysis_l1":
            return build_analysis_l1(desc["L"])
        if kind == "explicit":
            return HMatrix.from_columns(desc["columns"])
    except (KeyError, TypeError) as exc:
        raise InputError(f"bad gauge descriptor {desc!r}: {exc}") from exc
    raise InputError(f"unknown gauge kind {kind!r}")
