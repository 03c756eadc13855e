"""Signed stochastic block model sampler.

Each unordered pair is present independently with probability ``p``; a
present pair gets sign +1 inside a cluster and -1 across clusters, then the
sign is flipped independently with probability ``eta``.

Randomness comes from Philox (counter-based) streams derived from the seed
with ``SeedSequence`` spawn keys: one stream for the label draw and one per
row of the upper triangle. A row's stream covers its pairs ``(i, j > i)``,
so any row can be sampled in isolation and the result does not depend on
how rows are scheduled.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .errors import InvalidParams
from .graph import SignedGraph

_LABEL_STREAM = 0
_ROW_STREAM = 1


class Sizes(enum.Enum):
    EQUAL = "equal"
    UNEVEN = "uneven"


@dataclass(frozen=True)
class SsbmParams:
    n: int
    k: int
    p: float
    eta: float
    seed: int = 0
    sizes: Sizes = Sizes.EQUAL

    def __post_init__(self):
        object.__setattr__(self, "sizes", Sizes(self.sizes))
        if self.n < 1:
            raise InvalidParams(f"n must be positive, got {self.n}")
        if self.k < 2:
            raise InvalidParams(f"k must be at least 2, got {self.k}")
        if self.sizes is Sizes.EQUAL and self.k > self.n:
            raise InvalidParams(f"k={self.k} exceeds n={self.n}")
        if not 0.0 <= self.p <= 1.0:
            raise InvalidParams(f"p must lie in [0, 1], got {self.p}")
        if not 0.0 <= self.eta < 0.5:
            raise InvalidParams(f"eta must lie in [0, 0.5), got {self.eta}")
        if not 0 <= int(self.seed) < 2**64:
            raise InvalidParams("seed must be a 64-bit unsigned integer")


@dataclass(frozen=True, eq=False)
class SsbmInstance:
    graph: SignedGraph
    labels: np.ndarray
    params: SsbmParams
    affinities: np.ndarray | None = field(default=None)


def equal_labels(n: int, k: int) -> np.ndarray:
    """Contiguous blocks; cluster ``l`` is ``[floor(l n / k), floor((l+1) n / k))``."""
    bounds = (np.arange(1, k) * n) // k
    return np.searchsorted(bounds, np.arange(n), side="right").astype(np.int64)


def _stream(seed: int, *key: int) -> np.random.Generator:
    ss = np.random.SeedSequence(int(seed), spawn_key=key)
    return np.random.Generator(np.random.Philox(ss))


def _uneven_labels(params: SsbmParams) -> tuple[np.ndarray, np.ndarray]:
    rng = _stream(params.seed, _LABEL_STREAM)
    while True:
        aff = rng.random(params.k)
        if aff.sum() <= 0:
            continue
        probs = aff / aff.sum()
        labels = rng.choice(params.k, size=params.n, p=probs)
        if np.bincount(labels, minlength=params.k).min() > 0:
            return labels.astype(np.int64), probs
        if params.n < params.k:
            raise InvalidParams("uneven sizes need n >= k to keep clusters nonempty")


def sample_row(params: SsbmParams, labels: np.ndarray, i: int):
    """Sample the pairs ``(i, j)`` for ``j > i``; returns ``(cols, signs)``."""
    m = params.n - i - 1
    if m <= 0 or params.p == 0.0:
        return np.empty(0, dtype=np.int64), np.empty(0)
    u = _stream(params.seed, _ROW_STREAM, i).random((2, m))
    present = u[0] < params.p
    cols = np.flatnonzero(present) + i + 1
    same = labels[cols] == labels[i]
    sign = np.where(same, 1.0, -1.0)
    flip = u[1, present] < params.eta
    sign[flip] = -sign[flip]
    return cols, sign


def generate(params: SsbmParams) -> SsbmInstance:
    if params.sizes is Sizes.EQUAL:
        labels, aff = equal_labels(params.n, params.k), None
    else:
        labels, aff = _uneven_labels(params)
    rows, cols, vals = [], [], []
    for i in range(params.n):
        c, s = sample_row(params, labels, i)
        if c.size:
            rows.append(np.full(c.size, i, dtype=np.int64))
            cols.append(c)
            vals.append(s)
    if rows:
        g = SignedGraph.from_upper(params.n, np.concatenate(rows), np.concatenate(cols),
                                   np.concatenate(vals))
    else:
        g = SignedGraph.from_upper(params.n, [], [], [])
    return SsbmInstance(graph=g, labels=labels, params=params, affinities=aff)


@dataclass(frozen=True)
class EdgeStatistics:
    pairs: Fraction
    intra_pairs: Fraction
    inter_pairs: Fraction
    mean_edges: Fraction
    mean_positive: Fraction
    mean_negative: Fraction
    mean_positive_intra: Fraction
    mean_negative_intra: Fraction
    mean_positive_inter: Fraction
    mean_negative_inter: Fraction
    mean_flipped: Fraction


def expected_edge_statistics(params: SsbmParams) -> EdgeStatistics:
    """Exact first moments of the edge counts under equal cluster sizes."""
    if params.sizes is not Sizes.EQUAL:
        raise InvalidParams("closed-form moments need equal cluster sizes")
    p = Fraction(params.p).limit_denominator(10**12)
    eta = Fraction(params.eta).limit_denominator(10**12)
    sizes = np.bincount(equal_labels(params.n, params.k), minlength=params.k)
    n = params.n
    pairs = Fraction(n * (n - 1), 2)
    intra = Fraction(sum(int(s) * (int(s) - 1) for s in sizes), 2)
    inter = pairs - intra
    pos_in = intra * p * (1 - eta)
    neg_in = intra * p * eta
    pos_out = inter * p * eta
    neg_out = inter * p * (1 - eta)
    return EdgeStatistics(
        pairs=pairs,
        intra_pairs=intra,
        inter_pairs=inter,
        mean_edges=pairs * p,
        mean_positive=pos_in + pos_out,
        mean_negative=neg_in + neg_out,
        mean_positive_intra=pos_in,
        mean_negative_intra=neg_in,
        mean_positive_inter=pos_out,
        mean_negative_inter=neg_out,
        mean_flipped=pairs * p * eta,
    )
