"""k-means++ rounding of spectral embeddings.

Seeding draws each new center with probability proportional to the squared
distance to the nearest chosen center. The draw is done as an exponential
race: point ``i`` gets an Exp(1) variate ``E_i`` and the winner is
``argmin E_i / D_i^2``. Variates come from a Philox stream keyed by
``(seed, restart, round)`` and indexed by point id, so relabelling the
input points (with matching ids) does not change the chosen centers.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import TooFewPoints, ValidationError


@dataclass(frozen=True)
class KmeansConfig:
    k: int
    restarts: int = 10
    max_iter: int = 300
    tol: float = 1e-9
    seed: int = 0

    def __post_init__(self):
        if self.k < 1:
            raise ValidationError(f"k must be at least 1, got {self.k}")
        if self.restarts < 1:
            raise ValidationError(f"restarts must be at least 1, got {self.restarts}")
        if self.max_iter < 1:
            raise ValidationError("max_iter must be positive")


@dataclass
class KmeansRun:
    labels: np.ndarray
    centers: np.ndarray
    inertia: float
    iterations: int
    history: list = field(default_factory=list)


def _race_uniforms(seed: int, restart: int, rnd: int, ids: np.ndarray) -> np.ndarray:
    ss = np.random.SeedSequence(int(seed), spawn_key=(int(restart), int(rnd)))
    u = np.random.Generator(np.random.Philox(ss)).random(int(ids.max()) + 1)
    return u[ids]


def _sq_dists(x: np.ndarray, c: np.ndarray) -> np.ndarray:
    diff = x[:, None, :] - c[None, :, :]
    return np.einsum("ijk,ijk->ij", diff, diff)


def seed_centers(x: np.ndarray, k: int, seed: int, restart: int, ids: np.ndarray) -> np.ndarray:
    """Indices of the ``k`` k-means++ seeds."""
    n = x.shape[0]
    chosen = []
    e = -np.log1p(-_race_uniforms(seed, restart, 0, ids))
    first = int(np.argmin(e))
    chosen.append(first)
    d2 = ((x - x[first]) ** 2).sum(axis=1)
    for rnd in range(1, k):
        e = -np.log1p(-_race_uniforms(seed, restart, rnd, ids))
        key = np.full(n, np.inf)
        pos = d2 > 0
        if pos.any():
            key[pos] = e[pos] / d2[pos]
        else:
            # every point coincides with a chosen center; take any unused one
            unused = np.ones(n, dtype=bool)
            unused[chosen] = False
            key[unused] = e[unused]
        nxt = int(np.argmin(key))
        chosen.append(nxt)
        d2 = np.minimum(d2, ((x - x[nxt]) ** 2).sum(axis=1))
    return np.array(chosen, dtype=np.int64)


def lloyd(x: np.ndarray, centers: np.ndarray, max_iter: int = 300, tol: float = 1e-9) -> KmeansRun:
    centers = centers.copy()
    k = centers.shape[0]
    labels = np.zeros(x.shape[0], dtype=np.int64)
    history = []
    it = 0
    for it in range(1, max_iter + 1):
        d = _sq_dists(x, centers)
        labels = np.argmin(d, axis=1)
        history.append(float(d[np.arange(x.shape[0]), labels].sum()))
        new = np.empty_like(centers)
        counts = np.bincount(labels, minlength=k)
        for j in range(k):
            if counts[j]:
                new[j] = x[labels == j].mean(axis=0)
        empty = np.flatnonzero(counts == 0)
        if empty.size:
            # re-seed each empty center at the point farthest from its own center
            own = d[np.arange(x.shape[0]), labels]
            for j in empty:
                far = int(np.argmax(own))
                new[j] = x[far]
                own[far] = -1.0
        shift = float(((new - centers) ** 2).sum(axis=1).max())
        centers = new
        if shift <= tol and not empty.size:
            break
    d = _sq_dists(x, centers)
    labels = np.argmin(d, axis=1)
    inertia = float(d[np.arange(x.shape[0]), labels].sum())
    history.append(inertia)
    return KmeansRun(labels=labels, centers=centers, inertia=inertia, iterations=it, history=history)


def kmeans_restarts(points, cfg: KmeansConfig, ids=None) -> list[KmeansRun]:
    x = np.asarray(points, dtype=float)
    if x.ndim == 1:
        x = x[:, None]
    n = x.shape[0]
    if n < cfg.k:
        raise TooFewPoints(f"{n} points cannot form {cfg.k} clusters")
    if not np.all(np.isfinite(x)):
        raise ValidationError("points contain non-finite coordinates")
    ids = np.arange(n) if ids is None else np.asarray(ids, dtype=np.int64)
    if ids.shape != (n,) or np.unique(ids).size != n or (n and ids.min() < 0):
        raise ValidationError("ids must be distinct non-negative integers, one per point")
    runs = []
    for r in range(cfg.restarts):
        c0 = x[seed_centers(x, cfg.k, cfg.seed, r, ids)]
        runs.append(lloyd(x, c0, cfg.max_iter, cfg.tol))
    return runs


def kmeanspp(points, cfg: KmeansConfig, ids=None) -> tuple[np.ndarray, float]:
    """Best-of-restarts k-means++; returns ``(labels, inertia)``.

    Labels are renumbered in order of first appearance.
    """
    runs = kmeans_restarts(points, cfg, ids)
    best = min(range(len(runs)), key=lambda r: runs[r].inertia)
    labels = runs[best].labels
    _, first = np.unique(labels, return_index=True)
    order = np.argsort(first)
    remap = np.empty(labels.max() + 1, dtype=np.int64)
    remap[np.unique(labels)[order]] = np.arange(order.size)
    return remap[labels], runs[best].inertia
