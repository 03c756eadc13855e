"""Partition agreement scores and a subspace distance."""

from __future__ import annotations

import numpy as np

from .errors import LengthMismatch, NotOrthonormal


def _contingency(a, b) -> np.ndarray:
    a = np.asarray(a).ravel()
    b = np.asarray(b).ravel()
    if a.shape != b.shape:
        raise LengthMismatch(f"label vectors differ in length: {a.size} vs {b.size}")
    if a.size < 2:
        raise LengthMismatch("need at least two labelled points")
    _, ia = np.unique(a, return_inverse=True)
    _, ib = np.unique(b, return_inverse=True)
    table = np.zeros((ia.max() + 1, ib.max() + 1), dtype=np.int64)
    np.add.at(table, (ia, ib), 1)
    return table


def _pairs(x) -> int:
    # exact integer arithmetic keeps the degenerate checks honest
    x = np.asarray(x, dtype=np.int64)
    return int((x * (x - 1) // 2).sum())


def rand_index(a, b) -> float:
    """Fraction of point pairs on which the two partitions agree."""
    t = _contingency(a, b)
    n = int(t.sum())
    total = n * (n - 1) // 2
    both = _pairs(t)
    same_a = _pairs(t.sum(axis=1))
    same_b = _pairs(t.sum(axis=0))
    agree = total + 2 * both - same_a - same_b
    return agree / total


def adjusted_rand_index(a, b) -> float:
    """Hubert-Arabie adjusted Rand index.

    When the expected and maximal indices coincide (both partitions trivial
    in the same way) the score is 1 for identical partitions and 0 otherwise.
    """
    t = _contingency(a, b)
    n = int(t.sum())
    total = n * (n - 1) // 2
    both = _pairs(t)
    sa = _pairs(t.sum(axis=1))
    sb = _pairs(t.sum(axis=0))
    # numerator and denominator scaled by 2*total so everything stays integral
    num = 2 * both * total - 2 * sa * sb
    den = (sa + sb) * total - 2 * sa * sb
    if den == 0:
        same = t.shape[0] == t.shape[1] and np.count_nonzero(t) == t.shape[0]
        return 1.0 if same else 0.0
    return float(num / den)


def _check_orthonormal(u: np.ndarray, name: str, atol: float) -> None:
    g = u.T @ u
    err = np.abs(g - np.eye(u.shape[1])).max() if u.size else 0.0
    if err > atol:
        raise NotOrthonormal(f"{name} columns are not orthonormal (max deviation {err:.2e})")


def sin_theta_distance(u, v, atol: float = 1e-8) -> float:
    """Largest principal-angle sine between span(u) and span(v): ``||(I - U U^T) V||_2``."""
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    if u.ndim == 1:
        u = u[:, None]
    if v.ndim == 1:
        v = v[:, None]
    if u.shape[0] != v.shape[0]:
        raise LengthMismatch(f"ambient dimensions differ: {u.shape[0]} vs {v.shape[0]}")
    _check_orthonormal(u, "U", atol)
    _check_orthonormal(v, "V", atol)
    r = v - u @ (u.T @ v)
    if r.size == 0:
        return 0.0
    s = float(np.linalg.norm(r, 2))
    return min(s, 1.0)
