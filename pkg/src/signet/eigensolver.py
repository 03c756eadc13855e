"""Symmetric-definite generalized eigensolvers for ``B x = lambda A x``.

Two routes are provided. For small problems the pencil is reduced to the
standard symmetric matrix ``A^{-1/2} B A^{-1/2}`` and diagonalised densely.
Larger problems go through a block LOBPCG iteration that only needs
products with ``A`` and ``B`` and a Jacobi preconditioner, so no matrix is
ever inverted or factorised.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as la
import scipy.sparse as sp

from .errors import IndefiniteMassMatrix, NotConverged, ValidationError

log = logging.getLogger(__name__)

DENSE_THRESHOLD = 512
DEFAULT_TOL = 1e-8
DEFAULT_MAX_ITER = 500
GUARD_VECTORS = 3


@dataclass(frozen=True, eq=False)
class Pencil:
    """The pencil ``(B, A)``; ``a=None`` means the identity."""

    b: object
    a: object = None

    def __post_init__(self):
        if self.b.shape[0] != self.b.shape[1]:
            raise ValidationError("B must be square")
        if self.a is not None and self.a.shape != self.b.shape:
            raise ValidationError(f"shape mismatch: B {self.b.shape}, A {self.a.shape}")

    @property
    def n(self) -> int:
        return self.b.shape[0]

    def matvec_b(self, x):
        return np.asarray(self.b @ x)

    def matvec_a(self, x):
        return x.copy() if self.a is None else np.asarray(self.a @ x)

    def dense(self) -> tuple[np.ndarray, np.ndarray]:
        b = self.b.toarray() if sp.issparse(self.b) else np.asarray(self.b, dtype=float)
        if self.a is None:
            a = np.eye(self.n)
        else:
            a = self.a.toarray() if sp.issparse(self.a) else np.asarray(self.a, dtype=float)
        return b, a


@dataclass
class EigResult:
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    residuals: np.ndarray
    iterations: int
    converged: np.ndarray
    method: str
    # Ritz values of the wanted pairs, one row per iteration (LOBPCG only)
    history: np.ndarray = field(default_factory=lambda: np.empty((0, 0)))

    @property
    def all_converged(self) -> bool:
        return bool(np.all(self.converged))


def _norm_estimate(m) -> float:
    """Max absolute row sum; bounds the spectral norm of a symmetric matrix."""
    if m is None:
        return 1.0
    if sp.issparse(m):
        return float(abs(m).sum(axis=1).max()) if m.shape[0] else 0.0
    return float(np.abs(m).sum(axis=1).max()) if m.shape[0] else 0.0


def _canonical_signs(x: np.ndarray) -> np.ndarray:
    """Flip columns so each column's largest-magnitude entry is positive."""
    if x.size == 0:
        return x
    idx = np.argmax(np.abs(x), axis=0)
    s = np.sign(x[idx, np.arange(x.shape[1])])
    s[s == 0] = 1.0
    return x * s


def inv_sqrt_spd(a: np.ndarray, rtol: float = 1e-12) -> np.ndarray:
    w, u = la.eigh(a)
    if w[0] <= rtol * max(abs(w[-1]), 1.0):
        raise IndefiniteMassMatrix(f"mass matrix is not positive definite (min eigenvalue {w[0]:.3e})")
    return (u / np.sqrt(w)) @ u.T


def sqrt_spd(a: np.ndarray) -> np.ndarray:
    w, u = la.eigh(a)
    if w[0] < 0 and w[0] < -1e-12 * max(abs(w[-1]), 1.0):
        raise IndefiniteMassMatrix(f"matrix has negative eigenvalue {w[0]:.3e}")
    return (u * np.sqrt(np.clip(w, 0, None))) @ u.T


def residual_norms(pencil: Pencil, lam: np.ndarray, x: np.ndarray) -> np.ndarray:
    r = pencil.matvec_b(x) - pencil.matvec_a(x) * lam
    return np.linalg.norm(r, axis=0)


def dense_generalized(pencil: Pencil, m: int, largest: bool = False) -> EigResult:
    """Diagonalise ``A^{-1/2} B A^{-1/2}`` and map eigenvectors back by ``A^{-1/2}``."""
    b, a = pencil.dense()
    n = pencil.n
    if pencil.a is None:
        lam, v = la.eigh(b)
        x = v
    else:
        s = inv_sqrt_spd(a)
        t = s @ b @ s
        t = 0.5 * (t + t.T)
        lam, v = la.eigh(t)
        x = s @ v
    if largest:
        lam, x = lam[::-1], x[:, ::-1]
    lam, x = lam[:m].copy(), _canonical_signs(x[:, :m])
    res = residual_norms(pencil, lam, x)
    return EigResult(lam, x, res, iterations=0, converged=np.ones(m, dtype=bool),
                     method="dense", history=lam[None, :].copy())


def _jacobi(pencil: Pencil) -> np.ndarray:
    b = pencil.b
    d = np.abs(b.diagonal() if sp.issparse(b) else np.diag(np.asarray(b)))
    shift = 1e-2 * d.mean() if d.size and d.mean() > 0 else 1.0
    return 1.0 / (d + shift)


def _orth_against(s, x, ax):
    """Remove the A-component of ``s`` along the A-orthonormal block ``x`` (twice)."""
    for _ in range(2):
        s = s - x @ (ax.T @ s)
    return s


def _a_orthonormalize(pencil: Pencil, s: np.ndarray, drop: float = 1e-10):
    """A-orthonormal basis of span(s) via the Gram matrix; near-dependent directions dropped."""
    if s.shape[1] == 0:
        return s
    as_ = pencil.matvec_a(s)
    g = s.T @ as_
    g = 0.5 * (g + g.T)
    mu, q = la.eigh(g)
    keep = mu > drop * max(mu[-1], 0.0)
    if not keep.any():
        return s[:, :0]
    return s @ (q[:, keep] / np.sqrt(mu[keep]))


def _rayleigh_ritz(pencil: Pencil, z: np.ndarray):
    bz = pencil.matvec_b(z)
    az = pencil.matvec_a(z)
    gb = z.T @ bz
    ga = z.T @ az
    gb = 0.5 * (gb + gb.T)
    ga = 0.5 * (ga + ga.T)
    try:
        theta, c = la.eigh(gb, ga)
    except la.LinAlgError:
        return None
    return theta, c


def lobpcg(pencil: Pencil, m: int, tol: float = DEFAULT_TOL, max_iter: int = DEFAULT_MAX_ITER,
           seed: int = 0, guard: int = GUARD_VECTORS, x0: np.ndarray | None = None) -> EigResult:
    """Block LOBPCG for the ``m`` smallest pairs of ``B x = lambda A x``.

    The iterate ``X`` always lies in the Rayleigh-Ritz subspace of the next
    step, so each Ritz value can only move down.
    """
    n = pencil.n
    block = min(m + guard, n)
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence(int(seed))))
    x = rng.standard_normal((n, block)) if x0 is None else np.array(x0, dtype=float)
    if x.shape != (n, block):
        raise ValidationError(f"x0 must have shape {(n, block)}")
    x = _a_orthonormalize(pencil, x)
    if x.shape[1] < block:
        raise IndefiniteMassMatrix("could not build an A-orthonormal starting block")
    rr = _rayleigh_ritz(pencil, x)
    if rr is None:
        raise IndefiniteMassMatrix("Gram matrix of A is not positive definite")
    theta, c = rr
    x = x @ c
    precond = _jacobi(pencil)[:, None]
    scale_b = _norm_estimate(pencil.b)
    scale_a = _norm_estimate(pencil.a)
    p = None
    history = []
    res = np.full(block, np.inf)
    it = 0
    for it in range(1, max_iter + 1):
        bx = pencil.matvec_b(x)
        ax = pencil.matvec_a(x)
        r = bx - ax * theta
        res = np.linalg.norm(r, axis=0)
        history.append(theta[:m].copy())
        thresh = tol * (scale_b + np.abs(theta) * scale_a)
        done = res <= thresh
        if done[:m].all():
            break
        active = ~done
        w = precond * r[:, active]
        parts = [w]
        if p is not None:
            parts.append(p[:, active])
        s = _orth_against(np.hstack(parts), x, ax)
        s = _a_orthonormalize(pencil, s)
        s = _orth_against(s, x, ax)
        z = np.hstack([x, s])
        rr = _rayleigh_ritz(pencil, z)
        if rr is None and p is not None:
            # the implicit P block went ill-conditioned: restart without it
            s = _a_orthonormalize(pencil, _orth_against(w, x, ax))
            z = np.hstack([x, s])
            rr = _rayleigh_ritz(pencil, z)
        if rr is None:
            log.warning("LOBPCG: Rayleigh-Ritz breakdown at iteration %d", it)
            break
        theta_all, c_all = rr
        theta = theta_all[:block]
        c = c_all[:, :block]
        x = z @ c
        p = s @ c[block:, :]
    else:
        # loop ran out: refresh residuals for the final iterate
        res = residual_norms(pencil, theta, x)
        history.append(theta[:m].copy())
    thresh = tol * (scale_b + np.abs(theta) * scale_a)
    converged = res[:m] <= thresh[:m]
    xm = _canonical_signs(x[:, :m])
    return EigResult(theta[:m].copy(), xm, res[:m].copy(), iterations=it,
                     converged=converged, method="lobpcg", history=np.array(history))


def smallest_generalized(pencil: Pencil, m: int, tol: float = DEFAULT_TOL,
                         max_iter: int = DEFAULT_MAX_ITER, seed: int = 0,
                         dense_threshold: int = DENSE_THRESHOLD, largest: bool = False,
                         raise_on_failure: bool = False) -> EigResult:
    """The ``m`` algebraically smallest (or largest) generalized eigenpairs.

    Eigenvalues come back in ascending order (descending when ``largest``),
    eigenvectors A-orthonormal. Iterations that hit ``max_iter`` return the
    best Ritz pairs with ``converged`` flags cleared; pass
    ``raise_on_failure=True`` to get :class:`NotConverged` instead.
    """
    n = pencil.n
    if not 1 <= m <= n:
        raise ValidationError(f"m must lie in [1, {n}], got {m}")
    block = min(m + GUARD_VECTORS, n)
    if n <= dense_threshold or n < 4 * block:
        return dense_generalized(pencil, m, largest=largest)
    work = Pencil(-pencil.b, pencil.a) if largest else pencil
    out = lobpcg(work, m, tol=tol, max_iter=max_iter, seed=seed)
    if largest:
        out.eigenvalues = -out.eigenvalues
        out.history = -out.history
    if not out.all_converged:
        msg = (f"LOBPCG: {int((~out.converged).sum())} of {m} pairs unconverged after "
               f"{out.iterations} iterations (max residual {out.residuals.max():.3e})")
        if raise_on_failure:
            raise NotConverged(msg, result=out)
        log.warning(msg)
    return out


def eigenpair_transport(pencil: Pencil, lam: float, v: np.ndarray):
    """Map an eigenpair of ``A^{-1/2} B A^{-1/2}`` to a generalized pair of ``(B, A)``.

    Returns ``(lam, w, residual)`` with ``w = A^{-1/2} v`` and
    ``residual = ||B w - lam A w||``.
    """
    v = np.asarray(v, dtype=float)
    if pencil.a is None:
        w = v.copy()
    else:
        _, a = pencil.dense()
        w = inv_sqrt_spd(a) @ v
    res = float(np.linalg.norm(pencil.matvec_b(w) - lam * pencil.matvec_a(w)))
    return lam, w, res


def standard_eigenvectors(pencil: Pencil, x: np.ndarray) -> np.ndarray:
    """Orthonormal basis of ``span(A^{1/2} x)``: generalized eigenvectors moved to the
    eigenvectors of ``A^{-1/2} B A^{-1/2}``."""
    if pencil.a is None:
        y = np.asarray(x, dtype=float)
    else:
        _, a = pencil.dense()
        y = sqrt_spd(a) @ x
    q, _ = np.linalg.qr(y)
    return q
