"""Spectral embeddings of signed graphs.

Every method reduces to a symmetric-definite pencil ``(B, A)`` whose
smallest (for the adjacency baseline, largest) eigenvectors are the
embedding coordinates:

==============  =====================================  ==================
method          B                                      A
==============  =====================================  ==================
Sponge          L+ + tau- D-                           L- + tau+ D+
SpongeSym       L+_sym + tau- I                        L-_sym + tau+ I
SignedLbar      D-bar - A                              I
SignedLbarSym   I - D-bar^{-1/2} A D-bar^{-1/2}        I
SignedLbarRw    as SignedLbarSym, then D-bar^{-1/2}    (D-bar metric)
Adjacency       A (largest)                            I
BNC             D+ - A                                 D-bar
BRC             D+ - A                                 I
==============  =====================================  ==================

Isolated vertices make ``A`` singular for Sponge and BNC. Under the
``regularize`` policy their rows and columns are replaced by unit
diagonals in both matrices, which decouples them as a trivial eigenpair
with eigenvalue 1.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
from scipy.sparse.csgraph import connected_components

from .eigensolver import DENSE_THRESHOLD, DEFAULT_MAX_ITER, DEFAULT_TOL, Pencil, smallest_generalized
from .errors import InvalidParams, SingularPencil, ZeroDegreeVertex
from .graph import ZERO_DEGREE_POLICIES, LaplacianKind, SignedGraph, laplacian


class Method(enum.Enum):
    SPONGE = "Sponge"
    SPONGE_SYM = "SpongeSym"
    SIGNED_LBAR = "SignedLbar"
    SIGNED_LBAR_SYM = "SignedLbarSym"
    SIGNED_LBAR_RW = "SignedLbarRw"
    ADJACENCY = "Adjacency"
    BNC = "BNC"
    BRC = "BRC"


SPONGE_FAMILY = (Method.SPONGE, Method.SPONGE_SYM)
DIMS_POLICIES = ("k", "k-1")


def dims_for(k: int, policy: str = "k-1") -> int:
    if policy not in DIMS_POLICIES:
        raise InvalidParams(f"dims policy must be one of {DIMS_POLICIES}, got {policy!r}")
    return k if policy == "k" else max(k - 1, 1)


@dataclass(frozen=True)
class MethodSpec:
    method: Method
    dims: int
    tau_plus: float = 1.0
    tau_minus: float = 1.0
    zero_degree: str = "regularize"
    tol: float = DEFAULT_TOL
    max_iter: int = DEFAULT_MAX_ITER
    dense_threshold: int = DENSE_THRESHOLD
    solver_seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "method", Method(self.method))
        if self.dims < 1:
            raise InvalidParams(f"dims must be at least 1, got {self.dims}")
        if self.method in SPONGE_FAMILY and not (self.tau_plus > 0 and self.tau_minus > 0):
            raise InvalidParams("SPONGE needs tau+ > 0 and tau- > 0")
        if self.zero_degree not in ZERO_DEGREE_POLICIES:
            raise InvalidParams(f"unknown zero-degree policy {self.zero_degree!r}")

    @property
    def side(self) -> str:
        return "largest" if self.method is Method.ADJACENCY else "smallest"


@dataclass(frozen=True, eq=False)
class Embedding:
    coords: np.ndarray
    eigenvalues: np.ndarray
    method: MethodSpec
    pencil: Pencil
    converged: bool = True
    # True when eigenvalue dims and dims+1 coincide, so the cut-off was a tie
    tie_at_cutoff: bool = False


def _regularize_isolated(b, a, isolated: np.ndarray):
    if not isolated.any():
        return b, a
    keep = sp.diags((~isolated).astype(float))
    unit = sp.diags(isolated.astype(float))
    b = keep @ b @ keep + unit
    a = keep @ a @ keep + unit
    return b.tocsr(), a.tocsr()


def _check_zero_degree(g: SignedGraph, policy: str) -> np.ndarray:
    isolated = g.deg_abs <= 0
    if isolated.any() and policy == "reject":
        raise ZeroDegreeVertex(f"isolated vertices, e.g. {np.flatnonzero(isolated)[:5].tolist()}")
    return isolated


def sponge_matrices(a_plus, a_minus, tau_plus: float, tau_minus: float):
    """``(L+ + tau- D-, L- + tau+ D+)`` from the positive and negative parts.

    Works for sparse or dense non-negative symmetric inputs, including
    expected adjacency matrices.
    """
    dense = not sp.issparse(a_plus)
    ap = np.asarray(a_plus, dtype=float) if dense else a_plus
    am = np.asarray(a_minus, dtype=float) if dense else a_minus
    dp = np.asarray(ap.sum(axis=1)).ravel()
    dm = np.asarray(am.sum(axis=1)).ravel()
    if dense:
        b = np.diag(dp + tau_minus * dm) - ap
        a = np.diag(dm + tau_plus * dp) - am
    else:
        b = (sp.diags(dp + tau_minus * dm) - ap).tocsr()
        a = (sp.diags(dm + tau_plus * dp) - am).tocsr()
    return b, a


def _check_mass_definite(g: SignedGraph, isolated: np.ndarray) -> None:
    """L- + tau+ D+ is singular iff some component of the negative graph has no positive degree."""
    ncomp, comp = connected_components(g.a_minus, directed=False)
    has_plus = np.zeros(ncomp, dtype=bool)
    np.logical_or.at(has_plus, comp, (g.deg_plus > 0) | isolated)
    if not has_plus.all():
        bad = np.flatnonzero(~has_plus[comp])[:5].tolist()
        raise SingularPencil(f"L- + tau+ D+ is singular: vertices {bad} have no positive-degree "
                             "vertex in their negative component")


def sponge_pencil(g: SignedGraph, spec: MethodSpec) -> Pencil:
    isolated = _check_zero_degree(g, spec.zero_degree)
    _check_mass_definite(g, isolated)
    b, a = sponge_matrices(g.a_plus, g.a_minus, spec.tau_plus, spec.tau_minus)
    return Pencil(*_regularize_isolated(b, a, isolated))


def sponge_sym_pencil(g: SignedGraph, spec: MethodSpec) -> Pencil:
    n = g.n
    eye = sp.identity(n, format="csr")
    lp = laplacian(g, LaplacianKind.LPLUS_SYM, spec.zero_degree)
    lm = laplacian(g, LaplacianKind.LMINUS_SYM, spec.zero_degree)
    return Pencil((lp + spec.tau_minus * eye).tocsr(), (lm + spec.tau_plus * eye).tocsr())


def baseline_pencil(g: SignedGraph, spec: MethodSpec) -> Pencil:
    m = spec.method
    if m is Method.SIGNED_LBAR:
        return Pencil(laplacian(g, LaplacianKind.SIGNED_LBAR))
    if m in (Method.SIGNED_LBAR_SYM, Method.SIGNED_LBAR_RW):
        return Pencil(laplacian(g, LaplacianKind.SIGNED_LBAR_SYM, spec.zero_degree))
    if m is Method.ADJACENCY:
        return Pencil(g.adjacency.astype(float))
    b = (g.d_plus - g.adjacency).tocsr()
    if m is Method.BRC:
        return Pencil(b)
    if m is Method.BNC:
        isolated = _check_zero_degree(g, spec.zero_degree)
        return Pencil(*_regularize_isolated(b, g.d_bar.tocsr(), isolated))
    raise InvalidParams(f"{m.value} is not a baseline method")


def method_pencil(g: SignedGraph, spec: MethodSpec) -> Pencil:
    if spec.method is Method.SPONGE:
        return sponge_pencil(g, spec)
    if spec.method is Method.SPONGE_SYM:
        return sponge_sym_pencil(g, spec)
    return baseline_pencil(g, spec)


def _solve(pencil: Pencil, spec: MethodSpec) -> tuple[np.ndarray, np.ndarray, bool, bool]:
    n = pencil.n
    if spec.dims > n:
        raise InvalidParams(f"dims={spec.dims} exceeds n={n}")
    m = min(spec.dims + 1, n)
    res = smallest_generalized(pencil, m, tol=spec.tol, max_iter=spec.max_iter,
                               seed=spec.solver_seed, dense_threshold=spec.dense_threshold,
                               largest=spec.side == "largest")
    lam = res.eigenvalues
    tie = False
    if m > spec.dims:
        scale = max(1.0, float(np.abs(lam).max()))
        tie = abs(lam[spec.dims] - lam[spec.dims - 1]) <= 1e-10 * scale
    d = spec.dims
    return lam[:d].copy(), res.eigenvectors[:, :d].copy(), res.all_converged, tie


def _finish(pencil: Pencil, spec: MethodSpec, post=None) -> Embedding:
    lam, x, conv, tie = _solve(pencil, spec)
    if post is not None:
        x = post(x)
    return Embedding(coords=x, eigenvalues=lam, method=spec, pencil=pencil,
                     converged=conv, tie_at_cutoff=tie)


def sponge_embedding(g: SignedGraph, spec: MethodSpec) -> Embedding:
    return _finish(sponge_pencil(g, spec), spec)


def sponge_sym_embedding(g: SignedGraph, spec: MethodSpec) -> Embedding:
    return _finish(sponge_sym_pencil(g, spec), spec)


def baseline_embedding(g: SignedGraph, spec: MethodSpec) -> Embedding:
    pencil = baseline_pencil(g, spec)
    if spec.method is Method.SIGNED_LBAR_RW:
        deg = g.deg_abs
        s = np.zeros(g.n)
        s[deg > 0] = 1.0 / np.sqrt(deg[deg > 0])
        # eigenvectors of the random-walk operator are D-bar^{-1/2} times those of the symmetric one
        return _finish(pencil, spec, post=lambda v: v * s[:, None])
    return _finish(pencil, spec)


def embed(g: SignedGraph, spec: MethodSpec) -> Embedding:
    if spec.method is Method.SPONGE:
        return sponge_embedding(g, spec)
    if spec.method is Method.SPONGE_SYM:
        return sponge_sym_embedding(g, spec)
    return baseline_embedding(g, spec)
