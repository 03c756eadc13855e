"""Signed graph container and the matrix operators derived from it."""

from __future__ import annotations

import enum
import math
import re
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path
from typing import Iterable

import numpy as np
import scipy.sparse as sp

from .errors import (
    IndexOutOfRange,
    NonFiniteWeight,
    ParseError,
    SelfLoop,
    ValidationError,
    ZeroDegreeVertex,
)

ZERO_DEGREE_POLICIES = ("regularize", "reject")


class LaplacianKind(enum.Enum):
    LPLUS = "Lplus"
    LMINUS = "Lminus"
    SIGNED_LBAR = "SignedLbar"
    SIGNED_LBAR_SYM = "SignedLbarSym"
    SIGNED_LBAR_RW = "SignedLbarRw"
    LPLUS_SYM = "LplusSym"
    LMINUS_SYM = "LminusSym"


@dataclass(frozen=True, eq=False)
class SignedGraph:
    """Undirected signed graph on vertices ``0..n-1``.

    ``adjacency`` is a symmetric CSR matrix with an empty diagonal. It is
    built from upper-triangle data only, so symmetry holds exactly. Treat the
    instance as immutable; derived matrices are cached on first access.
    """

    n: int
    adjacency: sp.csr_matrix

    @classmethod
    def from_upper(cls, n: int, rows, cols, weights) -> "SignedGraph":
        """Build from upper-triangle triples (``rows < cols``), no duplicates."""
        rows = np.asarray(rows, dtype=np.int64)
        cols = np.asarray(cols, dtype=np.int64)
        weights = np.asarray(weights, dtype=np.float64)
        upper = sp.coo_matrix((weights, (rows, cols)), shape=(n, n))
        full = (upper + upper.T).tocsr()
        full.sum_duplicates()
        full.eliminate_zeros()
        full.sort_indices()
        return cls(n=n, adjacency=full)

    @classmethod
    def from_dense(cls, a) -> "SignedGraph":
        a = np.asarray(a, dtype=np.float64)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise ValidationError("adjacency must be square")
        if not np.all(np.isfinite(a)):
            raise NonFiniteWeight("adjacency contains non-finite entries")
        if np.any(np.diag(a) != 0):
            raise SelfLoop("adjacency has a nonzero diagonal")
        r, c = np.nonzero(np.triu(a, 1))
        return cls.from_upper(a.shape[0], r, c, a[r, c])

    # derived matrices -------------------------------------------------

    def _sign_part(self, sign: float) -> sp.csr_matrix:
        # fresh arrays: scipy's elementwise maximum can share index arrays with its input
        coo = self.adjacency.tocoo()
        keep = sign * coo.data > 0
        out = sp.csr_matrix((sign * coo.data[keep], (coo.row[keep], coo.col[keep])),
                            shape=self.adjacency.shape)
        out.sort_indices()
        return out

    @cached_property
    def a_plus(self) -> sp.csr_matrix:
        return self._sign_part(1.0)

    @cached_property
    def a_minus(self) -> sp.csr_matrix:
        return self._sign_part(-1.0)

    @cached_property
    def deg_plus(self) -> np.ndarray:
        return np.asarray(self.a_plus.sum(axis=1)).ravel()

    @cached_property
    def deg_minus(self) -> np.ndarray:
        return np.asarray(self.a_minus.sum(axis=1)).ravel()

    @cached_property
    def deg_abs(self) -> np.ndarray:
        return np.asarray(abs(self.adjacency).sum(axis=1)).ravel()

    @property
    def d_plus(self) -> sp.dia_matrix:
        return sp.diags(self.deg_plus)

    @property
    def d_minus(self) -> sp.dia_matrix:
        return sp.diags(self.deg_minus)

    @property
    def d_bar(self) -> sp.dia_matrix:
        return sp.diags(self.deg_abs)

    @property
    def num_edges(self) -> int:
        return self.adjacency.nnz // 2

    def edges(self):
        """Upper-triangle edges as ``(rows, cols, weights)`` arrays, row-major order."""
        upper = sp.triu(self.adjacency, k=1).tocsr()
        upper.sort_indices()
        coo = upper.tocoo()
        return coo.row.astype(np.int64), coo.col.astype(np.int64), coo.data.copy()

    def scaled(self, c: float) -> "SignedGraph":
        return SignedGraph(n=self.n, adjacency=(self.adjacency * c).tocsr())

    def permuted(self, perm) -> "SignedGraph":
        """Return the graph with vertex ``perm[i]`` relabelled as ``i``."""
        perm = np.asarray(perm)
        return SignedGraph(n=self.n, adjacency=self.adjacency[perm][:, perm].tocsr())


def build_from_edges(n: int, triples: Iterable[tuple[int, int, float]]) -> SignedGraph:
    """Accumulate weighted edges into a signed graph.

    Repeated unordered pairs are summed; pairs whose total is exactly zero
    are dropped from the sparse structure.
    """
    if n < 0:
        raise ValidationError(f"vertex count must be non-negative, got {n}")
    rows, cols, vals = [], [], []
    for t in triples:
        i, j, w = int(t[0]), int(t[1]), float(t[2])
        if not (0 <= i < n and 0 <= j < n):
            raise IndexOutOfRange(f"edge ({i}, {j}) outside [0, {n})")
        if i == j:
            raise SelfLoop(f"self-loop at vertex {i}")
        if not math.isfinite(w):
            raise NonFiniteWeight(f"edge ({i}, {j}) has weight {w}")
        if i > j:
            i, j = j, i
        rows.append(i)
        cols.append(j)
        vals.append(w)
    # coo -> csr sums duplicates; exact zero sums are removed in from_upper
    return SignedGraph.from_upper(n, rows, cols, vals)


def _inv_sqrt_degrees(deg: np.ndarray, policy: str, what: str) -> np.ndarray:
    if policy not in ZERO_DEGREE_POLICIES:
        raise ValidationError(f"unknown zero-degree policy {policy!r}")
    zero = deg <= 0
    if zero.any() and policy == "reject":
        idx = np.flatnonzero(zero)[:5].tolist()
        raise ZeroDegreeVertex(f"{what} has zero-degree vertices, e.g. {idx}")
    out = np.zeros_like(deg, dtype=np.float64)
    out[~zero] = 1.0 / np.sqrt(deg[~zero])
    return out


def sym_normalized(adj: sp.spmatrix, deg: np.ndarray, policy: str = "regularize",
                   what: str = "graph") -> sp.csr_matrix:
    """``I - D^{-1/2} adj D^{-1/2}``; zero-degree rows become identity rows."""
    s = sp.diags(_inv_sqrt_degrees(deg, policy, what))
    n = adj.shape[0]
    return (sp.identity(n, format="csr") - s @ adj @ s).tocsr()


def laplacian(g: SignedGraph, kind: LaplacianKind | str,
              zero_degree: str = "regularize") -> sp.csr_matrix:
    kind = LaplacianKind(kind)
    n = g.n
    if kind is LaplacianKind.LPLUS:
        out = g.d_plus - g.a_plus
    elif kind is LaplacianKind.LMINUS:
        out = g.d_minus - g.a_minus
    elif kind is LaplacianKind.SIGNED_LBAR:
        out = g.d_bar - g.adjacency
    elif kind is LaplacianKind.SIGNED_LBAR_SYM:
        out = sym_normalized(g.adjacency, g.deg_abs, zero_degree, "D_bar")
    elif kind is LaplacianKind.SIGNED_LBAR_RW:
        # not symmetric; use SIGNED_LBAR_SYM for eigen-computations
        inv = np.zeros(n)
        nz = g.deg_abs > 0
        if (~nz).any() and zero_degree == "reject":
            raise ZeroDegreeVertex("D_bar has zero-degree vertices")
        inv[nz] = 1.0 / g.deg_abs[nz]
        out = sp.identity(n, format="csr") - sp.diags(inv) @ g.adjacency
    elif kind is LaplacianKind.LPLUS_SYM:
        out = sym_normalized(g.a_plus, g.deg_plus, zero_degree, "D_plus")
    else:
        out = sym_normalized(g.a_minus, g.deg_minus, zero_degree, "D_minus")
    return sp.csr_matrix(out)


def is_balanced(g: SignedGraph) -> bool:
    """Two-colouring check: can vertices be split so + edges stay inside, - edges cross?"""
    colour = -np.ones(g.n, dtype=np.int64)
    adj = g.adjacency
    for start in range(g.n):
        if colour[start] >= 0:
            continue
        colour[start] = 0
        stack = [start]
        while stack:
            u = stack.pop()
            lo, hi = adj.indptr[u], adj.indptr[u + 1]
            for v, w in zip(adj.indices[lo:hi], adj.data[lo:hi]):
                want = colour[u] if w > 0 else 1 - colour[u]
                if colour[v] < 0:
                    colour[v] = want
                    stack.append(v)
                elif colour[v] != want:
                    return False
    return True


# edge-list files ------------------------------------------------------

_N_HEADER = re.compile(r"^#\s*n\s*=\s*(\d+)\s*$")


def read_edge_list(path: str | Path, n: int | None = None) -> SignedGraph:
    """Parse ``i<TAB>j<TAB>w`` lines; ``#`` lines are comments.

    A ``# n=<count>`` comment fixes the vertex count; otherwise it is the
    largest index plus one.
    """
    triples = []
    header_n = None
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            s = line.strip()
            if not s:
                continue
            if s.startswith("#"):
                m = _N_HEADER.match(s)
                if m:
                    header_n = int(m.group(1))
                continue
            parts = s.split("\t")
            if len(parts) != 3:
                parts = s.split()
            if len(parts) != 3:
                raise ParseError(f"{path}:{lineno}: expected 3 fields, got {len(parts)}")
            try:
                triples.append((int(parts[0]), int(parts[1]), float(parts[2])))
            except ValueError as exc:
                raise ParseError(f"{path}:{lineno}: {exc}") from None
    if n is None:
        n = header_n
    if n is None:
        n = 1 + max((max(i, j) for i, j, _ in triples), default=-1)
    return build_from_edges(n, triples)


def write_edge_list(g: SignedGraph, path: str | Path) -> None:
    rows, cols, w = g.edges()
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(f"# n={g.n}\n")
        for i, j, x in zip(rows.tolist(), cols.tolist(), w.tolist()):
            fh.write(f"{i}\t{j}\t{x!r}\n")
