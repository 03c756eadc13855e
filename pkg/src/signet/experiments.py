"""Monte Carlo sweeps over the signed block model and single-file clustering."""

from __future__ import annotations

import csv
import enum
import json
import logging
import math
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from . import __version__
from .clustering import KmeansConfig, kmeanspp
from .embeddings import MethodSpec, embed
from .errors import InvalidParams, SignetError, ValidationError
from .graph import SignedGraph, read_edge_list
from .metrics import adjusted_rand_index
from .ssbm import Sizes, SsbmParams, generate
from .theory import TauMode, tau_admissible

log = logging.getLogger(__name__)

THREADS_ENV = "SIGNET_THREADS"


class Axis(enum.Enum):
    ETA = "eta"
    P = "p"
    TAU = "tau"


AXIS_COLUMNS = {Axis.ETA: ("eta",), Axis.P: ("p",), Axis.TAU: ("tau_plus", "tau_minus")}


@dataclass(frozen=True)
class ExperimentGrid:
    axis: Axis
    n: int
    k: int
    values: tuple
    methods: tuple[MethodSpec, ...]
    p: float = 0.1
    eta: float = 0.0
    trials: int = 20
    sizes: Sizes = Sizes.EQUAL
    restarts: int = 10
    seed_offset: int = 0

    def __post_init__(self):
        object.__setattr__(self, "axis", Axis(self.axis))
        object.__setattr__(self, "sizes", Sizes(self.sizes))
        object.__setattr__(self, "methods", tuple(self.methods))
        vals = tuple(tuple(float(x) for x in v) if self.axis is Axis.TAU else float(v)
                     for v in self.values)
        object.__setattr__(self, "values", vals)
        if not self.methods:
            raise InvalidParams("at least one method is required")
        if not self.values:
            raise InvalidParams("the grid has no cells")
        if self.trials < 1:
            raise InvalidParams("trials must be at least 1")
        if self.axis is Axis.TAU and any(len(v) != 2 for v in self.values):
            raise InvalidParams("tau grid cells must be (tau_plus, tau_minus) pairs")

    @property
    def seeds(self) -> range:
        return range(self.seed_offset, self.seed_offset + self.trials)

    def cell_params(self, cell, seed: int) -> SsbmParams:
        p, eta = self.p, self.eta
        if self.axis is Axis.ETA:
            eta = cell
        elif self.axis is Axis.P:
            p = cell
        return SsbmParams(n=self.n, k=self.k, p=p, eta=eta, seed=seed, sizes=self.sizes)

    def cell_method(self, cell, spec: MethodSpec) -> MethodSpec:
        if self.axis is Axis.TAU:
            return replace(spec, tau_plus=cell[0], tau_minus=cell[1])
        return spec

    def cell_coords(self, cell) -> dict:
        if self.axis is Axis.TAU:
            return {"tau_plus": cell[0], "tau_minus": cell[1]}
        return {self.axis.value: cell}

    def to_dict(self) -> dict:
        return {
            "axis": self.axis.value, "n": self.n, "k": self.k, "p": self.p, "eta": self.eta,
            "values": [list(v) if isinstance(v, tuple) else v for v in self.values],
            "methods": [{"method": m.method.value, "dims": m.dims, "tau_plus": m.tau_plus,
                         "tau_minus": m.tau_minus, "zero_degree": m.zero_degree}
                        for m in self.methods],
            "trials": self.trials, "sizes": self.sizes.value, "restarts": self.restarts,
            "seed_offset": self.seed_offset,
        }


@dataclass
class TrialResult:
    cell: dict
    method: str
    seed: int
    ari: float
    secs: float
    eigenvalues: list = field(default_factory=list)
    sin_theta: float | None = None
    converged: bool = True
    error: str | None = None


@dataclass
class SweepResult:
    grid: ExperimentGrid
    trials: list[TrialResult]
    aggregates: list[dict]


def worker_count(default: int = 1) -> int:
    raw = os.environ.get(THREADS_ENV)
    if raw is None or raw.strip() == "":
        return default
    try:
        n = int(raw)
    except ValueError:
        raise ValidationError(f"{THREADS_ENV} must be a positive integer, got {raw!r}") from None
    if n < 1:
        raise ValidationError(f"{THREADS_ENV} must be a positive integer, got {raw!r}")
    return n


def cluster_graph(g: SignedGraph, spec: MethodSpec, k: int, seed: int = 0, restarts: int = 10):
    """Embed then round; returns ``(labels, embedding)``."""
    emb = embed(g, spec)
    if k == 1:
        return np.zeros(g.n, dtype=np.int64), emb
    labels, _ = kmeanspp(emb.coords, KmeansConfig(k=k, restarts=restarts, seed=seed))
    return labels, emb


def _run_job(grid: ExperimentGrid, cell, seed: int) -> list[TrialResult]:
    out = []
    coords = grid.cell_coords(cell)
    try:
        inst = generate(grid.cell_params(cell, seed))
    except SignetError as exc:
        return [TrialResult(coords, m.method.value, seed, math.nan, 0.0, error=repr(exc))
                for m in grid.methods]
    for base in grid.methods:
        spec = grid.cell_method(cell, base)
        t0 = time.perf_counter()
        try:
            labels, emb = cluster_graph(inst.graph, spec, grid.k, seed=seed, restarts=grid.restarts)
            ari = adjusted_rand_index(inst.labels, labels)
            res = TrialResult(coords, spec.method.value, seed, ari, time.perf_counter() - t0,
                              eigenvalues=emb.eigenvalues.tolist(), converged=emb.converged)
        except SignetError as exc:
            log.warning("trial failed (%s, seed %d): %s", spec.method.value, seed, exc)
            res = TrialResult(coords, spec.method.value, seed, math.nan,
                              time.perf_counter() - t0, error=f"{type(exc).__name__}: {exc}")
        out.append(res)
    return out


def _aggregate(grid: ExperimentGrid, trials: list[TrialResult]) -> list[dict]:
    rows = []
    by_key: dict = {}
    for t in trials:
        key = (tuple(t.cell.values()), t.method)
        by_key.setdefault(key, []).append(t)
    for (cellvals, method), ts in by_key.items():
        aris = np.array([t.ari for t in ts if t.error is None])
        m = aris.size
        mean = float(aris.mean()) if m else math.nan
        se = float(aris.std(ddof=1) / math.sqrt(m)) if m > 1 else (0.0 if m else math.nan)
        row = dict(ts[0].cell)
        row.update(method=method, trials=len(ts), failed=len(ts) - m, mean_ari=mean, stderr_ari=se)
        if grid.axis is Axis.TAU:
            tp, tm = cellvals
            row["bottom_one"] = tau_admissible(grid.n, grid.eta, tp, tm, TauMode.BOTTOM_ONE)
            row["bottom_two"] = tau_admissible(grid.n, grid.eta, tp, tm, TauMode.BOTTOM_TWO)
        rows.append(row)
    return rows


def run_sweep(grid: ExperimentGrid, workers: int | None = None) -> SweepResult:
    """One trial per (cell, method, seed), gathered in cell-major order."""
    workers = worker_count() if workers is None else workers
    jobs = [(cell, seed) for cell in grid.values for seed in grid.seeds]
    if workers <= 1:
        chunks = [_run_job(grid, c, s) for c, s in jobs]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            chunks = list(pool.map(lambda js: _run_job(grid, *js), jobs))
    # reorder from (cell, seed, method) to (cell, method, seed)
    trials = []
    per_cell = len(grid.seeds)
    for ci in range(len(grid.values)):
        block = chunks[ci * per_cell:(ci + 1) * per_cell]
        for mi in range(len(grid.methods)):
            trials.extend(b[mi] for b in block)
    return SweepResult(grid=grid, trials=trials, aggregates=_aggregate(grid, trials))


def _fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, float):
        return "" if math.isnan(x) else repr(x)
    return str(x)


def write_sweep(result: SweepResult, path: str | Path, timing: bool = False) -> list[Path]:
    """Trial CSV, per-cell summary CSV and a JSON sidecar.

    Wall times only vary between runs, so the ``secs`` column is left empty
    unless ``timing`` is set; without it reruns are byte-identical.
    """
    path = Path(path)
    axes = AXIS_COLUMNS[result.grid.axis]
    summary = path.with_name(path.stem + "_summary.csv")
    sidecar = path.with_suffix(".json")
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow([*axes, "method", "seed", "ari", "secs", "converged", "error"])
        for t in result.trials:
            w.writerow([*(_fmt(t.cell[a]) for a in axes), t.method, t.seed, _fmt(t.ari),
                        _fmt(t.secs) if timing else "", _fmt(t.converged), t.error or ""])
    cols = [*axes, "method", "trials", "failed", "mean_ari", "stderr_ari"]
    if result.grid.axis is Axis.TAU:
        cols += ["bottom_one", "bottom_two"]
    with open(summary, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(cols)
        for row in result.aggregates:
            w.writerow([_fmt(row[c]) for c in cols])
    meta = {"version": __version__, "grid": result.grid.to_dict(), "timing": timing,
            "outputs": {"trials": path.name, "summary": summary.name}}
    sidecar.write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return [path, summary, sidecar]


# single-file clustering ----------------------------------------------------

def cluster_summary(g: SignedGraph, labels: np.ndarray, k: int) -> list[dict]:
    """Per-cluster size and counts of internal positive and negative edges."""
    rows, cols, w = g.edges()
    same = labels[rows] == labels[cols]
    out = []
    for c in range(k):
        inside = same & (labels[rows] == c)
        pos = int(np.count_nonzero(w[inside] > 0))
        neg = int(np.count_nonzero(w[inside] < 0))
        tot = pos + neg
        out.append({"cluster": c, "size": int(np.count_nonzero(labels == c)),
                    "pos_internal": pos, "neg_internal": neg,
                    "pos_ratio": pos / tot if tot else math.nan,
                    "neg_ratio": neg / tot if tot else math.nan})
    return out


def block_density(g: SignedGraph, labels: np.ndarray, k: int) -> np.ndarray:
    """Mean signed weight per vertex pair between (and within) clusters."""
    ind = np.zeros((g.n, k))
    ind[np.arange(g.n), labels] = 1.0
    sums = ind.T @ (g.adjacency @ ind)
    sizes = ind.sum(axis=0)
    pairs = np.outer(sizes, sizes) - np.diag(sizes)
    with np.errstate(invalid="ignore", divide="ignore"):
        return np.where(pairs > 0, sums / np.where(pairs > 0, pairs, 1), 0.0)


def sorting_permutation(labels: np.ndarray) -> np.ndarray:
    return np.argsort(labels, kind="stable")


def cluster_file(edge_list_path: str | Path, spec: MethodSpec, k: int, out_prefix: str | Path,
                 seed: int = 0, restarts: int = 10) -> dict:
    """Cluster an edge-list file and write labels, summary, permutation and block densities."""
    if k < 1:
        raise InvalidParams("k must be at least 1")
    g = read_edge_list(edge_list_path)
    if g.n < k:
        raise InvalidParams(f"graph has {g.n} vertices, fewer than k={k}")
    labels, emb = cluster_graph(g, spec, k, seed=seed, restarts=restarts)
    prefix = Path(out_prefix)
    paths = {
        "labels": prefix.with_name(prefix.name + "_labels.txt"),
        "summary": prefix.with_name(prefix.name + "_summary.csv"),
        "permutation": prefix.with_name(prefix.name + "_permutation.txt"),
        "density": prefix.with_name(prefix.name + "_block_density.csv"),
    }
    write_labels(labels, paths["labels"])
    summary = cluster_summary(g, labels, k)
    cols = ["cluster", "size", "pos_internal", "neg_internal", "pos_ratio", "neg_ratio"]
    with open(paths["summary"], "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(cols)
        for row in summary:
            w.writerow([_fmt(row[c]) for c in cols])
    perm = sorting_permutation(labels)
    paths["permutation"].write_text("".join(f"{i}\n" for i in perm.tolist()), encoding="utf-8")
    dens = block_density(g, labels, k)
    with open(paths["density"], "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        for row in dens.tolist():
            w.writerow([repr(x) for x in row])
    return {"labels": labels, "summary": summary, "paths": paths, "embedding": emb}


def write_labels(labels, path: str | Path) -> None:
    Path(path).write_text("".join(f"{int(x)}\n" for x in labels), encoding="utf-8")


def read_labels(path: str | Path) -> np.ndarray:
    vals = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            s = line.strip()
            if s and not s.startswith("#"):
                vals.append(int(s.split()[-1]))
    return np.array(vals, dtype=np.int64)
