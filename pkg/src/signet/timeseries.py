"""Signed correlation networks from multivariate time series."""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import (
    LengthMismatch,
    MissingBenchmark,
    NonPositivePrice,
    ParseError,
    ValidationError,
    ZeroVarianceSeries,
)
from .graph import SignedGraph

_INDEX_NAMES = {"", "date", "day", "time", "timestamp", "t"}


@dataclass(frozen=True, eq=False)
class PricePanel:
    """Prices with one row per instrument and one column per day."""

    prices: np.ndarray
    ids: tuple[str, ...]
    benchmark: str | None = None

    def __post_init__(self):
        p = np.asarray(self.prices, dtype=float)
        if p.ndim != 2:
            raise ValidationError("prices must be a 2-d array (instruments x days)")
        if p.shape[0] != len(self.ids):
            raise LengthMismatch(f"{p.shape[0]} price rows but {len(self.ids)} ids")
        if len(set(self.ids)) != len(self.ids):
            raise ValidationError("instrument ids must be unique")
        if self.benchmark is not None and self.benchmark not in self.ids:
            raise MissingBenchmark(f"benchmark {self.benchmark!r} not among the instruments")
        object.__setattr__(self, "prices", p)
        object.__setattr__(self, "ids", tuple(self.ids))


@dataclass(frozen=True, eq=False)
class Returns:
    values: np.ndarray  # instruments x periods
    ids: tuple[str, ...]


def read_price_csv(path: str | Path, benchmark: str | None = None) -> PricePanel:
    """Header row of instrument ids, then one row of prices per day.

    A leading date/index column is recognised by its header name and
    skipped. Rows with empty or non-numeric cells are rejected.
    """
    with open(path, newline="", encoding="utf-8") as fh:
        rows = [r for r in csv.reader(fh) if r and any(c.strip() for c in r)]
    if not rows:
        raise ParseError(f"{path}: empty file")
    header = [h.strip() for h in rows[0]]
    skip = 1 if header[0].lower() in _INDEX_NAMES else 0
    ids = header[skip:]
    data = []
    for lineno, r in enumerate(rows[1:], 2):
        cells = [c.strip() for c in r[skip:]]
        if len(cells) != len(ids):
            raise ParseError(f"{path}:{lineno}: expected {len(ids)} values, got {len(cells)}")
        try:
            vals = [float(c) for c in cells]
        except ValueError:
            raise ParseError(f"{path}:{lineno}: missing or non-numeric value") from None
        if not all(np.isfinite(vals)):
            raise ParseError(f"{path}:{lineno}: missing or non-finite value")
        data.append(vals)
    prices = np.array(data, dtype=float).T if data else np.empty((len(ids), 0))
    return PricePanel(prices=prices, ids=tuple(ids), benchmark=benchmark)


def log_returns(panel: PricePanel) -> Returns:
    p = panel.prices
    if p.shape[1] < 2:
        raise ValidationError("need at least two days of prices")
    if np.any(p <= 0):
        i, t = map(int, np.argwhere(p <= 0)[0])
        raise NonPositivePrice(f"non-positive price for {panel.ids[i]!r} on day {t}")
    return Returns(values=np.diff(np.log(p), axis=1), ids=panel.ids)


def excess_returns(returns: Returns, benchmark: str) -> Returns:
    """Subtract the benchmark row from every row and drop the benchmark itself."""
    if benchmark not in returns.ids:
        raise MissingBenchmark(f"benchmark {benchmark!r} not among the instruments")
    b = returns.ids.index(benchmark)
    keep = [i for i in range(len(returns.ids)) if i != b]
    vals = returns.values[keep] - returns.values[b]
    return Returns(values=vals, ids=tuple(returns.ids[i] for i in keep))


def pearson_matrix(values) -> np.ndarray:
    x = np.asarray(values, dtype=float)
    if x.ndim != 2 or x.shape[1] < 2:
        raise ValidationError("need a 2-d array with at least two observations per series")
    z = x - x.mean(axis=1, keepdims=True)
    norms = np.sqrt((z * z).sum(axis=1))
    flat = norms <= 1e-14 * np.maximum(np.abs(x).max(axis=1), 1.0)
    if flat.any():
        raise ZeroVarianceSeries(f"series {np.flatnonzero(flat)[:5].tolist()} have zero variance")
    z /= norms[:, None]
    c = z @ z.T
    c = 0.5 * (c + c.T)
    np.fill_diagonal(c, 1.0)
    return np.clip(c, -1.0, 1.0)


def correlation_network(returns, threshold: float | None = None) -> SignedGraph:
    """Complete signed graph weighted by pairwise Pearson correlation.

    With ``threshold`` set, pairs with ``|corr| < threshold`` are dropped.
    """
    values = returns.values if isinstance(returns, Returns) else returns
    c = pearson_matrix(values)
    n = c.shape[0]
    r, col = np.triu_indices(n, k=1)
    w = c[r, col]
    if threshold is not None:
        if threshold < 0:
            raise ValidationError("threshold must be non-negative")
        keep = np.abs(w) >= threshold
        r, col, w = r[keep], col[keep], w[keep]
    return SignedGraph.from_upper(n, r, col, w)
