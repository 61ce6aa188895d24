"""Correlation networks of window returns and their minimum spanning trees."""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import TextIO

import numpy as np

from rdcnet.errors import ComputationError
from rdcnet.ingest import ReturnSeries, WindowPanel

DEFAULT_MIN_OVERLAP = 30


class DroppedAssetWarning(UserWarning):
    """An asset was removed from a window's correlation matrix."""


@dataclass(frozen=True, eq=False)
class CorrelationMatrix:
    assets: tuple[str, ...]
    rho: np.ndarray
    dropped: tuple[str, ...] = field(default=())

    def __post_init__(self):
        n = len(self.assets)
        if self.rho.shape != (n, n):
            raise ValueError(f"rho has shape {self.rho.shape}, expected {(n, n)}")
        if not np.array_equal(self.rho, self.rho.T):
            raise ValueError("correlation matrix is not symmetric")
        if not np.all(np.diag(self.rho) == 1.0):
            raise ValueError("correlation matrix diagonal must be exactly 1")
        if np.any(np.abs(self.rho) > 1.0):
            raise ValueError("correlation entries outside [-1, 1]")


@dataclass(frozen=True, eq=False)
class DistanceMatrix:
    assets: tuple[str, ...]
    d: np.ndarray

    def __post_init__(self):
        n = len(self.assets)
        if self.d.shape != (n, n):
            raise ValueError(f"d has shape {self.d.shape}, expected {(n, n)}")
        if not np.array_equal(self.d, self.d.T):
            raise ValueError("distance matrix is not symmetric")
        if not np.all(np.diag(self.d) == 0.0):
            raise ValueError("distance matrix diagonal must be exactly 0")
        if np.any(self.d < 0) or np.any(self.d > 2.0):
            raise ValueError("distance entries outside [0, 2]")


@dataclass(frozen=True, eq=False)
class MstTree:
    assets: tuple[str, ...]
    edges: tuple[tuple[int, int, float], ...]

    def __post_init__(self):
        n = len(self.assets)
        if len(self.edges) != n - 1:
            raise ValueError(f"a spanning tree on {n} nodes has {n - 1} edges, got {len(self.edges)}")
        if any(not 0 <= i < j < n for i, j, _ in self.edges):
            raise ValueError("edges must satisfy 0 <= i < j < n")

    @property
    def n(self) -> int:
        return len(self.assets)

    @property
    def adjacency(self) -> np.ndarray:
        """Binary symmetric adjacency matrix."""
        a = np.zeros((self.n, self.n))
        for i, j, _ in self.edges:
            a[i, j] = a[j, i] = 1.0
        return a

    def weighted_adjacency(self) -> np.ndarray:
        """Adjacency carrying the distance of each tree edge."""
        a = np.zeros((self.n, self.n))
        for i, j, w in self.edges:
            a[i, j] = a[j, i] = w
        return a

    @property
    def total_weight(self) -> float:
        return float(sum(w for _, _, w in self.edges))

    def degrees(self) -> np.ndarray:
        deg = np.zeros(self.n, dtype=int)
        for i, j, _ in self.edges:
            deg[i] += 1
            deg[j] += 1
        return deg


def _align(x: ReturnSeries, y: ReturnSeries) -> tuple[np.ndarray, np.ndarray]:
    common, ix, iy = np.intersect1d(x.dates, y.dates, assume_unique=True, return_indices=True)
    return x.values[ix], y.values[iy]


def pearson(x, y, min_overlap: int = 2) -> float:
    """Pearson correlation of two series.

    ``x`` and ``y`` are either two :class:`ReturnSeries`, correlated on
    their common dates, or two equal-length arrays that are already aligned.
    """
    if isinstance(x, ReturnSeries) and isinstance(y, ReturnSeries):
        xs, ys = _align(x, y)
    else:
        xs, ys = np.asarray(x, dtype=float), np.asarray(y, dtype=float)
        if xs.shape != ys.shape or xs.ndim != 1:
            raise ValueError("x and y must be 1-d arrays of equal length")
    if len(xs) < max(min_overlap, 2):
        raise ComputationError(f"insufficient overlap: {len(xs)} common observations, need {max(min_overlap, 2)}")
    xc = xs - xs.mean()
    yc = ys - ys.mean()
    sxx, syy = float(xc @ xc), float(yc @ yc)
    if np.ptp(xs) == 0 or np.ptp(ys) == 0 or sxx == 0 or syy == 0:
        raise ComputationError("zero variance on the overlap")
    r = float(xc @ yc) / np.sqrt(sxx * syy)
    return float(min(1.0, max(-1.0, r)))


def _stack(window: WindowPanel, assets: list[str]) -> tuple[np.ndarray, np.ndarray]:
    """Dense (days x assets) return matrix with a presence mask."""
    dates = np.unique(np.concatenate([window.returns[a].dates for a in assets]))
    values = np.zeros((len(dates), len(assets)))
    mask = np.zeros((len(dates), len(assets)), dtype=bool)
    for k, a in enumerate(assets):
        s = window.returns[a]
        rows = np.searchsorted(dates, s.dates)
        values[rows, k] = s.values
        mask[rows, k] = True
    return values, mask


def _pairwise_moments(values: np.ndarray, mask: np.ndarray):
    """Pairwise-complete counts, covariances and variances via matrix products."""
    m = mask.astype(float)
    counts = m.sum(axis=0)
    # center each column on its own mean first to limit cancellation
    means = np.divide(values.sum(axis=0), counts, out=np.zeros_like(counts), where=counts > 0)
    x = np.where(mask, values - means, 0.0)
    n = m.T @ m
    sx = x.T @ m  # sx[i, j]: sum of x_i over dates where j is present
    sxx = (x * x).T @ m
    sxy = x.T @ x
    with np.errstate(invalid="ignore", divide="ignore"):
        cov = sxy - sx * sx.T / n
        var_i = sxx - sx * sx / n  # variance of i on the overlap with j
    return n, cov, var_i


def correlation_matrix(window: WindowPanel, min_overlap: int = DEFAULT_MIN_OVERLAP) -> CorrelationMatrix:
    """Pairwise-complete Pearson correlation matrix of a window's returns.

    Constant assets and assets that do not reach ``min_overlap`` common
    observations with any other asset are dropped with a
    :class:`DroppedAssetWarning`.
    """
    assets = list(window.assets)
    if len(assets) < 3:
        raise ComputationError(f"window {window.window_id} has {len(assets)} assets, need at least 3")

    dropped = []
    for a in list(assets):
        if np.ptp(window.returns[a].values) == 0:
            assets.remove(a)
            dropped.append(a)
            warnings.warn(f"{window.window_id}: dropping {a}, constant return series", DroppedAssetWarning, stacklevel=2)
    if len(assets) < 3:
        raise ComputationError(f"window {window.window_id}: fewer than 3 non-constant assets")

    values, mask = _stack(window, assets)
    n, cov, var_i = _pairwise_moments(values, mask)
    ok = n >= min_overlap
    np.fill_diagonal(ok, False)
    lonely = ~ok.any(axis=1)
    if lonely.any():
        for k in np.flatnonzero(lonely):
            dropped.append(assets[k])
            warnings.warn(
                f"{window.window_id}: dropping {assets[k]}, no partner with {min_overlap} common observations",
                DroppedAssetWarning,
                stacklevel=2,
            )
        keep = np.flatnonzero(~lonely)
        assets = [assets[k] for k in keep]
        n, cov, var_i = n[np.ix_(keep, keep)], cov[np.ix_(keep, keep)], var_i[np.ix_(keep, keep)]
    if len(assets) < 3:
        raise ComputationError(f"window {window.window_id}: fewer than 3 surviving assets")

    off = ~np.eye(len(assets), dtype=bool)
    short = (n < min_overlap) & off
    if short.any():
        i, j = np.argwhere(short)[0]
        raise ComputationError(
            f"window {window.window_id}: pair ({assets[i]}, {assets[j]}) has only {int(n[i, j])} common observations"
        )
    # a variance that is tiny relative to the asset's full-window variance is rounding residue
    scale = np.maximum(np.max(np.abs(var_i), axis=1, keepdims=True), np.finfo(float).tiny)
    flat = (var_i <= 1e-13 * scale) & off
    if flat.any():
        i, j = np.argwhere(flat)[0]
        raise ComputationError(f"window {window.window_id}: {assets[i]} is constant on its overlap with {assets[j]}")

    with np.errstate(invalid="ignore"):
        rho = cov / np.sqrt(var_i * var_i.T)
    rho = np.clip(rho, -1.0, 1.0)
    rho = (rho + rho.T) / 2
    np.fill_diagonal(rho, 1.0)
    return CorrelationMatrix(tuple(assets), rho, tuple(sorted(dropped)))


def to_distance(rho: CorrelationMatrix) -> DistanceMatrix:
    """Map correlations onto distances ``sqrt(2 (1 - rho))``."""
    arg = 2.0 * (1.0 - rho.rho)
    if np.any(arg < -2e-12):
        raise ValueError("correlation exceeds 1 beyond rounding")
    d = np.sqrt(np.maximum(arg, 0.0))
    return DistanceMatrix(rho.assets, d)


class DisjointSet:
    """Union-find with path halving and union by size."""

    def __init__(self, n: int):
        self.parent = list(range(n))
        self.size = [1] * n

    def find(self, x: int) -> int:
        parent = self.parent
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    def union(self, a: int, b: int) -> bool:
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return False
        if self.size[ra] < self.size[rb]:
            ra, rb = rb, ra
        self.parent[rb] = ra
        self.size[ra] += self.size[rb]
        return True


def mst(dist: DistanceMatrix | np.ndarray) -> MstTree:
    """Kruskal minimum spanning tree of the complete distance graph.

    ``dist`` may also be a bare symmetric weight matrix, in which case nodes
    are labelled ``"0"``, ``"1"``, ... Equal weights are taken in
    lexicographic ``(i, j)`` order, so the tree is fully determined by the
    matrix.
    """
    if isinstance(dist, DistanceMatrix):
        assets, d = dist.assets, dist.d
    else:
        d = np.asarray(dist, dtype=float)
        if d.ndim != 2 or d.shape[0] != d.shape[1] or not np.array_equal(d, d.T):
            raise ValueError("weights must form a symmetric square matrix")
        assets = tuple(str(i) for i in range(len(d)))
    n = len(assets)
    if n < 2:
        raise ComputationError(f"a spanning tree needs at least 2 nodes, got {n}")
    iu, ju = np.triu_indices(n, k=1)
    w = d[iu, ju]
    order = np.lexsort((ju, iu, w))
    ds = DisjointSet(n)
    edges = []
    for k in order:
        i, j = int(iu[k]), int(ju[k])
        if ds.union(i, j):
            edges.append((i, j, float(w[k])))
            if len(edges) == n - 1:
                break
    if len(edges) != n - 1:
        raise ComputationError("distance graph is not connected")
    edges.sort(key=lambda e: (e[0], e[1]))
    return MstTree(assets, tuple(edges))


def write_correlation_csv(cm: CorrelationMatrix, out: TextIO) -> None:
    out.write(",".join(["asset", *cm.assets]) + "\n")
    for a, row in zip(cm.assets, cm.rho):
        out.write(",".join([a, *(f"{v:.10g}" for v in row)]) + "\n")


def write_mst_csv(tree: MstTree, out: TextIO) -> None:
    out.write("u,v,weight\n")
    for i, j, w in tree.edges:
        out.write(f"{tree.assets[i]},{tree.assets[j]},{w:.12g}\n")
