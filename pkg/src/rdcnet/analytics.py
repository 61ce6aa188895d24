"""Rankings over the risk grid, rank volatility and the index-return tests."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np
from scipy import stats

from rdcnet.errors import ComputationError, InputError
from rdcnet.ingest import ReturnSeries
from rdcnet.network import pearson
from rdcnet.rdc import RdcProfile, ZetaGrid

# Values closer than this fraction of ||exp(zeta A)||_2 count as tied; it sits
# far above eigensolver noise and far below genuine centrality gaps.
DEFAULT_TIE_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class RankTable:
    assets: tuple[str, ...]
    zeta_grid: ZetaGrid
    ranks: np.ndarray  # n x len(grid), rank 1 = most central
    per_asset_rank_std: np.ndarray
    per_asset_rank_std_normalized: np.ndarray

    @property
    def n_assets(self) -> int:
        return len(self.assets)

    def ordering(self, k: int) -> list[str]:
        """Assets sorted from most to least central at grid column ``k``."""
        return [self.assets[i] for i in np.argsort(self.ranks[:, k], kind="stable")]


@dataclass(frozen=True)
class WindowStats:
    window_id: str
    n_assets: int
    avg_rank_std: float
    avg_rank_std_normalized: float
    index_avg_daily_return: float


@dataclass(frozen=True)
class CorrelationTestResult:
    r: float
    p_value: float
    n: int


@dataclass(frozen=True)
class MeanDiffResult:
    diff: float  # mean(b) - mean(a)
    t_stat: float
    dof: float
    p_value: float

    @property
    def significant_1pct(self) -> bool:
        return self.p_value < 0.01

    @property
    def significant_5pct(self) -> bool:
        return self.p_value < 0.05


@dataclass(frozen=True)
class TopBottomGrid:
    """Welch tests between the top-k and bottom-k windows by index return.

    ``cells[r][c]`` compares row window ``rows[r]`` (sample ``a``) against
    column window ``columns[c]`` (sample ``b``).
    """

    rows: tuple[str, ...]
    columns: tuple[str, ...]
    cells: tuple[tuple[MeanDiffResult, ...], ...]

    @property
    def k(self) -> int:
        return len(self.rows)

    def diffs(self) -> np.ndarray:
        return np.array([[c.diff for c in row] for row in self.cells])

    def p_values(self) -> np.ndarray:
        return np.array([[c.p_value for c in row] for row in self.cells])


def rank_assets(values: Sequence[float], asset_order: Sequence[str], atol: float = 0.0) -> np.ndarray:
    """Integer ranks, 1 for the largest value.

    Values within ``atol`` of their sorted neighbour form a tie group, which
    is ordered by asset id. With ``atol=0`` only exact ties are grouped.
    """
    v = np.asarray(values, dtype=float)
    if v.shape != (len(asset_order),):
        raise ValueError("values and asset_order differ in length")
    if not np.all(np.isfinite(v)):
        raise ValueError("rank_assets needs finite values")
    order = np.argsort(-v, kind="stable")
    ranks = np.empty(len(v), dtype=int)
    pos = 0
    start = 0
    for end in range(1, len(order) + 1):
        if end < len(order) and v[order[end - 1]] - v[order[end]] <= atol:
            continue
        group = sorted(order[start:end], key=lambda i: asset_order[i])
        for i in group:
            pos += 1
            ranks[i] = pos
        start = end
    return ranks


def rank_table(profile: RdcProfile, tie_tol: float = DEFAULT_TIE_TOL) -> RankTable:
    """Rank every asset at each grid point and summarise its rank spread.

    The spread is the population standard deviation of an asset's ranks over
    the grid; the normalized spread divides it by the number of assets.
    """
    n, g = profile.rdc.shape
    ranks = np.empty((n, g), dtype=int)
    for k, z in enumerate(profile.zeta_grid):
        atol = tie_tol * math.exp(z * profile.spectral_radius)
        ranks[:, k] = rank_assets(profile.rdc[:, k], profile.assets, atol=atol)
    std = ranks.std(axis=1, ddof=0)
    return RankTable(profile.assets, profile.zeta_grid, ranks, std, std / n)


def window_stats(table: RankTable, index_returns: ReturnSeries | None, window_id: str = "") -> WindowStats:
    """Window-level averages of rank spread plus the mean index log return.

    ``index_returns=None`` means no index was supplied; the return is NaN.
    """
    if index_returns is None:
        index_avg = math.nan
    elif len(index_returns) == 0:
        raise InputError(f"no index returns inside window {window_id or '?'}")
    else:
        index_avg = float(np.mean(index_returns.values))
    avg = float(np.mean(table.per_asset_rank_std))
    return WindowStats(window_id, table.n_assets, avg, avg / table.n_assets, index_avg)


def _two_sided_p(t: float, dof: float) -> float:
    if math.isinf(t):
        return 0.0
    return float(min(1.0, 2.0 * stats.t.sf(abs(t), dof)))


def correlation_test(x: Sequence[float], y: Sequence[float]) -> CorrelationTestResult:
    """Pearson r with a two-sided p-value from Student's t with n - 2 dof."""
    xs, ys = np.asarray(x, dtype=float), np.asarray(y, dtype=float)
    if xs.shape != ys.shape or xs.ndim != 1:
        raise ValueError("x and y must be 1-d and of equal length")
    n = len(xs)
    if n < 3:
        raise ComputationError(f"correlation test needs at least 3 pairs, got {n}")
    r = pearson(xs, ys, min_overlap=3)
    if abs(r) == 1.0:
        return CorrelationTestResult(r, 0.0, n)
    t = r * math.sqrt((n - 2) / (1.0 - r * r))
    return CorrelationTestResult(r, _two_sided_p(t, n - 2), n)


def welch_test(a: Sequence[float], b: Sequence[float]) -> MeanDiffResult:
    """Welch unequal-variance t-test of ``mean(b) - mean(a)``."""
    a, b = np.asarray(a, dtype=float), np.asarray(b, dtype=float)
    if len(a) < 2 or len(b) < 2:
        raise ComputationError("each sample needs at least 2 observations")
    va, vb = a.var(ddof=1), b.var(ddof=1)
    if va <= 0 or vb <= 0:
        raise ComputationError("each sample needs positive variance")
    sa, sb = va / len(a), vb / len(b)
    diff = float(b.mean() - a.mean())
    t = diff / math.sqrt(sa + sb)
    dof = (sa + sb) ** 2 / (sa**2 / (len(a) - 1) + sb**2 / (len(b) - 1))
    return MeanDiffResult(diff, float(t), float(dof), _two_sided_p(t, dof))


def top_bottom_grid(
    window_stats_list: Sequence[WindowStats],
    normalized_stds: Mapping[str, Sequence[float]],
    k: int = 5,
) -> TopBottomGrid:
    """Welch-test grid of the ``k`` best against the ``k`` worst index windows.

    Rows hold the top windows (highest average index return first), columns
    the bottom windows (lowest first). ``normalized_stds`` maps window id to
    that window's per-asset normalized rank spreads.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    usable = [s for s in window_stats_list if not math.isnan(s.index_avg_daily_return)]
    if len(usable) < 2 * k:
        raise ComputationError(f"top/bottom grid with k={k} needs {2 * k} windows with index data, got {len(usable)}")
    top = sorted(usable, key=lambda s: (-s.index_avg_daily_return, s.window_id))[:k]
    bottom = sorted(usable, key=lambda s: (s.index_avg_daily_return, s.window_id))[:k]
    cells = tuple(
        tuple(welch_test(normalized_stds[t.window_id], normalized_stds[b.window_id]) for b in bottom) for t in top
    )
    return TopBottomGrid(tuple(s.window_id for s in top), tuple(s.window_id for s in bottom), cells)


def write_rank_csv(table: RankTable, out) -> None:
    out.write("asset,zeta,rank\n")
    for i, asset in enumerate(table.assets):
        for k, z in enumerate(table.zeta_grid):
            out.write(f"{asset},{z:.2f},{table.ranks[i, k]}\n")
