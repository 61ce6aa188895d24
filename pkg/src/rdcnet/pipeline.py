"""Batch driver: prices -> windows -> MSTs -> RDC -> rankings -> tests."""

from __future__ import annotations

import hashlib
import io
import json
import logging
import math
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from itertools import repeat
from pathlib import Path

import numpy as np

from rdcnet.analytics import (
    RankTable,
    TopBottomGrid,
    WindowStats,
    correlation_test,
    rank_table,
    top_bottom_grid,
    welch_test,
    window_stats,
    write_rank_csv,
)
from rdcnet.config import RunConfig
from rdcnet.errors import ComputationError, InputError, RdcError
from rdcnet.ingest import (
    PricePanel,
    PriceSeries,
    WindowPanel,
    WindowSpec,
    _format_month,
    build_windows,
    parse_index,
    parse_prices,
    window_index_returns,
)
from rdcnet.network import CorrelationMatrix, MstTree, correlation_matrix, mst, to_distance, write_correlation_csv, write_mst_csv
from rdcnet.rdc import RdcProfile, ZetaGrid, rdc_profile, write_rdc_csv

log = logging.getLogger("rdcnet")

TEST_ASSUMPTIONS = {
    "p_values": "two-sided",
    "correlation_test": "Pearson r; Student t with n - 2 degrees of freedom",
    "mean_difference_test": "Welch unequal-variance t-test; Welch-Satterthwaite degrees of freedom",
    "diff": "mean(column window) - mean(row window) of per-asset normalized rank std",
}


@dataclass
class WindowResult:
    window_id: str
    status: str  # "ok" or "skipped"
    reason: str = ""
    excluded: tuple[str, ...] = ()
    dropped: tuple[str, ...] = ()
    notes: list[str] = field(default_factory=list)
    stats: WindowStats | None = None
    correlation: CorrelationMatrix | None = None
    tree: MstTree | None = None
    profile: RdcProfile | None = None
    table: RankTable | None = None


@dataclass
class RunResult:
    config: RunConfig
    window_spec: WindowSpec
    windows: list[WindowResult]
    tests: dict
    artifacts: dict[str, str]  # file name -> sha256

    @property
    def ok_windows(self) -> list[WindowResult]:
        return [w for w in self.windows if w.status == "ok"]


def zeta_grid(config: RunConfig) -> ZetaGrid:
    return ZetaGrid.from_range(config.zeta_start, config.zeta_end, config.zeta_step)


def resolve_window_spec(config: RunConfig, panel: PricePanel) -> WindowSpec:
    """Explicit month range from the config, or every full window in the data."""
    first, last = config.first_month, config.last_month
    if first is None or last is None:
        cal = panel.trading_calendar
        m0 = int(cal[0].astype("datetime64[M]").astype(int)) + 1970 * 12
        m1 = int(cal[-1].astype("datetime64[M]").astype(int)) + 1970 * 12
        if first is None:
            first = _format_month(m0)
        if last is None:
            last = _format_month(m1 - config.window_length_months + 1)
    try:
        return WindowSpec(first, last, config.window_length_months, config.step_months)
    except ValueError as exc:
        raise InputError(f"invalid window range {first}..{last}: {exc}") from None


def process_window(window: WindowPanel, index: PriceSeries | None, config: RunConfig) -> WindowResult:
    """Full per-window computation; failures become a skipped result."""
    result = WindowResult(window.window_id, "skipped", excluded=window.excluded)
    if window.degenerate:
        result.reason = f"only {len(window.assets)} assets pass the coverage filter"
        return result
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        try:
            index_returns = None
            if index is not None:
                index_returns = window_index_returns(index, window.start, window.end)
            cm = correlation_matrix(window, config.min_overlap)
            tree = mst(to_distance(cm))
            profile = rdc_profile(tree, zeta_grid(config), weighted=config.weighted_adjacency)
            table = rank_table(profile)
            stats = window_stats(table, index_returns, window.window_id)
        except (RdcError, ValueError, np.linalg.LinAlgError) as exc:
            result.reason = str(exc)
            return result
        finally:
            result.notes = [str(w.message) for w in caught]
    result.status = "ok"
    result.dropped = cm.dropped
    result.stats, result.correlation, result.tree, result.profile, result.table = stats, cm, tree, profile, table
    return result


def _num(x: float, digits: int = 12):
    if x is None or (isinstance(x, float) and math.isnan(x)):
        return None
    if isinstance(x, (int, np.integer)):
        return int(x)
    return float(f"{x:.{digits}g}")


def _corr_json(xs, ys):
    try:
        res = correlation_test(xs, ys)
    except (RdcError, ValueError) as exc:
        return {"error": str(exc)}
    return {"r": _num(res.r), "p_value": _num(res.p_value), "n": res.n}


def _grid_json(grid: TopBottomGrid):
    return {
        "k": grid.k,
        "rows_top": list(grid.rows),
        "columns_bottom": list(grid.columns),
        "cells": [
            [
                {
                    "row": r,
                    "column": c,
                    "diff": _num(cell.diff),
                    "t_stat": _num(cell.t_stat),
                    "dof": _num(cell.dof),
                    "p_value": _num(cell.p_value),
                    "significant_1pct": cell.significant_1pct,
                    "significant_5pct": cell.significant_5pct,
                }
                for c, cell in zip(grid.columns, row)
            ]
            for r, row in zip(grid.rows, grid.cells)
        ],
    }


def compute_tests(results: list[WindowResult], k: int) -> dict:
    """Cross-window correlation tests and the top/bottom Welch grid."""
    ok = [w for w in results if w.status == "ok" and not math.isnan(w.stats.index_avg_daily_return)]
    out: dict = {"assumptions": TEST_ASSUMPTIONS, "n_windows": len(ok)}
    if not ok:
        out["correlation"] = None
        out["top_bottom"] = None
        out["extreme_windows"] = None
        out["note"] = "no processed window has index data"
        return out
    ret = [w.stats.index_avg_daily_return for w in ok]
    out["correlation"] = {
        "avg_rank_std": _corr_json([w.stats.avg_rank_std for w in ok], ret),
        "avg_rank_std_normalized": _corr_json([w.stats.avg_rank_std_normalized for w in ok], ret),
    }
    stds = {w.window_id: w.table.per_asset_rank_std_normalized for w in ok}
    stats = [w.stats for w in ok]
    try:
        out["top_bottom"] = _grid_json(top_bottom_grid(stats, stds, k))
    except (RdcError, ValueError) as exc:
        out["top_bottom"] = {"error": str(exc)}
    best = max(stats, key=lambda s: (s.index_avg_daily_return, s.window_id))
    worst = min(stats, key=lambda s: (s.index_avg_daily_return, s.window_id))
    extreme = {
        "highest_return_window": best.window_id,
        "lowest_return_window": worst.window_id,
        "mean_normalized_std_highest": _num(best.avg_rank_std_normalized),
        "mean_normalized_std_lowest": _num(worst.avg_rank_std_normalized),
    }
    if best.window_id != worst.window_id:
        try:
            res = welch_test(stds[best.window_id], stds[worst.window_id])
            extreme.update(diff=_num(res.diff), t_stat=_num(res.t_stat), dof=_num(res.dof), p_value=_num(res.p_value))
        except (RdcError, ValueError) as exc:
            extreme["error"] = str(exc)
    out["extreme_windows"] = extreme
    return out


def _sha256_file(path: str | Path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def _window_stats_csv(results: list[WindowResult]) -> str:
    buf = io.StringIO()
    buf.write("window,n_assets,avg_rank_std,avg_rank_std_norm,index_avg_return\n")
    for w in results:
        if w.status != "ok":
            continue
        s = w.stats
        ret = "" if math.isnan(s.index_avg_daily_return) else f"{s.index_avg_daily_return:.12g}"
        buf.write(f"{s.window_id},{s.n_assets},{s.avg_rank_std:.12g},{s.avg_rank_std_normalized:.12g},{ret}\n")
    return buf.getvalue()


def _render(writer, obj) -> str:
    buf = io.StringIO()
    writer(obj, buf)
    return buf.getvalue()


def load_inputs(config: RunConfig) -> tuple[PricePanel, PriceSeries | None]:
    try:
        panel = parse_prices(config.prices_path)
    except OSError as exc:
        raise InputError(f"cannot read prices {config.prices_path}: {exc}") from None
    index = None
    if config.index_path:
        try:
            index = parse_index(config.index_path)
        except OSError as exc:
            raise InputError(f"cannot read index {config.index_path}: {exc}") from None
    return panel, index


def run(config: RunConfig) -> RunResult:
    """Execute the pipeline and write all artifacts into ``config.output_dir``.

    Inputs are parsed and every window is computed before anything is
    written, so input errors leave no partial output.
    """
    panel, index = load_inputs(config)
    spec, results, tests = analyze(panel, index, config)
    return write_artifacts(config, spec, results, tests)


def analyze(panel: PricePanel, index: PriceSeries | None, config: RunConfig):
    """In-memory computation of every window and the cross-window tests."""
    spec = resolve_window_spec(config, panel)
    windows = build_windows(panel, spec, config.coverage_threshold)
    if not windows:
        raise InputError(f"window range {spec.first_month}..{spec.last_month} does not overlap the price data")
    log.info("%d assets, %d windows (%s .. %s)", len(panel), len(windows), spec.first_month, spec.last_month)

    if config.workers > 1:
        with ProcessPoolExecutor(max_workers=config.workers) as pool:
            results = list(pool.map(process_window, windows, repeat(index), repeat(config), chunksize=4))
    else:
        results = [process_window(w, index, config) for w in windows]
    for r in results:
        if r.status == "skipped":
            log.warning("window %s skipped: %s", r.window_id, r.reason)
        for note in r.notes:
            log.info("window %s: %s", r.window_id, note)
    if not any(r.status == "ok" for r in results):
        raise ComputationError("every window was skipped")

    return spec, results, compute_tests(results, config.top_bottom_k)


def write_artifacts(config: RunConfig, spec: WindowSpec, results: list[WindowResult], tests: dict) -> RunResult:
    files: dict[str, str] = {}
    for r in results:
        if r.status != "ok":
            continue
        files[f"rdc_{r.window_id}.csv"] = _render(write_rdc_csv, r.profile)
        files[f"rank_table_{r.window_id}.csv"] = _render(write_rank_csv, r.table)
        files[f"mst_{r.window_id}.csv"] = _render(write_mst_csv, r.tree)
        if config.write_correlation:
            files[f"correlation_{r.window_id}.csv"] = _render(write_correlation_csv, r.correlation)
    files["window_stats.csv"] = _window_stats_csv(results)
    files["tests.json"] = json.dumps(tests, indent=2, sort_keys=True) + "\n"

    out_dir = Path(config.output_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    artifacts = {}
    for name in sorted(files):
        data = files[name].encode("utf-8")
        (out_dir / name).write_bytes(data)
        artifacts[name] = hashlib.sha256(data).hexdigest()

    inputs = {"prices": {"path": str(config.prices_path), "sha256": _sha256_file(config.prices_path)}}
    if config.index_path:
        inputs["index"] = {"path": str(config.index_path), "sha256": _sha256_file(config.index_path)}
    manifest = {
        "config": config.echo(),
        "window_spec": {
            "first_month": spec.first_month,
            "last_month": spec.last_month,
            "window_length_months": spec.window_length_months,
            "step_months": spec.step_months,
        },
        "inputs": inputs,
        "windows": [
            {
                "window": r.window_id,
                "status": r.status,
                **({"reason": r.reason} if r.reason else {}),
                "n_assets": r.stats.n_assets if r.stats else None,
                "excluded_by_coverage": list(r.excluded),
                "dropped_from_correlation": list(r.dropped),
            }
            for r in results
        ],
        "artifacts": artifacts,
    }
    (out_dir / "manifest.json").write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return RunResult(config, spec, results, tests, artifacts)
