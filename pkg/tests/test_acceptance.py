"""Exit criteria of the build, one test per criterion.

Each test records a PASS/FAIL line; the lines are printed in pytest's
terminal summary and when this file is run directly:

    python tests/test_acceptance.py
"""

import math
import sys
import time
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from oracles import brute_force_mst_weight, pearson_t, random_tree_adjacency, t_two_sided_p, taylor_expm, welch_t
from rdcnet.analytics import DEFAULT_TIE_TOL, correlation_test, rank_assets, rank_table, welch_test
from rdcnet.config import RunConfig
from rdcnet.ingest import WindowSpec, build_windows
from rdcnet.network import CorrelationMatrix, DistanceMatrix, MstTree, mst, to_distance
from rdcnet.pipeline import run
from rdcnet.rdc import ZetaGrid, expm_scaled, rdc_profile, spectral_decompose
from rdcnet.synthetic import SyntheticSpec, generate, simulate, to_panel

RESULTS: list[str] = []


def record(criterion, ok, detail):
    RESULTS.append(f"{'PASS' if ok else 'FAIL'}  {criterion}: {detail}")
    assert ok, f"{criterion}: {detail}"


def tree(a):
    n = len(a)
    return MstTree(tuple(f"N{i:03d}" for i in range(n)), tuple((i, j, 1.0) for i in range(n) for j in range(i + 1, n) if a[i, j]))


def test_expm_matches_taylor_oracle():
    rng = np.random.default_rng(20080101)
    zetas = ZetaGrid.default().values
    t0 = time.perf_counter()
    worst = 0.0
    for _ in range(200):
        a = random_tree_adjacency(int(rng.integers(2, 13)), rng)
        sd = spectral_decompose(a)
        for z in zetas:
            worst = max(worst, float(np.max(np.abs(expm_scaled(sd, z) - taylor_expm(a, z, terms=40)))))
    elapsed = time.perf_counter() - t0
    record("expm oracle", worst < 1e-10 and elapsed < 10, f"200 trees x 100 zeta, max err {worst:.2e} (< 1e-10), {elapsed:.2f} s (< 10 s)")


def test_mst_matches_exhaustive_minimum():
    rng = np.random.default_rng(7)
    t0 = time.perf_counter()
    worst = 0.0
    for g in range(100):
        n = 7 if g < 40 else int(rng.integers(2, 8))
        w = rng.random((n, n)) * 2
        w = np.triu(w, 1)
        d = w + w.T
        got = mst(DistanceMatrix(tuple(f"V{i}" for i in range(n)), d)).total_weight
        worst = max(worst, abs(got - brute_force_mst_weight(d)))
    elapsed = time.perf_counter() - t0
    record("MST oracle", worst < 1e-12 and elapsed < 30, f"100 graphs n <= 7, max |diff| {worst:.1e}, {elapsed:.2f} s (< 30 s)")


def test_distance_endpoints():
    cm = CorrelationMatrix(("A", "B", "C"), np.array([[1.0, 1.0, -1.0], [1.0, 1.0, -1.0], [-1.0, -1.0, 1.0]]))
    d = to_distance(cm).d
    ok = abs(d[0, 1]) <= 1e-12 and abs(d[0, 2] - 2.0) <= 1e-12 and np.all(np.diag(d) == 0)
    record("distance endpoints", ok, f"rho=1 -> {d[0, 1]:.1e}, rho=-1 -> {d[0, 2]:.15f}")


def test_window_count():
    spec = WindowSpec("2008-01", "2020-01")
    panel, _ = to_panel(simulate(SyntheticSpec(n_assets=4, n_windows=145, rng_seed=1)))
    windows = build_windows(panel, spec)
    ok = len(spec.labels()) == 145 and len(windows) == 145 and windows[-1].end.isoformat() == "2020-06-30"
    record("window count", ok, f"{len(windows)} windows, first {windows[0].window_id}, last {windows[-1].window_id}")


def test_zeta_grid():
    g = ZetaGrid.default()
    cfg = RunConfig()
    g2 = ZetaGrid.from_range(cfg.zeta_start, cfg.zeta_end, cfg.zeta_step)
    ok = len(g) == 100 and g.values[0] == 0.01 and g.values[-1] == 1.0 and g2 == g
    record("zeta grid", ok, f"{len(g)} values, {g.values[0]} .. {g.values[-1]}")


def test_ranking_ignores_identity_term():
    rng = np.random.default_rng(33)
    grid = ZetaGrid.default()
    mismatches = 0
    for _ in range(100):
        n = int(rng.integers(2, 61))
        a = random_tree_adjacency(n, rng)
        t = tree(a)
        table = rank_table(rdc_profile(t, grid))
        sd = spectral_decompose(a)
        radius = float(np.max(np.abs(sd.eigenvalues)))
        for k, z in enumerate(grid):
            shifted = expm_scaled(sd, z, include_identity=False).sum(axis=1)
            ranks = rank_assets(shifted, t.assets, atol=DEFAULT_TIE_TOL * math.exp(z * radius))
            mismatches += int(not np.array_equal(ranks, table.ranks[:, k]))
    record("rank invariance", mismatches == 0, f"100 trees x 100 zeta, {mismatches} columns differ")


def _stat_fixtures():
    rng = np.random.default_rng(1808)
    for k in range(25):
        n = 3 + k
        x = rng.standard_normal(n)
        y = 0.05 * k * x + rng.standard_normal(n)
        yield "corr", x, y
    for k in range(25):
        na, nb = 2 + k % 9, 2 + (3 * k) % 13
        a = rng.normal(0, 1 + k % 3, na)
        b = rng.normal(0.1 * k, 1 + k % 4, nb)
        yield "welch", a, b


def test_statistical_tests_match_quadrature():
    worst = 0.0
    count = 0
    for kind, u, v in _stat_fixtures():
        if kind == "corr":
            _, t, dof = pearson_t(u, v)
            got = correlation_test(u, v).p_value
        else:
            _, t, dof = welch_t(u, v)
            got = welch_test(u, v).p_value
        worst = max(worst, abs(got - t_two_sided_p(t, dof)))
        count += 1
    record("test p-values", count == 50 and worst < 1e-6, f"{count} fixtures, max |p - quadrature| {worst:.1e} (< 1e-6)")


TWO_REGIME = SyntheticSpec(n_assets=250, n_windows=24, crisis_windows=tuple(range(8, 16)), beta_calm=0.35, beta_crisis=0.85, rng_seed=0)


def test_two_regime_direction(tmp_path):
    generate(TWO_REGIME, tmp_path / "p.csv", tmp_path / "i.csv")
    res = run(RunConfig(prices_path=str(tmp_path / "p.csv"), index_path=str(tmp_path / "i.csv"), output_dir=str(tmp_path / "o"), top_bottom_k=3))
    corr = res.tests["correlation"]["avg_rank_std_normalized"]
    diffs = [c["diff"] for row in res.tests["top_bottom"]["cells"] for c in row]
    ok = len(res.ok_windows) == 24 and corr["r"] < 0 and len(diffs) == 9 and min(diffs) > 0
    record("two-regime direction", ok, f"r = {corr['r']:+.4f} (p = {corr['p_value']:.1e}), k=3 grid min diff {min(diffs):+.4f} (all > 0)")


def test_single_window_performance():
    rng = np.random.default_rng(250)
    n = 250
    returns = 0.6 * rng.standard_normal((125, 1)) + 0.8 * rng.standard_normal((125, n))
    rho = np.clip(np.corrcoef(returns.T), -1, 1)
    rho = (rho + rho.T) / 2
    np.fill_diagonal(rho, 1.0)
    t = mst(to_distance(CorrelationMatrix(tuple(f"S{i:03d}" for i in range(n)), rho)))
    t0 = time.perf_counter()
    table = rank_table(rdc_profile(t, ZetaGrid.default()))
    elapsed = time.perf_counter() - t0
    record("single-window speed", elapsed < 2 and table.ranks.shape == (250, 100), f"250 assets x 100 zeta in {elapsed:.3f} s (< 2 s)")


@pytest.fixture(scope="module")
def full_run(tmp_path_factory):
    root = tmp_path_factory.mktemp("full")
    spec = SyntheticSpec(n_assets=250, n_windows=145, crisis_windows=tuple(range(0, 9)) + tuple(range(80, 100)), missing_rate=0.02, rng_seed=2008)
    t0 = time.perf_counter()
    generate(spec, root / "p.csv", root / "i.csv")
    base = dict(prices_path=str(root / "p.csv"), index_path=str(root / "i.csv"))
    first = run(RunConfig(output_dir=str(root / "a"), **base))
    elapsed = time.perf_counter() - t0
    return root, base, first, elapsed


@pytest.mark.slow
def test_full_run_performance(full_run):
    root, _, first, elapsed = full_run
    rows = (root / "a" / "window_stats.csv").read_text().splitlines()
    ok = elapsed < 300 and len(rows) - 1 == 145 and len(first.ok_windows) == 145
    record("full-run speed", ok, f"145 windows x 250 assets generated and processed in {elapsed:.1f} s (< 300 s), {len(rows) - 1} rows in window_stats.csv")


@pytest.mark.slow
def test_determinism(full_run):
    root, base, first, _ = full_run
    second = run(RunConfig(output_dir=str(root / "b"), workers=2, **base))
    names_a = sorted(p.name for p in (root / "a").iterdir())
    names_b = sorted(p.name for p in (root / "b").iterdir())
    differing = [n for n in names_a if (root / "a" / n).read_bytes() != (root / "b" / n).read_bytes()] if names_a == names_b else ["<file sets differ>"]
    ok = names_a == names_b and not differing and first.artifacts == second.artifacts
    record("determinism", ok, f"{len(names_a)} files compared across a serial and a 2-worker run, {len(differing)} differ")


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-q"]))
