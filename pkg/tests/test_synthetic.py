import hashlib

import numpy as np
import pytest

from rdcnet.ingest import build_windows, parse_index, parse_prices
from rdcnet.synthetic import SyntheticSpec, generate, parse_window_set, simulate, to_panel


def avg_offdiag_corr(returns):
    c = np.corrcoef(returns.T)
    return c[~np.eye(len(c), dtype=bool)].mean(), c


def log_returns_matrix(market, days=None):
    r = np.diff(np.log(market.closes), axis=0)
    return r if days is None else r[days[1:]]


def test_zero_loading_uncorrelated():
    m = simulate(SyntheticSpec(n_assets=6, n_windows=60, beta_calm=0.0, rng_seed=3))
    _, c = avg_offdiag_corr(log_returns_matrix(m))
    # ~1300 daily returns: sampling sd of rho is about 0.028
    assert np.all(np.abs(c[~np.eye(6, dtype=bool)]) < 0.1)


def test_correlation_tracks_squared_loading():
    spec = SyntheticSpec(n_assets=20, n_windows=12, crisis_windows=(6,), beta_calm=0.3, beta_crisis=0.9, rng_seed=4)
    m = simulate(spec)
    months = m.dates.astype("datetime64[M]").astype(int) - (2008 - 1970) * 12
    crisis = spec.month_is_crisis()[months]
    hi, _ = avg_offdiag_corr(log_returns_matrix(m, crisis))
    lo, _ = avg_offdiag_corr(log_returns_matrix(m, ~crisis))
    assert hi > 0.9 * 0.9**2
    assert abs(lo - 0.3**2) < 0.05
    assert hi > lo


def test_crisis_windows_lie_inside_crisis_regime():
    spec = SyntheticSpec(n_windows=24, crisis_windows=parse_window_set("8-15"))
    flags = spec.month_is_crisis()
    assert len(flags) == 29
    for w in range(24):
        covered = flags[w : w + 6]
        if w in spec.crisis_windows:
            assert covered.all()
    assert not flags[:8].any() and not flags[21:].any()
    assert spec.window_betas()[8] == 0.85 and spec.window_betas()[0] == 0.35


def test_window_set_parser():
    assert parse_window_set("3, 8-10,1") == (1, 3, 8, 9, 10)
    assert parse_window_set("") == ()


def test_seed_reproduces_bytes(tmp_path):
    spec = SyntheticSpec(n_assets=12, n_windows=3, missing_rate=0.05, rng_seed=11)
    digests = []
    for run in ("a", "b"):
        p, i = tmp_path / f"p{run}.csv", tmp_path / f"i{run}.csv"
        generate(spec, p, i)
        digests.append((hashlib.sha256(p.read_bytes()).hexdigest(), hashlib.sha256(i.read_bytes()).hexdigest()))
    assert digests[0] == digests[1]
    other = tmp_path / "po.csv"
    generate(SyntheticSpec(n_assets=12, n_windows=3, missing_rate=0.05, rng_seed=12), other, tmp_path / "io.csv")
    assert hashlib.sha256(other.read_bytes()).hexdigest() != digests[0][0]


def test_csv_roundtrip_matches_in_memory_panel(tmp_path):
    spec = SyntheticSpec(n_assets=7, n_windows=2, missing_rate=0.1, rng_seed=2)
    market = generate(spec, tmp_path / "p.csv", tmp_path / "i.csv")
    disk = parse_prices(tmp_path / "p.csv")
    mem, index = to_panel(market)
    assert disk.assets == mem.assets
    for a in disk.assets:
        np.testing.assert_array_equal(disk.series[a].dates, mem.series[a].dates)
        np.testing.assert_array_equal(disk.series[a].closes, mem.series[a].closes)
    np.testing.assert_array_equal(parse_index(tmp_path / "i.csv").closes, index.closes)


def test_generated_panel_gives_requested_windows():
    spec = SyntheticSpec(n_assets=5, n_windows=145)
    panel, _ = to_panel(simulate(spec))
    assert len(build_windows(panel, spec.window_spec())) == 145
    assert spec.window_spec().last_month == "2020-01"


@pytest.mark.parametrize(
    "kwargs",
    [
        dict(beta_calm=1.0),
        dict(beta_crisis=-0.1),
        dict(n_assets=2),
        dict(volatility=0),
        dict(crisis_windows=(200,)),
        dict(missing_rate=1.0),
        dict(start_month="2008-1"),
    ],
)
def test_invalid_specs(kwargs):
    with pytest.raises(ValueError):
        SyntheticSpec(**kwargs)
