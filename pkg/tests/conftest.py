import numpy as np
import pytest


def write_price_csv(path, dates, closes_by_asset):
    lines = ["date,asset,close"]
    for k, d in enumerate(dates):
        for asset, closes in closes_by_asset.items():
            if not np.isnan(closes[k]):
                lines.append(f"{d},{asset},{closes[k]:.10g}")
    path.write_text("\n".join(lines) + "\n")


def write_index_csv(path, dates, closes):
    path.write_text("\n".join(["date,close", *(f"{d},{c:.10g}" for d, c in zip(dates, closes))]) + "\n")


def business_days(start, end):
    d = np.arange(np.datetime64(start), np.datetime64(end) + 1, dtype="datetime64[D]")
    return d[np.is_busday(d)].astype(str)


@pytest.fixture
def star_market(tmp_path):
    """Six assets whose correlation MST is a star on HUB, plus an index, Jan-Jun 2008."""
    rng = np.random.default_rng(42)
    dates = business_days("2008-01-01", "2008-06-30")
    f = 0.01 * rng.standard_normal(len(dates))
    closes = {"HUB": 100 * np.exp(np.cumsum(f))}
    for k in range(1, 6):
        closes[f"L{k}"] = 50 * np.exp(np.cumsum(f + 0.015 * rng.standard_normal(len(dates))))
    prices, index = tmp_path / "prices.csv", tmp_path / "index.csv"
    write_price_csv(prices, dates, closes)
    write_index_csv(index, dates, 1000 * np.exp(np.cumsum(f)))
    return prices, index


def pytest_terminal_summary(terminalreporter):
    mod = __import__("sys").modules.get("test_acceptance")
    if mod is not None and mod.RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in mod.RESULTS:
            terminalreporter.write_line(line)
