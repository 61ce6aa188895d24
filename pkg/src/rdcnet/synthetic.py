"""Seeded one-factor market used in place of a proprietary price panel.

Daily log returns follow ``r_i = beta * f + sqrt(1 - beta^2) * sigma * eps_i``
with factor ``f = mu + sigma * z``, so the pairwise correlation is ``beta^2``.
The index is the factor itself. A month is in the crisis regime (high
loading, negative drift) when any crisis window covers it, so every window
listed as a crisis window lies entirely inside the crisis regime.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from datetime import date
from pathlib import Path

import numpy as np

from rdcnet.ingest import PricePanel, PriceSeries, WindowSpec, _format_month, _parse_month


def parse_window_set(text: str) -> tuple[int, ...]:
    """``"3,8-11"`` -> ``(3, 8, 9, 10, 11)``."""
    out: set[int] = set()
    for part in filter(None, (p.strip() for p in text.split(","))):
        if "-" in part:
            lo, hi = part.split("-", 1)
            out.update(range(int(lo), int(hi) + 1))
        else:
            out.add(int(part))
    return tuple(sorted(out))


@dataclass(frozen=True)
class SyntheticSpec:
    n_assets: int = 250
    n_windows: int = 145
    start_month: str = "2008-01"
    window_length_months: int = 6
    step_months: int = 1
    crisis_windows: tuple[int, ...] = field(default=())
    beta_calm: float = 0.35
    beta_crisis: float = 0.85
    drift_calm: float = 0.001
    drift_crisis: float = -0.004
    volatility: float = 0.02
    missing_rate: float = 0.0
    rng_seed: int = 0

    def __post_init__(self):
        if self.n_assets < 3:
            raise ValueError("n_assets must be >= 3")
        if self.n_windows < 1:
            raise ValueError("n_windows must be >= 1")
        for name in ("beta_calm", "beta_crisis"):
            b = getattr(self, name)
            if not 0 <= b < 1:
                raise ValueError(f"{name} must lie in [0, 1), got {b}")
        if self.volatility <= 0:
            raise ValueError("volatility must be positive")
        if not 0 <= self.missing_rate < 1:
            raise ValueError("missing_rate must lie in [0, 1)")
        if any(not 0 <= w < self.n_windows for w in self.crisis_windows):
            raise ValueError("crisis window index out of range")
        _parse_month(self.start_month)

    def window_spec(self) -> WindowSpec:
        first = _parse_month(self.start_month)
        last = first + (self.n_windows - 1) * self.step_months
        return WindowSpec(self.start_month, _format_month(last), self.window_length_months, self.step_months)

    def window_betas(self) -> list[float]:
        crisis = set(self.crisis_windows)
        return [self.beta_crisis if w in crisis else self.beta_calm for w in range(self.n_windows)]

    def n_months(self) -> int:
        return (self.n_windows - 1) * self.step_months + self.window_length_months

    def month_is_crisis(self) -> np.ndarray:
        flags = np.zeros(self.n_months(), dtype=bool)
        for w in self.crisis_windows:
            start = w * self.step_months
            flags[start : start + self.window_length_months] = True
        return flags


@dataclass(frozen=True, eq=False)
class SyntheticMarket:
    dates: np.ndarray  # datetime64[D] business days
    assets: tuple[str, ...]
    closes: np.ndarray  # days x assets, NaN where unobserved
    index_closes: np.ndarray


def business_days(first_month: str, n_months: int) -> np.ndarray:
    start = _parse_month(first_month)
    end = start + n_months
    lo = np.datetime64(date(start // 12, start % 12 + 1, 1), "D")
    hi = np.datetime64(date(end // 12, end % 12 + 1, 1), "D")
    days = np.arange(lo, hi, dtype="datetime64[D]")
    return days[np.is_busday(days)]


def simulate(spec: SyntheticSpec) -> SyntheticMarket:
    rng = np.random.default_rng(spec.rng_seed)
    dates = business_days(spec.start_month, spec.n_months())
    first = _parse_month(spec.start_month)
    months = dates.astype("datetime64[M]").astype(int) + 1970 * 12 - first
    crisis = spec.month_is_crisis()[months]
    beta = np.where(crisis, spec.beta_crisis, spec.beta_calm)
    mu = np.where(crisis, spec.drift_crisis, spec.drift_calm)

    t, n = len(dates), spec.n_assets
    sigma = spec.volatility
    factor = mu + sigma * rng.standard_normal(t)
    idio = sigma * rng.standard_normal((t, n))
    returns = beta[:, None] * factor[:, None] + np.sqrt(1.0 - beta**2)[:, None] * idio

    closes = 100.0 * np.exp(np.cumsum(returns, axis=0))
    if spec.missing_rate > 0:
        closes[rng.random((t, n)) < spec.missing_rate] = np.nan
    index_closes = 1000.0 * np.exp(np.cumsum(factor))
    width = max(3, len(str(n)))
    assets = tuple(f"S{i:0{width}d}" for i in range(1, n + 1))
    return SyntheticMarket(dates, assets, closes, index_closes)


def write_prices_csv(market: SyntheticMarket, path: str | Path) -> None:
    lines = ["date,asset,close"]
    for d, row in zip(market.dates.astype(str), market.closes):
        lines.extend(f"{d},{a},{c:.10g}" for a, c in zip(market.assets, row) if c == c)
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def write_index_csv(market: SyntheticMarket, path: str | Path) -> None:
    lines = ["date,close"]
    lines.extend(f"{d},{c:.10g}" for d, c in zip(market.dates.astype(str), market.index_closes))
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def generate(spec: SyntheticSpec, prices_path: str | Path, index_path: str | Path) -> SyntheticMarket:
    market = simulate(spec)
    write_prices_csv(market, prices_path)
    write_index_csv(market, index_path)
    return market


def to_panel(market: SyntheticMarket) -> tuple[PricePanel, PriceSeries]:
    """In-memory equivalent of writing and re-reading the two CSVs."""
    series = {}
    for k, asset in enumerate(market.assets):
        present = ~np.isnan(market.closes[:, k])
        # match the 10-significant-digit rounding of the CSV writer
        closes = np.array([float(f"{c:.10g}") for c in market.closes[present, k]])
        series[asset] = PriceSeries(asset, market.dates[present].copy(), closes)
    index = np.array([float(f"{c:.10g}") for c in market.index_closes])
    return PricePanel._from_series(series), PriceSeries("INDEX", market.dates.copy(), index)
