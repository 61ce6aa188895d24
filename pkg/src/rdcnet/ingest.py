"""Price CSV parsing, rolling calendar-month windows and log returns."""

from __future__ import annotations

import calendar
import csv
import io
import math
import re
from dataclasses import dataclass, field
from datetime import date
from pathlib import Path
from typing import BinaryIO, Iterable, Sequence

import numpy as np

from rdcnet.errors import InputError, PriceFormatError

PRICE_HEADER = ("date", "asset", "close")
INDEX_HEADER = ("date", "close")

_ISO_DATE = re.compile(r"^\d{4}-\d{2}-\d{2}$")
_YEAR_MONTH = re.compile(r"^(\d{4})-(\d{2})$")


@dataclass(frozen=True)
class PriceRecord:
    date: date
    asset_id: str
    close: float

    def __post_init__(self):
        if not self.asset_id:
            raise ValueError("asset_id must be non-empty")
        if not (math.isfinite(self.close) and self.close > 0):
            raise ValueError(f"close must be a positive finite number, got {self.close!r}")


@dataclass(frozen=True, eq=False)
class PriceSeries:
    """Date-ordered closing prices of a single instrument."""

    asset_id: str
    dates: np.ndarray  # datetime64[D], strictly increasing
    closes: np.ndarray

    def __post_init__(self):
        if len(self.dates) != len(self.closes):
            raise ValueError("dates and closes differ in length")
        if len(self.dates) > 1 and not np.all(np.diff(self.dates).astype(np.int64) > 0):
            raise ValueError(f"dates of {self.asset_id!r} are not strictly increasing")
        if np.any(~(self.closes > 0)):
            raise ValueError(f"non-positive close in {self.asset_id!r}")
        self.dates.flags.writeable = False
        self.closes.flags.writeable = False

    def __len__(self):
        return len(self.dates)

    def between(self, start: date, end: date) -> PriceSeries:
        """Sub-series with ``start <= date <= end``."""
        lo, hi = _slice_bounds(self.dates, start, end)
        return PriceSeries(self.asset_id, self.dates[lo:hi].copy(), self.closes[lo:hi].copy())


@dataclass(frozen=True, eq=False)
class PricePanel:
    series: dict[str, PriceSeries]
    trading_calendar: np.ndarray  # datetime64[D], sorted union of all dates

    @classmethod
    def from_records(cls, records: Iterable[PriceRecord]) -> PricePanel:
        grouped: dict[str, list[tuple[date, float]]] = {}
        for rec in records:
            grouped.setdefault(rec.asset_id, []).append((rec.date, rec.close))
        series = {}
        for asset in sorted(grouped):
            rows = sorted(grouped[asset])
            dates = np.array([d for d, _ in rows], dtype="datetime64[D]")
            if len(dates) > 1 and np.any(np.diff(dates).astype(np.int64) == 0):
                raise InputError(f"duplicate (date, asset) pair for {asset!r}")
            closes = np.array([c for _, c in rows], dtype=float)
            series[asset] = PriceSeries(asset, dates, closes)
        return cls._from_series(series)

    @classmethod
    def _from_series(cls, series: dict[str, PriceSeries]) -> PricePanel:
        if series:
            cal = np.unique(np.concatenate([s.dates for s in series.values()]))
        else:
            cal = np.array([], dtype="datetime64[D]")
        cal.flags.writeable = False
        return cls(dict(sorted(series.items())), cal)

    @property
    def assets(self) -> list[str]:
        return list(self.series)

    def __len__(self):
        return len(self.series)


@dataclass(frozen=True, eq=False)
class ReturnSeries:
    asset_id: str
    dates: np.ndarray  # date of the later observation of each pair
    values: np.ndarray

    @property
    def entries(self) -> list[tuple[date, float]]:
        return [(d.item(), float(v)) for d, v in zip(self.dates, self.values)]

    def __len__(self):
        return len(self.values)


def _parse_month(label: str) -> int:
    m = _YEAR_MONTH.match(label)
    if not m or not 1 <= int(m.group(2)) <= 12:
        raise ValueError(f"expected a YYYY-MM month label, got {label!r}")
    return int(m.group(1)) * 12 + int(m.group(2)) - 1


def _format_month(index: int) -> str:
    return f"{index // 12:04d}-{index % 12 + 1:02d}"


@dataclass(frozen=True)
class WindowSpec:
    """Rolling calendar-month windows.

    ``first_month`` and ``last_month`` are ``YYYY-MM`` labels of the first
    month of the first and the last window.
    """

    first_month: str = "2008-01"
    last_month: str = "2020-01"
    window_length_months: int = 6
    step_months: int = 1

    def __post_init__(self):
        if self.window_length_months < 1 or self.step_months < 1:
            raise ValueError("window_length_months and step_months must be >= 1")
        if _parse_month(self.last_month) < _parse_month(self.first_month):
            raise ValueError("last_month precedes first_month")

    def labels(self) -> list[str]:
        first, last = _parse_month(self.first_month), _parse_month(self.last_month)
        return [_format_month(m) for m in range(first, last + 1, self.step_months)]

    def bounds(self, label: str) -> tuple[date, date]:
        """First and last calendar day covered by the window starting at ``label``."""
        start = _parse_month(label)
        end = start + self.window_length_months - 1
        y, m = divmod(end, 12)
        return (
            date(start // 12, start % 12 + 1, 1),
            date(y, m + 1, calendar.monthrange(y, m + 1)[1]),
        )


@dataclass(frozen=True, eq=False)
class WindowPanel:
    window_id: str
    start: date
    end: date
    assets: tuple[str, ...]
    returns: dict[str, ReturnSeries]
    trading_days: int
    excluded: tuple[str, ...] = field(default=())

    MIN_ASSETS = 3

    @property
    def degenerate(self) -> bool:
        """Too few assets survive for a correlation network; skipped downstream."""
        return len(self.assets) < self.MIN_ASSETS


def _slice_bounds(dates: np.ndarray, start: date, end: date) -> tuple[int, int]:
    lo = int(np.searchsorted(dates, np.datetime64(start, "D"), side="left"))
    hi = int(np.searchsorted(dates, np.datetime64(end, "D"), side="right"))
    return lo, hi


def _log_returns_arrays(asset_id: str, dates: np.ndarray, closes: np.ndarray) -> ReturnSeries:
    if len(closes) < 2:
        raise ValueError(f"log returns of {asset_id!r} need at least 2 observations, got {len(closes)}")
    logs = np.log(closes)
    return ReturnSeries(asset_id, dates[1:].copy(), logs[1:] - logs[:-1])


def log_returns(prices: Sequence[tuple[date, float]] | PriceSeries, asset_id: str = "") -> ReturnSeries:
    """Log returns over consecutive available observations.

    A gap in the dates is bridged: the return is stamped with the later date
    and spans the whole gap. ``n`` observations give ``n - 1`` returns.
    """
    if isinstance(prices, PriceSeries):
        return _log_returns_arrays(prices.asset_id, prices.dates, prices.closes)
    pairs = list(prices)
    dates = np.array([d for d, _ in pairs], dtype="datetime64[D]")
    closes = np.array([c for _, c in pairs], dtype=float)
    if np.any(~(closes > 0)):
        raise ValueError("closes must be strictly positive")
    if len(dates) > 1 and np.any(np.diff(dates).astype(np.int64) <= 0):
        raise ValueError("dates must be strictly increasing")
    return _log_returns_arrays(asset_id, dates, closes)


def passes_coverage(observations: int, trading_days: int, threshold: float) -> bool:
    """Inclusive ``observations >= threshold * trading_days`` test."""
    # the slack absorbs binary rounding of products like 0.8 * 15
    return observations >= threshold * trading_days - 1e-9


def build_windows(panel: PricePanel, spec: WindowSpec, coverage_threshold: float = 0.80) -> list[WindowPanel]:
    """Cut ``panel`` into the rolling windows of ``spec``.

    Returns an empty list when the spec's range does not touch the panel's
    trading calendar at all. Otherwise every generated window is returned;
    windows with fewer than three surviving assets have ``degenerate`` set.
    """
    if not 0 < coverage_threshold <= 1:
        raise ValueError("coverage_threshold must lie in (0, 1]")
    labels = spec.labels()
    cal = panel.trading_calendar
    if len(cal) == 0:
        return []
    overall_start = spec.bounds(labels[0])[0]
    overall_end = spec.bounds(labels[-1])[1]
    lo, hi = _slice_bounds(cal, overall_start, overall_end)
    if lo == hi:
        return []

    windows = []
    for label in labels:
        start, end = spec.bounds(label)
        lo, hi = _slice_bounds(cal, start, end)
        trading_days = hi - lo
        kept, dropped, returns = [], [], {}
        for asset, series in panel.series.items():
            a, b = _slice_bounds(series.dates, start, end)
            n_obs = b - a
            if n_obs == 0:
                continue
            if n_obs >= 2 and passes_coverage(n_obs, trading_days, coverage_threshold):
                kept.append(asset)
                returns[asset] = _log_returns_arrays(asset, series.dates[a:b], series.closes[a:b])
            else:
                dropped.append(asset)
        windows.append(
            WindowPanel(label, start, end, tuple(kept), returns, trading_days, tuple(dropped))
        )
    return windows


def _text_stream(source) -> io.TextIOBase:
    if isinstance(source, (bytes, bytearray)):
        source = io.BytesIO(source)
    if isinstance(source, (str, Path)):
        return open(source, encoding="utf-8-sig", newline="")
    if isinstance(source, io.TextIOBase):
        return source
    return io.TextIOWrapper(source, encoding="utf-8-sig", newline="")


def _read_rows(source, header: tuple[str, ...]):
    stream = _text_stream(source)
    reader = csv.reader(stream)
    try:
        first = next(reader)
    except StopIteration:
        raise PriceFormatError("empty input") from None
    except UnicodeDecodeError as exc:
        raise PriceFormatError(f"input is not valid UTF-8 ({exc})") from None
    if tuple(h.strip() for h in first) != header:
        raise PriceFormatError(f"expected header {','.join(header)!r}, got {','.join(first)!r}", line=1)
    try:
        for row in reader:
            if not row or (len(row) == 1 and not row[0].strip()):
                continue
            yield reader.line_num, row
    except UnicodeDecodeError as exc:
        raise PriceFormatError(f"input is not valid UTF-8 ({exc})", line=reader.line_num + 1) from None


def _parse_date(text: str, line: int) -> date:
    text = text.strip()
    if not _ISO_DATE.match(text):
        raise PriceFormatError(f"invalid date {text!r}, expected YYYY-MM-DD", line)
    try:
        return date.fromisoformat(text)
    except ValueError:
        raise PriceFormatError(f"invalid date {text!r}", line) from None


def _parse_close(text: str, line: int) -> float:
    try:
        value = float(text)
    except ValueError:
        raise PriceFormatError(f"non-numeric close {text!r}", line) from None
    if not math.isfinite(value) or value <= 0:
        raise PriceFormatError(f"close must be strictly positive, got {text.strip()!r}", line)
    return value


def parse_prices(source: BinaryIO | bytes | str | Path) -> PricePanel:
    """Read a ``date,asset,close`` CSV into a validated panel.

    ``source`` may be a binary stream, raw bytes, or a file path.
    """
    records = []
    seen: dict[tuple[date, str], int] = {}
    for line, row in _read_rows(source, PRICE_HEADER):
        if len(row) != 3:
            raise PriceFormatError(f"expected 3 fields, got {len(row)}", line)
        day = _parse_date(row[0], line)
        asset = row[1].strip()
        if not asset:
            raise PriceFormatError("empty asset id", line)
        close = _parse_close(row[2], line)
        key = (day, asset)
        if key in seen:
            raise PriceFormatError(
                f"duplicate (date, asset) pair ({day.isoformat()}, {asset}); first seen on line {seen[key]}",
                line,
            )
        seen[key] = line
        records.append(PriceRecord(day, asset, close))
    if not records:
        raise PriceFormatError("empty input: no price rows")
    return PricePanel.from_records(records)


def parse_index(source: BinaryIO | bytes | str | Path, name: str = "INDEX") -> PriceSeries:
    """Read a ``date,close`` market-index CSV."""
    rows = {}
    for line, row in _read_rows(source, INDEX_HEADER):
        if len(row) != 2:
            raise PriceFormatError(f"expected 2 fields, got {len(row)}", line)
        day = _parse_date(row[0], line)
        if day in rows:
            raise PriceFormatError(f"duplicate date {day.isoformat()}", line)
        rows[day] = _parse_close(row[1], line)
    if not rows:
        raise PriceFormatError("empty input: no index rows")
    days = sorted(rows)
    return PriceSeries(
        name,
        np.array(days, dtype="datetime64[D]"),
        np.array([rows[d] for d in days], dtype=float),
    )


def window_index_returns(index: PriceSeries, start: date, end: date) -> ReturnSeries:
    """Index log returns computed from the index closes inside ``[start, end]``."""
    window = index.between(start, end)
    if len(window) < 2:
        raise InputError(f"index has fewer than 2 closes between {start} and {end}")
    return log_returns(window)
