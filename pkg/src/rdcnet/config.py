"""Run configuration: flat ``key = value`` files plus command-line overrides."""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Mapping

from rdcnet.errors import InputError


@dataclass(frozen=True)
class RunConfig:
    """Pipeline settings. Defaults are the published configuration.

    ``first_month``/``last_month`` left as ``None`` are derived from the
    price calendar: every full window that fits inside the data.
    """

    prices_path: str = ""
    index_path: str | None = None
    output_dir: str = "rdc_output"
    first_month: str | None = None
    last_month: str | None = None
    window_length_months: int = 6
    step_months: int = 1
    coverage_threshold: float = 0.80
    min_overlap: int = 30
    zeta_start: float = 0.01
    zeta_end: float = 1.00
    zeta_step: float = 0.01
    top_bottom_k: int = 5
    weighted_adjacency: bool = False
    write_correlation: bool = False
    workers: int = 1
    rng_seed: int = 0

    def __post_init__(self):
        if not 0 < self.coverage_threshold <= 1:
            raise InputError("coverage_threshold must lie in (0, 1]")
        if self.min_overlap < 2:
            raise InputError("min_overlap must be >= 2")
        if self.top_bottom_k < 1:
            raise InputError("top_bottom_k must be >= 1")
        if self.workers < 1:
            raise InputError("workers must be >= 1")

    def replace(self, **changes) -> RunConfig:
        return dataclasses.replace(self, **changes)

    def echo(self) -> dict[str, Any]:
        """Settings recorded in the run manifest (the output location is not)."""
        d = dataclasses.asdict(self)
        d.pop("output_dir")
        d.pop("workers")
        return d


_FIELDS = {f.name: f for f in dataclasses.fields(RunConfig)}
_TRUE = {"1", "true", "yes", "on"}
_FALSE = {"0", "false", "no", "off"}


def _coerce(name: str, raw: str) -> Any:
    kind = _FIELDS[name].type
    raw = raw.strip()
    if "None" in kind and raw.lower() in ("", "none", "null"):
        return None
    try:
        if kind.startswith("bool"):
            low = raw.lower()
            if low not in _TRUE | _FALSE:
                raise ValueError(raw)
            return low in _TRUE
        if kind.startswith("int"):
            return int(raw)
        if kind.startswith("float"):
            return float(raw)
    except ValueError:
        raise InputError(f"config key {name!r}: cannot parse {raw!r} as {kind}") from None
    return raw


def parse_config_text(text: str) -> dict[str, Any]:
    values = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise InputError(f"config line {lineno}: expected key = value")
        key, raw = (s.strip() for s in line.split("=", 1))
        key = key.replace("-", "_")
        if key not in _FIELDS:
            raise InputError(f"config line {lineno}: unknown key {key!r}")
        values[key] = _coerce(key, raw)
    return values


def load_config(path: str | Path | None = None, overrides: Mapping[str, Any] | None = None) -> RunConfig:
    """Defaults, then the config file, then ``overrides`` (``None`` values ignored)."""
    values: dict[str, Any] = {}
    if path is not None:
        try:
            values.update(parse_config_text(Path(path).read_text(encoding="utf-8")))
        except OSError as exc:
            raise InputError(f"cannot read config {path}: {exc}") from None
    for key, value in (overrides or {}).items():
        if value is not None:
            values[key] = value
    return RunConfig(**values)
