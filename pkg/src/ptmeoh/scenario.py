"""Hourly electricity-price and renewable-availability profiles."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Sequence

import numpy as np


class Mode(str, Enum):
    GRID = "grid"
    STANDALONE = "standalone"

    @classmethod
    def parse(cls, text: "str | Mode") -> "Mode":
        if isinstance(text, Mode):
            return text
        key = str(text).strip().lower().replace("-", "").replace("_", "")
        aliases = {"grid": cls.GRID, "gridconnected": cls.GRID, "standalone": cls.STANDALONE}
        try:
            return aliases[key]
        except KeyError:
            raise ValueError(f"unknown mode {text!r}; use 'grid' or 'standalone'") from None


class ScenarioError(ValueError):
    pass


@dataclass(frozen=True)
class Scenario:
    """A single hourly profile.

    In grid mode ``values`` are day-ahead prices in EUR/MWh (may be negative);
    in stand-alone mode they are available renewable power in MW.
    """

    mode: Mode
    values: tuple[float, ...]
    label: str = ""
    dt: float = field(default=1.0, init=False)

    def __post_init__(self):
        object.__setattr__(self, "values", tuple(float(v) for v in self.values))
        if not self.values:
            raise ScenarioError("scenario must contain at least one hour")
        if any(not math.isfinite(v) for v in self.values):
            raise ScenarioError("scenario values must be finite")
        if self.mode is Mode.STANDALONE and min(self.values) < 0:
            raise ScenarioError("available power cannot be negative")

    @property
    def steps(self) -> int:
        return len(self.values)

    @property
    def price(self) -> tuple[float, ...]:
        if self.mode is not Mode.GRID:
            raise AttributeError("stand-alone scenarios carry available power, not prices")
        return self.values

    @property
    def available_power(self) -> tuple[float, ...]:
        if self.mode is not Mode.STANDALONE:
            raise AttributeError("grid scenarios carry prices, not available power")
        return self.values

    def as_array(self) -> np.ndarray:
        return np.asarray(self.values, dtype=float)

    def truncated(self, steps: int) -> "Scenario":
        return Scenario(self.mode, self.values[:steps], label=self.label)


def load_scenario(path: str | Path, mode: Mode | str) -> Scenario:
    """Read a ``hour,value`` CSV. Hours must run 0, 1, 2, ... without gaps."""
    mode = Mode.parse(mode)
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"scenario file not found: {path}")
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None:
            raise ScenarioError(f"{path}: empty file")
        if [h.strip().lower() for h in header] != ["hour", "value"]:
            raise ScenarioError(f"{path}: expected header 'hour,value', got {','.join(header)!r}")
        values = []
        for lineno, row in enumerate(reader, start=2):
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != 2:
                raise ScenarioError(f"{path}:{lineno}: expected 2 columns, got {len(row)}")
            try:
                hour = int(row[0])
            except ValueError:
                raise ScenarioError(f"{path}:{lineno}: non-integer hour {row[0]!r}") from None
            if hour != len(values):
                raise ScenarioError(f"{path}:{lineno}: non-contiguous hours, expected {len(values)} got {hour}")
            try:
                values.append(float(row[1]))
            except ValueError:
                raise ScenarioError(f"{path}:{lineno}: non-numeric value {row[1]!r}") from None
    if not values:
        raise ScenarioError(f"{path}: empty file")
    return Scenario(mode, values, label=path.stem)


def save_scenario(scenario: Scenario, path: str | Path) -> None:
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["hour", "value"])
        for hour, value in enumerate(scenario.values):
            writer.writerow([hour, repr(value)])


def synth_price_scenario(
    steps: int, low: float, high: float, period_h: int, seed: int = 0, jitter: float = 0.0
) -> Scenario:
    """Square-wave price: ``period_h // 2`` hours at ``low``, then ``high`` for the rest of the period.

    ``jitter`` adds seeded uniform noise in ``[-jitter, jitter]``; it is off by default.
    """
    if steps < 1 or period_h < 2:
        raise ScenarioError("need steps >= 1 and period_h >= 2")
    if low > high:
        raise ScenarioError("low price must not exceed high price")
    if jitter < 0:
        raise ScenarioError("jitter must be non-negative")
    half = period_h // 2
    hours = np.arange(steps)
    prices = np.where(hours % period_h < half, float(low), float(high))
    if jitter > 0:
        rng = np.random.default_rng(seed)
        prices = prices + rng.uniform(-jitter, jitter, size=steps)
    return Scenario(Mode.GRID, prices.tolist(), label=f"square_{low:g}_{high:g}_{period_h}h")


def synth_renewable_scenario(
    steps: int, pv_peak: float = 110.0, wind_base: float = 126.0, seed: int = 0
) -> Scenario:
    """Daily PV half-sine (06:00 to 18:00, peak at noon) plus a wind term in ``[0, wind_base]``.

    ``seed == 0`` gives a constant wind output of ``wind_base``; any other seed
    draws a mean-reverting random profile.
    """
    if steps < 24:
        raise ScenarioError("renewable scenarios need at least one full day (24 steps)")
    if pv_peak < 0 or wind_base < 0:
        raise ScenarioError("plant sizes must be non-negative")
    hour_of_day = np.arange(steps) % 24
    daylight = (hour_of_day > 6) & (hour_of_day < 18)
    pv = np.where(daylight, pv_peak * np.sin(np.pi * (hour_of_day - 6) / 12.0), 0.0)
    if seed == 0:
        wind = np.full(steps, float(wind_base))
    else:
        rng = np.random.default_rng(seed)
        x = np.empty(steps)
        level = rng.uniform(0.0, 1.0)
        for t in range(steps):
            level = 0.5 + 0.9 * (level - 0.5) + 0.15 * rng.standard_normal()
            x[t] = level
        wind = wind_base * np.clip(x, 0.0, 1.0)
    values = np.clip(pv + wind, 0.0, None)
    return Scenario(Mode.STANDALONE, values.tolist(), label=f"renewable_pv{pv_peak:g}_wind{wind_base:g}_s{seed}")


@dataclass(frozen=True)
class VariationStats:
    thresholds: tuple[float, ...]
    fractions: tuple[float, ...]
    mean: float

    def fraction_le(self, threshold: float) -> float:
        for t, f in zip(self.thresholds, self.fractions):
            if math.isclose(t, threshold):
                return f
        raise KeyError(f"threshold {threshold} was not evaluated")

    @property
    def frac_le_5pct(self) -> float:
        return self.fraction_le(0.05)

    @property
    def frac_le_10pct(self) -> float:
        return self.fraction_le(0.10)

    @property
    def frac_le_25pct(self) -> float:
        return self.fraction_le(0.25)


def hourly_variation_stats(
    scenario: Scenario, thresholds: Sequence[float] = (0.05, 0.10, 0.25)
) -> VariationStats:
    """Share of hour-to-hour changes no larger than each threshold, relative to the series mean."""
    if scenario.steps < 2:
        raise ScenarioError("need at least two hours to compute variations")
    values = scenario.as_array()
    mean = float(values.mean())
    if mean == 0:
        raise ScenarioError("series mean is zero; relative variations are undefined")
    rel = np.abs(np.diff(values)) / abs(mean)
    thresholds = tuple(sorted(float(t) for t in thresholds))
    # a hair of slack so that exact ties are not lost to rounding
    fractions = tuple(float(np.mean(rel <= t * (1 + 1e-12) + 1e-15)) for t in thresholds)
    return VariationStats(thresholds, fractions, mean)
