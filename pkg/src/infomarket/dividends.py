"""Dividend process and dividend-discount valuation.

The risky asset pays one dividend per trading period. The whole sequence is
drawn before trading starts, as a reflected Gaussian random walk, and is the
sole source of fundamental information: a trader with forecasting horizon j
reads the next j dividends and discounts them into a conditional present
value of the asset, treating the last known one as a perpetuity.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class DividendParams:
    """Parameters of the dividend random walk.

    d0: first dividend (currency per share per period)
    sigma: scale of the Gaussian steps
    n_periods: trading periods the path must cover
    horizon_pad: extra periods generated so lookahead never runs off the end
    """

    d0: float = 0.2
    sigma: float = 0.1
    n_periods: int = 30
    horizon_pad: int = 9

    def __post_init__(self) -> None:
        if self.sigma < 0:
            raise ValueError(f"sigma must be >= 0, got {self.sigma}")
        if self.n_periods < 1:
            raise ValueError(f"n_periods must be >= 1, got {self.n_periods}")
        if self.horizon_pad < 0:
            raise ValueError(f"horizon_pad must be >= 0, got {self.horizon_pad}")

    @property
    def length(self) -> int:
        return self.n_periods + self.horizon_pad


@dataclass(frozen=True)
class RateParams:
    """Per-period interest rates: r_f paid on cash, r_e used for discounting."""

    r_f: float = 0.01
    r_e: float = 0.005

    def __post_init__(self) -> None:
        if self.r_e <= 0:
            raise ValueError(f"r_e must be > 0, got {self.r_e}")
        if self.r_f < 0:
            raise ValueError(f"r_f must be >= 0, got {self.r_f}")


class DividendPath:
    """Non-negative dividends indexed by 1-based period."""

    __slots__ = ("values",)

    def __init__(self, values) -> None:
        arr = np.asarray(values, dtype=float)
        if arr.ndim != 1 or arr.size < 1:
            raise ValueError("a dividend path needs at least one period")
        if (arr < 0).any():
            raise ValueError("dividends must be non-negative")
        self.values = arr

    def __len__(self) -> int:
        return len(self.values)

    def dividend(self, period: int) -> float:
        """Dividend paid at the end of `period` (1-based)."""
        if not 1 <= period <= len(self.values):
            raise IndexError(f"period {period} outside path of length {len(self.values)}")
        return float(self.values[period - 1])


def generate_dividend_path(params: DividendParams, rng: np.random.Generator) -> DividendPath:
    """Draw the dividend walk: D(1) = d0, D(i) = |D(i-1) + sigma * z_i|.

    The absolute value is applied at every step, so the walk reflects off
    zero instead of going negative.
    """
    n = params.length
    values = np.empty(n)
    values[0] = params.d0
    d = params.d0
    sigma = params.sigma
    for i, z in enumerate(rng.standard_normal(n - 1).tolist(), start=1):
        d = abs(d + sigma * z)
        values[i] = d
    return DividendPath(values)


def conditional_present_value(path: DividendPath, level: int, period: int, r_e: float) -> float:
    """Present value of the asset for a trader reading `level` dividends from `period` on.

    The last readable dividend, D(period + level - 1), is discounted as a
    perpetuity with rate r_e; the earlier readable ones are discounted
    individually. For level 1 the perpetuity term is D(period)*(1+r_e)/r_e
    and the individual sum is empty.
    """
    if level < 1:
        raise ValueError(f"information level must be >= 1, got {level}")
    last = period + level - 1
    if period < 1 or last > len(path):
        raise IndexError(
            f"level {level} at period {period} needs dividend {last}, "
            f"path has {len(path)}"
        )
    growth = 1.0 + r_e
    pv = path.dividend(last) / (r_e * growth ** (level - 2))
    for i in range(period, last):
        pv += path.dividend(i) / growth ** (i - period)
    return pv


def write_dividends_csv(path: DividendPath, file) -> None:
    """Write a path as `period,dividend` rows (file: path or open handle)."""
    close = False
    if not hasattr(file, "write"):
        file = open(file, "w", newline="")
        close = True
    try:
        w = csv.writer(file)
        w.writerow(["period", "dividend"])
        for i, d in enumerate(path.values.tolist(), start=1):
            w.writerow([i, repr(d)])
    finally:
        if close:
            file.close()


def read_dividends_csv(file) -> DividendPath:
    """Read a path written by write_dividends_csv; periods must be 1..N in order."""
    close = False
    if not hasattr(file, "read"):
        file = open(file, newline="")
        close = True
    try:
        rows = list(csv.reader(file))
    finally:
        if close:
            file.close()
    if not rows or rows[0][:2] != ["period", "dividend"]:
        raise ValueError("expected header 'period,dividend'")
    values = []
    for lineno, row in enumerate(rows[1:], start=2):
        if len(row) != 2:
            raise ValueError(f"line {lineno}: expected 2 fields, got {len(row)}")
        period, dividend = int(row[0]), float(row[1])
        if period != lineno - 1:
            raise ValueError(f"line {lineno}: periods must run 1..N, got {period}")
        values.append(dividend)
    return DividendPath(values)
