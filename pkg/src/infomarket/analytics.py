"""Statistical battery for simulated and external price series.

Covers the relative-return curve across information levels with its pairwise
rank-sum significance matrix, the market-efficiency check on per-period asset
returns, and the stylized-facts toolkit (autocorrelations, moments,
normality test) for tick-level return series.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from math import comb, erfc, exp, sqrt
from typing import NamedTuple

import numpy as np

from .dividends import RateParams
from .engine import SessionResult, session_net_returns


class DegenerateSeriesError(ValueError):
    """Raised when a series has no variation where variation is required."""


class TickDataError(ValueError):
    """Raised when an external tick CSV fails validation."""


# ---------------------------------------------------------------------------
# Wilcoxon rank-sum test
# ---------------------------------------------------------------------------

# Exact enumeration is affordable (and exercised by the acceptance tests) up
# to this pooled size; beyond it the normal approximation takes over.
_EXACT_LIMIT = 16


def _midranks(pooled: np.ndarray) -> np.ndarray:
    order = np.argsort(pooled, kind="mergesort")
    ranks = np.empty(len(pooled))
    i = 0
    while i < len(pooled):
        j = i
        while j + 1 < len(pooled) and pooled[order[j + 1]] == pooled[order[i]]:
            j += 1
        ranks[order[i : j + 1]] = 0.5 * (i + j) + 1.0
        i = j + 1
    return ranks


def _exact_two_sided(doubled_ranks: list[int], k: int, w_doubled: int) -> float:
    """Two-sided p by dynamic programming over size-k subsets of the ranks.

    Counts subsets by their doubled midrank sum (doubling keeps everything
    integral with ties), then doubles the smaller tail.
    """
    total = sum(doubled_ranks)
    counts = [[0] * (total + 1) for _ in range(k + 1)]
    counts[0][0] = 1
    for r in doubled_ranks:
        for size in range(min(k, len(doubled_ranks)), 0, -1):
            row, prev = counts[size], counts[size - 1]
            for s in range(total, r - 1, -1):
                c = prev[s - r]
                if c:
                    row[s] += c
    dist = counts[k]
    below = sum(dist[: w_doubled + 1])
    above = sum(dist[w_doubled:])
    n_subsets = comb(len(doubled_ranks), k)
    return min(1.0, 2.0 * min(below, above) / n_subsets)


def wilcoxon_rank_sum(x, y) -> float:
    """Two-sided rank-sum p-value for equal location of two samples.

    Exact (by enumeration over rank splits, midranks for ties) when the
    pooled size is at most 16; otherwise a normal approximation with tie and
    continuity corrections. Swapping the samples gives the identical value.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if len(x) < 1 or len(y) < 1:
        raise ValueError("both samples need at least one observation")
    pooled = np.concatenate([x, y])
    if np.all(pooled == pooled[0]):
        return 1.0
    ranks = _midranks(pooled)
    n = len(pooled)
    if n <= _EXACT_LIMIT:
        # Enumerate the smaller sample so x,y order cannot matter.
        if len(x) <= len(y):
            k, w = len(x), ranks[: len(x)].sum()
        else:
            k, w = len(y), ranks[len(x) :].sum()
        doubled = [int(round(2 * r)) for r in ranks]
        return _exact_two_sided(doubled, k, int(round(2 * w)))
    nx, ny = len(x), len(y)
    w = ranks[:nx].sum()
    mean = nx * (n + 1) / 2.0
    _, tie_counts = np.unique(pooled, return_counts=True)
    tie_term = (tie_counts.astype(float) ** 3 - tie_counts).sum() / (n * (n - 1))
    var = nx * ny / 12.0 * (n + 1 - tie_term)
    if var <= 0:
        return 1.0
    z = (abs(w - mean) - 0.5) / sqrt(var)
    return min(1.0, erfc(max(z, 0.0) / sqrt(2.0)))


# ---------------------------------------------------------------------------
# Autocorrelation, moments, normality
# ---------------------------------------------------------------------------


class AcfResult(NamedTuple):
    values: np.ndarray  # index = lag, values[0] == 1
    band: float  # two-sided 95% noise band for an uncorrelated series


def acf(series, max_lag: int) -> AcfResult:
    """Autocorrelation for lags 0..max_lag with the +-1.96/sqrt(N) noise band.

    Uses the standard biased normalization (covariances divided by the full
    sample variance), which keeps the sequence positive semi-definite.
    """
    x = np.asarray(series, dtype=float)
    n = len(x)
    if not 0 < max_lag < n:
        raise ValueError(f"max_lag must be in 1..{n - 1}, got {max_lag}")
    xc = x - x.mean()
    denom = float(np.dot(xc, xc))
    if denom == 0.0:
        raise DegenerateSeriesError("series has zero variance")
    values = np.empty(max_lag + 1)
    values[0] = 1.0
    for lag in range(1, max_lag + 1):
        values[lag] = float(np.dot(xc[lag:], xc[:-lag])) / denom
    return AcfResult(values, 1.96 / sqrt(n))


class Moments(NamedTuple):
    mean: float
    std: float
    skewness: float
    kurtosis: float  # normal distribution scores 3


def moments(series) -> Moments:
    """First four moments with population normalization; kurtosis is not excess."""
    x = np.asarray(series, dtype=float)
    if len(x) < 2:
        raise ValueError("need at least two observations")
    m = float(x.mean())
    xc = x - m
    var = float(np.mean(xc**2))
    if var == 0.0:
        raise DegenerateSeriesError("zero variance: skewness and kurtosis undefined")
    std = sqrt(var)
    return Moments(
        mean=m,
        std=std,
        skewness=float(np.mean(xc**3)) / std**3,
        kurtosis=float(np.mean(xc**4)) / var**2,
    )


def jarque_bera(series) -> tuple[float, float]:
    """Jarque-Bera statistic and its chi-square(2df) p-value exp(-JB/2)."""
    x = np.asarray(series, dtype=float)
    mom = moments(x)
    jb = len(x) * (mom.skewness**2 / 6.0 + (mom.kurtosis - 3.0) ** 2 / 24.0)
    return jb, exp(-jb / 2.0)


def log_returns(prices) -> np.ndarray:
    p = np.asarray(prices, dtype=float)
    if (p <= 0).any():
        raise ValueError("prices must be positive to take log-returns")
    return np.diff(np.log(p))


# ---------------------------------------------------------------------------
# Efficiency check
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class EfficiencyReport:
    """Per-period net simple returns on the asset versus the discount rate."""

    returns: np.ndarray  # length n_periods - 1
    mean: float
    r_e: float
    r_f: float

    @property
    def gap(self) -> float:
        return self.mean - self.r_e


def efficiency_report(result: SessionResult, r_e: float | None = None) -> EfficiencyReport:
    rates: RateParams = result.config.rates
    returns = session_net_returns(result)
    return EfficiencyReport(
        returns=returns,
        mean=float(returns.mean()),
        r_e=rates.r_e if r_e is None else r_e,
        r_f=rates.r_f,
    )


# ---------------------------------------------------------------------------
# Relative-return curve and significance matrix
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class JCurveTable:
    levels: tuple[int, ...]
    means: np.ndarray  # percentage points per level
    stderrs: np.ndarray
    p_matrix: np.ndarray  # pairwise rank-sum p-values, 1.0 on the diagonal


def jcurve_table(samples_by_level: dict[int, np.ndarray]) -> JCurveTable:
    """Mean relative return per information level plus all pairwise p-values."""
    levels = tuple(sorted(samples_by_level))
    k = len(levels)
    means = np.empty(k)
    stderrs = np.empty(k)
    p = np.ones((k, k))
    for i, lvl in enumerate(levels):
        s = np.asarray(samples_by_level[lvl], dtype=float)
        means[i] = s.mean()
        stderrs[i] = s.std(ddof=1) / sqrt(len(s)) if len(s) > 1 else math.nan
    for i in range(k):
        for j in range(i + 1, k):
            p[i, j] = p[j, i] = wilcoxon_rank_sum(
                samples_by_level[levels[i]], samples_by_level[levels[j]]
            )
    return JCurveTable(levels, means, stderrs, p)


def random_trader_sweep(samples_by_count: dict[int, np.ndarray]) -> list[tuple[int, float, float]]:
    """Rows (n_traders, mean_pp, stderr_pp) for the uninformed trader."""
    rows = []
    for n in sorted(samples_by_count):
        s = np.asarray(samples_by_count[n], dtype=float)
        rows.append((n, float(s.mean()), float(s.std(ddof=1) / sqrt(len(s)))))
    return rows


# ---------------------------------------------------------------------------
# External tick series
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class TickSeries:
    times: np.ndarray
    prices: np.ndarray

    def __post_init__(self) -> None:
        if len(self.times) != len(self.prices):
            raise ValueError("times and prices must have equal length")
        if len(self.times) >= 2 and not (np.diff(self.times) > 0).all():
            raise ValueError("times must be strictly increasing")
        if (self.prices <= 0).any():
            raise ValueError("prices must be positive")

    def log_returns(self) -> np.ndarray:
        return log_returns(self.prices)

    def simple_returns(self) -> np.ndarray:
        return np.diff(self.prices) / self.prices[:-1]


def load_ticks(file) -> TickSeries:
    """Read a `time,price` CSV; any malformed row is rejected with its line number."""
    close = False
    if not hasattr(file, "read"):
        file = open(file, newline="")
        close = True
    try:
        reader = csv.reader(file)
        try:
            header = next(reader)
        except StopIteration:
            raise TickDataError("empty file: expected header 'time,price'") from None
        if [h.strip().lower() for h in header[:2]] != ["time", "price"]:
            raise TickDataError(f"line 1: expected header 'time,price', got {','.join(header)}")
        times: list[float] = []
        prices: list[float] = []
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) < 2:
                raise TickDataError(f"line {lineno}: expected 2 fields, got {len(row)}")
            try:
                t, p = float(row[0]), float(row[1])
            except ValueError:
                raise TickDataError(f"line {lineno}: non-numeric field in {row[:2]}") from None
            if not (math.isfinite(t) and math.isfinite(p)):
                raise TickDataError(f"line {lineno}: non-finite value")
            if p <= 0:
                raise TickDataError(f"line {lineno}: price must be positive, got {p}")
            if times and t <= times[-1]:
                raise TickDataError(f"line {lineno}: time {t} not increasing (previous {times[-1]})")
            times.append(t)
            prices.append(p)
    finally:
        if close:
            file.close()
    if len(times) < 2:
        raise TickDataError("need at least two ticks")
    return TickSeries(np.asarray(times), np.asarray(prices))


# ---------------------------------------------------------------------------
# CSV writers (plain, plot-ready)
# ---------------------------------------------------------------------------


def _fmt(x) -> str:
    return repr(float(x))


def _open_for_write(file):
    if hasattr(file, "write"):
        return file, False
    return open(file, "w", newline=""), True


def write_jcurve_csv(table: JCurveTable, file) -> None:
    f, close = _open_for_write(file)
    try:
        w = csv.writer(f)
        w.writerow(["level", "mean_relative_return_pp", "stderr_pp"])
        for lvl, m, se in zip(table.levels, table.means, table.stderrs):
            w.writerow([lvl, _fmt(m), _fmt(se)])
    finally:
        if close:
            f.close()


def write_pvalues_csv(table: JCurveTable, file) -> None:
    f, close = _open_for_write(file)
    try:
        w = csv.writer(f)
        w.writerow(["level_a", "level_b", "p_value"])
        for i, a in enumerate(table.levels):
            for j, b in enumerate(table.levels):
                if i < j:
                    w.writerow([a, b, _fmt(table.p_matrix[i, j])])
    finally:
        if close:
            f.close()


def write_acf_csv(returns_acf: AcfResult, abs_acf: AcfResult, file) -> None:
    f, close = _open_for_write(file)
    try:
        w = csv.writer(f)
        w.writerow(["lag", "acf_ret", "acf_absret", "band"])
        for lag in range(len(returns_acf.values)):
            w.writerow([lag, _fmt(returns_acf.values[lag]), _fmt(abs_acf.values[lag]), _fmt(returns_acf.band)])
    finally:
        if close:
            f.close()


def write_moments_csv(mom: Moments, jb: tuple[float, float], n: int, file) -> None:
    f, close = _open_for_write(file)
    try:
        w = csv.writer(f)
        w.writerow(["n", "mean", "std", "skewness", "kurtosis", "jarque_bera", "jb_pvalue"])
        w.writerow([n, _fmt(mom.mean), _fmt(mom.std), _fmt(mom.skewness), _fmt(mom.kurtosis), _fmt(jb[0]), _fmt(jb[1])])
    finally:
        if close:
            f.close()


def write_efficiency_summary_csv(report: EfficiencyReport, file) -> None:
    f, close = _open_for_write(file)
    try:
        w = csv.writer(f)
        w.writerow(["period", "net_simple_return"])
        for k, r in enumerate(report.returns.tolist(), start=1):
            w.writerow([k, _fmt(r)])
    finally:
        if close:
            f.close()


def write_sweep_csv(rows: list[tuple[int, float, float]], file) -> None:
    f, close = _open_for_write(file)
    try:
        w = csv.writer(f)
        w.writerow(["n_traders", "random_trader_mean_pp", "stderr_pp"])
        for n, m, se in rows:
            w.writerow([n, _fmt(m), _fmt(se)])
    finally:
        if close:
            f.close()
