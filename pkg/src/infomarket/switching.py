"""Strategy-switching dynamics over long multi-period market runs.

Informed traders flip between the value rule and the trend rule whenever
their portfolio return over the evaluation interval falls strictly below the
cross-trader mean. The realized strategy profiles form a finite-state chain
whose transition matrix and state frequencies are estimated from the run.
"""

from __future__ import annotations

import csv
import os
from dataclasses import dataclass, field
from multiprocessing import get_context

import numpy as np

from .agents import Strategy
from .dividends import DividendParams, RateParams, conditional_present_value, generate_dividend_path
from .engine import MarketSession, SessionConfig, market_with_levels
from .rng import SWITCH_DOMAIN, stream


def encode_state(strategies) -> int:
    """Profile -> code in 1..2^n; trader 1 is the least significant bit, chartist = 1."""
    code = 1
    for i, s in enumerate(strategies):
        if s is Strategy.CHARTIST:
            code += 1 << i
        elif s is not Strategy.FUNDAMENTALIST:
            raise ValueError(f"trader {i + 1} has non-switchable strategy {s}")
    return code


def decode_state(code: int, n_traders: int) -> tuple[Strategy, ...]:
    if not 1 <= code <= (1 << n_traders):
        raise ValueError(f"code {code} outside 1..{1 << n_traders}")
    bits = code - 1
    return tuple(
        Strategy.CHARTIST if (bits >> i) & 1 else Strategy.FUNDAMENTALIST
        for i in range(n_traders)
    )


@dataclass(frozen=True)
class SwitchingConfig:
    """Market and updating parameters for one switching experiment.

    Defaults follow the small-market setup: dividend steps of 0.01 and a
    0.001 risk-free rate, with strategy updating at the end of every period.
    """

    n_traders: int = 3
    n_periods: int = 100_000
    interval: int = 1
    dividend_step: float = 0.01
    d0: float = 0.2
    rates: RateParams = RateParams(r_f=0.001, r_e=0.005)
    steps_per_period: int = 100
    initial_cash: float = 1600.0
    initial_shares: int = 40
    initial_price: float = 40.0
    clear_book_each_period: bool = True
    # Restore every trader's endowment after each evaluation, so the interval
    # comparison always measures trading skill from a level start; the price
    # and the dividend walk continue across intervals.
    reset_endowments: bool = True
    # Evaluate wealth with shares marked at the most informed trader's
    # conditional value instead of the last trade price.
    mark_to_value: bool = True
    # Run the long experiment as a chain of standard markets of this many
    # periods: each segment restarts the dividend walk, the price and the
    # endowments, while strategies carry over. None disables chaining.
    session_length: int | None = 30

    def __post_init__(self) -> None:
        if not 1 <= self.n_traders <= 16:
            raise ValueError(f"n_traders must be in 1..16, got {self.n_traders}")
        if self.n_periods < 1:
            raise ValueError("n_periods must be >= 1")
        if self.interval < 1 or self.n_periods % self.interval:
            raise ValueError("interval must divide n_periods")
        if self.reset_endowments and not self.clear_book_each_period:
            raise ValueError("endowment resets require clearing the book each period")
        if self.session_length is not None:
            if self.session_length < 1 or self.session_length % self.interval:
                raise ValueError("session_length must be a positive multiple of interval")

    @property
    def n_states(self) -> int:
        return 1 << self.n_traders

    def session_config(self, initial_code: int, n_periods: int | None = None) -> SessionConfig:
        strategies = decode_state(initial_code, self.n_traders)
        chartist_levels = tuple(
            lvl for lvl, s in zip(range(1, self.n_traders + 1), strategies)
            if s is Strategy.CHARTIST
        )
        periods = self.n_periods if n_periods is None else n_periods
        return SessionConfig(
            agents=market_with_levels(range(1, self.n_traders + 1), chartist_levels),
            dividends=DividendParams(d0=self.d0, sigma=self.dividend_step,
                                     n_periods=periods, horizon_pad=max(9, self.n_traders)),
            rates=self.rates,
            n_periods=periods,
            steps_per_period=self.steps_per_period,
            initial_cash=self.initial_cash,
            initial_shares=self.initial_shares,
            initial_price=self.initial_price,
            clear_book_each_period=self.clear_book_each_period,
            record_series=False,
        )


@dataclass(frozen=True)
class SwitchingRun:
    """Recorded state codes (one per interval, starting state first) plus tie logs."""

    initial_code: int
    codes: np.ndarray
    tie_events: int  # intervals in which some trader's return equalled the mean
    all_equal_events: int  # intervals with all returns equal (no switch at all)


def run_switching_sim(config: SwitchingConfig, initial_code: int, rng: np.random.Generator) -> SwitchingRun:
    """Run the market with periodic strategy updating; record one code per interval.

    Each trader compares its wealth return over the elapsed interval to the
    plain mean across traders and flips strategy iff strictly below it.
    """
    n = config.n_traders
    codes = np.empty(config.n_periods // config.interval + 1, dtype=np.int64)
    codes[0] = initial_code
    strategies = list(decode_state(initial_code, n))
    tie_events = 0
    all_equal = 0
    out = 1
    seg_len = config.session_length or config.n_periods
    r_e = config.rates.r_e
    done = 0
    while done < config.n_periods:
        length = min(seg_len, config.n_periods - done)
        scfg = config.session_config(encode_state(strategies), n_periods=length)
        path = generate_dividend_path(scfg.dividends, rng)
        session = MarketSession(scfg, path, rng)

        def mark(k: int) -> float:
            # share value at the end of period k of this segment
            if config.mark_to_value:
                return conditional_present_value(path, n, k + 1, r_e)
            return session.last_price

        wealth_prev = np.asarray(session.cash) + np.asarray(session.shares, float) * mark(0)
        for k in range(1, length + 1):
            session.run_period()
            done += 1
            if done % config.interval:
                continue
            m = mark(k)
            wealth_now = np.asarray(session.cash) + np.asarray(session.shares, float) * m
            returns = (wealth_now - wealth_prev) / wealth_prev
            mean = returns.mean()
            below = returns < mean
            if not below.any():
                all_equal += 1
            elif (returns == mean).any():
                tie_events += 1
            for i in range(n):
                if below[i]:
                    strategies[i] = (
                        Strategy.CHARTIST
                        if strategies[i] is Strategy.FUNDAMENTALIST
                        else Strategy.FUNDAMENTALIST
                    )
                    session.set_strategy(i, strategies[i])
            codes[out] = encode_state(strategies)
            out += 1
            if config.reset_endowments:
                for i in range(n):
                    session.cash[i] = float(config.initial_cash)
                    session.shares[i] = int(config.initial_shares)
                wealth_prev = np.asarray(session.cash) + np.asarray(session.shares, float) * m
            else:
                wealth_prev = wealth_now
    return SwitchingRun(initial_code, codes, tie_events, all_equal)


# ---------------------------------------------------------------------------
# Chain estimation
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class TransitionEstimate:
    """Row-normalized transition counts; rows never visited are flagged, not imputed."""

    counts: np.ndarray  # (n_states, n_states) integer counts
    probs: np.ndarray  # rows sum to 1 where visited, NaN otherwise
    row_totals: np.ndarray

    @property
    def visited(self) -> np.ndarray:
        return self.row_totals > 0


def estimate_transition_matrix(codes, n_states: int) -> TransitionEstimate:
    codes = np.asarray(codes, dtype=np.int64)
    if len(codes) < 2:
        raise ValueError("need at least two recorded states")
    if codes.min() < 1 or codes.max() > n_states:
        raise ValueError("state codes outside 1..n_states")
    counts = np.zeros((n_states, n_states), dtype=np.int64)
    np.add.at(counts, (codes[:-1] - 1, codes[1:] - 1), 1)
    row_totals = counts.sum(axis=1)
    with np.errstate(invalid="ignore"):
        probs = counts / row_totals[:, None]
    return TransitionEstimate(counts, probs, row_totals)


def frequency_vector(codes, n_states: int) -> np.ndarray:
    """Occurrence share of every state over the recorded sequence."""
    codes = np.asarray(codes, dtype=np.int64)
    pi = np.bincount(codes - 1, minlength=n_states).astype(float)
    return pi / len(codes)


@dataclass(frozen=True)
class EnsembleEstimate:
    """Cross-run mean transition matrix and frequencies with standard errors."""

    mean_probs: np.ndarray
    stderr_probs: np.ndarray
    mean_pi: np.ndarray
    stderr_pi: np.ndarray
    pooled: TransitionEstimate
    runs: tuple[SwitchingRun, ...]


def aggregate_runs(runs: list[SwitchingRun], n_states: int) -> EnsembleEstimate:
    """Combine runs started from different initial states."""
    if not runs:
        raise ValueError("no runs to aggregate")
    mats = []
    pis = []
    total_counts = np.zeros((n_states, n_states), dtype=np.int64)
    for run in runs:
        est = estimate_transition_matrix(run.codes, n_states)
        mats.append(est.probs)
        pis.append(frequency_vector(run.codes, n_states))
        total_counts += est.counts
    mats = np.array(mats)
    pis = np.array(pis)
    m = len(runs)
    with np.errstate(invalid="ignore"):
        mean_probs = np.nanmean(mats, axis=0)
        spread = np.nanstd(mats, axis=0, ddof=1 if m > 1 else 0)
    stderr_probs = spread / np.sqrt(m)
    row_totals = total_counts.sum(axis=1)
    with np.errstate(invalid="ignore"):
        pooled_probs = total_counts / row_totals[:, None]
    pooled = TransitionEstimate(total_counts, pooled_probs, row_totals)
    return EnsembleEstimate(
        mean_probs=mean_probs,
        stderr_probs=stderr_probs,
        mean_pi=pis.mean(axis=0),
        stderr_pi=pis.std(axis=0, ddof=1 if m > 1 else 0) / np.sqrt(m),
        pooled=pooled,
        runs=tuple(runs),
    )


def stationarity_gap(pi: np.ndarray, probs: np.ndarray) -> tuple[np.ndarray, float, float]:
    """Return (pi @ T, max-entry deviation, total deviation) treating NaN rows as absorbing-zero.

    Rows that were never visited carry pi mass ~0, so zeroing them changes
    nothing where the estimate is meaningful.
    """
    t = np.nan_to_num(probs, nan=0.0)
    pi_t = pi @ t
    gap = pi_t - pi
    return pi_t, float(np.abs(gap).max()), float(np.abs(gap).sum())


# ---------------------------------------------------------------------------
# Ensemble driver
# ---------------------------------------------------------------------------


def _one_switching_run(args) -> SwitchingRun:
    config, code, master = args
    return run_switching_sim(config, code, stream(master, SWITCH_DOMAIN, code))


def run_switching_ensemble(
    config: SwitchingConfig,
    initial_codes,
    master_seed: int,
    jobs: int | None = None,
) -> list[SwitchingRun]:
    """Independent runs from several initial states, reproducible for any job count."""
    tasks = [(config, code, master_seed) for code in initial_codes]
    jobs = jobs if jobs is not None else (os.cpu_count() or 1)
    jobs = max(1, min(jobs, len(tasks)))
    if jobs == 1:
        runs = [_one_switching_run(t) for t in tasks]
    else:
        with get_context("fork").Pool(jobs) as pool:
            runs = list(pool.imap_unordered(_one_switching_run, tasks, chunksize=1))
    runs.sort(key=lambda r: r.initial_code)
    return runs


# ---------------------------------------------------------------------------
# CSV output
# ---------------------------------------------------------------------------


def _fmt(x) -> str:
    return repr(float(x))


def _open_for_write(file):
    if hasattr(file, "write"):
        return file, False
    return open(file, "w", newline=""), True


def write_states_csv(runs: list[SwitchingRun], file) -> None:
    f, close = _open_for_write(file)
    try:
        w = csv.writer(f)
        w.writerow(["initial", "interval", "code"])
        for run in runs:
            for idx, code in enumerate(run.codes.tolist()):
                w.writerow([run.initial_code, idx, code])
    finally:
        if close:
            f.close()


def write_tmatrix_csv(est: EnsembleEstimate, file) -> None:
    f, close = _open_for_write(file)
    try:
        w = csv.writer(f)
        w.writerow(["from", "to", "prob", "stderr"])
        n = est.mean_probs.shape[0]
        for a in range(n):
            for b in range(n):
                p = est.mean_probs[a, b]
                se = est.stderr_probs[a, b]
                w.writerow([a + 1, b + 1, _fmt(0.0 if np.isnan(p) else p), _fmt(0.0 if np.isnan(se) else se)])
    finally:
        if close:
            f.close()


def write_freqs_csv(est: EnsembleEstimate, file) -> None:
    pi_t, _, _ = stationarity_gap(est.mean_pi, est.mean_probs)
    f, close = _open_for_write(file)
    try:
        w = csv.writer(f)
        w.writerow(["code", "pi", "pi_T"])
        for code, (p, pt) in enumerate(zip(est.mean_pi, pi_t), start=1):
            w.writerow([code, _fmt(p), _fmt(pt)])
    finally:
        if close:
            f.close()
