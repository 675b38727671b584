"""Batch orchestration: sessions x runs with deterministic seeding.

A session is a group of runs sharing one dividend path. Every stream is
derived from (master_seed, domain, session[, run]) keys, so the batch
decomposes into independent tasks whose results do not depend on worker
count or scheduling order.
"""

from __future__ import annotations

import csv
import os
from dataclasses import dataclass, field
from multiprocessing import get_context
from pathlib import Path

import numpy as np

from .dividends import generate_dividend_path
from .engine import SessionConfig, relative_returns, run_session, session_net_returns
from .rng import PATH_DOMAIN, RUN_DOMAIN, stream


@dataclass(frozen=True)
class BatchConfig:
    session: SessionConfig = field(default_factory=SessionConfig)
    n_sessions: int = 100
    runs_per_session: int = 100
    master_seed: int = 0
    jobs: int | None = None  # None: one worker per CPU
    collect_period_returns: bool = False

    def __post_init__(self) -> None:
        if self.n_sessions < 1 or self.runs_per_session < 1:
            raise ValueError("n_sessions and runs_per_session must be >= 1")
        if self.master_seed < 0:
            raise ValueError("master_seed must be non-negative")

    @property
    def n_runs(self) -> int:
        return self.n_sessions * self.runs_per_session


@dataclass(frozen=True)
class BatchResult:
    """Raw per-run rows plus the derived per-level aggregates."""

    config: BatchConfig
    levels: tuple[int, ...]
    rel_returns: np.ndarray  # (n_sessions * runs, n_agents) percentage points
    asset_mean_returns: np.ndarray  # (n_sessions * runs,) mean per-period net simple return
    period_returns: np.ndarray | None  # (n_runs, n_periods - 1) when collected
    path_keys: tuple[tuple[int, int, int], ...]  # per-session dividend stream key

    def session_run_index(self) -> np.ndarray:
        """(n_runs, 2) array of (session, run) labels aligned with the rows."""
        runs = self.config.runs_per_session
        idx = np.arange(self.config.n_runs)
        return np.column_stack([idx // runs, idx % runs])

    def samples_by_level(self) -> dict[int, np.ndarray]:
        return {lvl: self.rel_returns[:, i] for i, lvl in enumerate(self.levels)}

    def level_means(self) -> dict[int, float]:
        return {lvl: float(self.rel_returns[:, i].mean()) for i, lvl in enumerate(self.levels)}

    def level_stderrs(self) -> dict[int, float]:
        n = len(self.rel_returns)
        return {
            lvl: float(self.rel_returns[:, i].std(ddof=1) / np.sqrt(n))
            for i, lvl in enumerate(self.levels)
        }

    def mean_net_return(self) -> float:
        return float(self.asset_mean_returns.mean())


def _run_session_block(args) -> tuple[int, np.ndarray, np.ndarray, np.ndarray | None]:
    master, s, session_config, runs, collect = args
    path = generate_dividend_path(session_config.dividends, stream(master, PATH_DOMAIN, s))
    n_agents = len(session_config.agents)
    rel = np.empty((runs, n_agents))
    net = np.empty(runs)
    per = np.empty((runs, session_config.n_periods - 1)) if collect else None
    for r in range(runs):
        result = run_session(session_config, path, stream(master, RUN_DOMAIN, s, r))
        rel[r] = relative_returns(result)
        returns = session_net_returns(result)
        net[r] = returns.mean()
        if per is not None:
            per[r] = returns
    return s, rel, net, per


def run_batch(config: BatchConfig) -> BatchResult:
    """Run the full batch; identical output for any worker count."""
    tasks = [
        (config.master_seed, s, config.session, config.runs_per_session, config.collect_period_returns)
        for s in range(config.n_sessions)
    ]
    jobs = config.jobs if config.jobs is not None else (os.cpu_count() or 1)
    jobs = max(1, min(jobs, config.n_sessions))
    if jobs == 1:
        blocks = [_run_session_block(t) for t in tasks]
    else:
        with get_context("fork").Pool(jobs) as pool:
            blocks = list(pool.imap_unordered(_run_session_block, tasks, chunksize=1))
    blocks.sort(key=lambda b: b[0])
    rel = np.concatenate([b[1] for b in blocks])
    net = np.concatenate([b[2] for b in blocks])
    per = np.concatenate([b[3] for b in blocks]) if config.collect_period_returns else None
    levels = tuple(a.info_level for a in config.session.agents)
    keys = tuple((config.master_seed, PATH_DOMAIN, s) for s in range(config.n_sessions))
    return BatchResult(
        config=config,
        levels=levels,
        rel_returns=rel,
        asset_mean_returns=net,
        period_returns=per,
        path_keys=keys,
    )


def _fmt(x) -> str:
    return repr(float(x))


def write_runs_csv(batch: BatchResult, file) -> None:
    """One row per (session, run, trader): session,run,agent_level,relative_return_pp."""
    close = False
    if not hasattr(file, "write"):
        file = open(file, "w", newline="")
        close = True
    try:
        w = csv.writer(file)
        w.writerow(["session", "run", "agent_level", "relative_return_pp"])
        runs = batch.config.runs_per_session
        for row, rr in enumerate(batch.rel_returns):
            s, r = divmod(row, runs)
            for lvl, value in zip(batch.levels, rr):
                w.writerow([s, r, lvl, _fmt(value)])
    finally:
        if close:
            file.close()


def write_efficiency_csv(batch: BatchResult, file) -> None:
    """Per-period net simple returns: session,run,period,net_simple_return."""
    if batch.period_returns is None:
        raise ValueError("batch was run without collect_period_returns")
    close = False
    if not hasattr(file, "write"):
        file = open(file, "w", newline="")
        close = True
    try:
        w = csv.writer(file)
        w.writerow(["session", "run", "period", "net_simple_return"])
        runs = batch.config.runs_per_session
        for row, rets in enumerate(batch.period_returns):
            s, r = divmod(row, runs)
            for k, value in enumerate(rets, start=1):
                w.writerow([s, r, k, _fmt(value)])
    finally:
        if close:
            file.close()
