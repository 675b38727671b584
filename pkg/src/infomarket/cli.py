"""Command-line front end: run experiments, emit CSV bundles, replay manifests.

Subcommands:
  simulate  one session, full CSV bundle (prices, trades, wealth, dividends)
  batch     Monte Carlo batch (or trader-count sweep) with curve outputs
  stats     analytics over a simulated run or an external tick CSV
  markov    strategy-switching experiments and chain estimates
  replay    re-run a stored manifest bit-exactly

Every run writes a manifest.json sufficient for exact replay and prints the
effective configuration including the master seed. Exit codes: 0 success,
2 configuration error, 3 data error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .analytics import (
    TickDataError,
    acf,
    efficiency_report,
    jarque_bera,
    jcurve_table,
    load_ticks,
    log_returns,
    moments,
    random_trader_sweep,
    write_acf_csv,
    write_efficiency_summary_csv,
    write_jcurve_csv,
    write_moments_csv,
    write_pvalues_csv,
    write_sweep_csv,
)
from .dividends import generate_dividend_path
from .engine import export_session_csv, run_session
from .montecarlo import run_batch, write_efficiency_csv, write_runs_csv
from .presets import (
    PRESETS,
    SWEEP_TRADER_COUNTS,
    batch_for_preset,
    reference_session,
    sweep_batch,
    switching_for_preset,
)
from .rng import PATH_DOMAIN, RUN_DOMAIN, stream
from .switching import (
    SwitchingConfig,
    aggregate_runs,
    run_switching_ensemble,
    write_freqs_csv,
    write_states_csv,
    write_tmatrix_csv,
)

MANIFEST_SCHEMA = 1
CONFIG_SCHEMA = 1

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_DATA = 3


class ConfigError(Exception):
    pass


def _preset_help() -> str:
    lines = ["presets:"]
    for p in PRESETS.values():
        lines.append(f"  {p.name:<18} {p.description}")
    return "\n".join(lines)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="infomarket",
        description="Double-auction market simulator with heterogeneously informed traders.",
        epilog=_preset_help(),
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    parser.add_argument("--version", action="version", version=f"infomarket {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser, *, preset=False, batch=False, markov=False) -> None:
        p.add_argument("--config", help="JSON file with defaults for these flags (flags win)")
        p.add_argument("--seed", type=int, default=None, help="master seed (default 0)")
        p.add_argument("--out", default=None,
                       help="output directory (default: $INFOMARKET_OUT)")
        p.add_argument("--jobs", type=int, default=None, help="worker processes")
        if preset:
            p.add_argument("--preset", choices=sorted(PRESETS), default=None)
        p.add_argument("--agents", type=int, default=None, help="number of traders")
        p.add_argument("--periods", type=int, default=None, help="trading periods")
        p.add_argument("--steps", type=int, default=None, help="steps per period")
        p.add_argument("--no-clearing", action="store_true",
                       help="keep the book across period boundaries")
        if batch:
            p.add_argument("--sessions", type=int, default=None, help="dividend paths")
            p.add_argument("--runs", type=int, default=None, help="runs per session")
        if markov:
            p.add_argument("--traders", type=int, default=None, help="informed traders")
            p.add_argument("--interval", type=int, default=None,
                           help="periods between strategy updates")
            p.add_argument("--states", default=None,
                           help="comma-separated initial state codes (default: all)")

    p = sub.add_parser("simulate", help="run one session and export its CSV bundle")
    common(p)
    p = sub.add_parser("batch", help="run a Monte Carlo batch or sweep",
                       epilog=_preset_help(),
                       formatter_class=argparse.RawDescriptionHelpFormatter)
    common(p, preset=True, batch=True)
    p = sub.add_parser("stats", help="analytics over a simulated run or tick CSV")
    common(p)
    p.add_argument("--ticks", default=None, help="external time,price CSV to analyse")
    p.add_argument("--max-lag", type=int, default=20, help="autocorrelation horizon")
    p.add_argument("--per-step", action="store_true",
                   help="use per-step prices instead of per-trade prices")
    p = sub.add_parser("markov", help="strategy-switching experiments",
                       epilog=_preset_help(),
                       formatter_class=argparse.RawDescriptionHelpFormatter)
    common(p, preset=True, markov=True)
    p = sub.add_parser("replay", help="re-run a stored manifest bit-exactly")
    p.add_argument("--manifest", required=True, help="path to a manifest.json")
    p.add_argument("--out", default=None, help="output directory (default: $INFOMARKET_OUT)")
    return parser


def _apply_config_file(args: argparse.Namespace, parser: argparse.ArgumentParser) -> None:
    if getattr(args, "config", None) is None:
        return
    try:
        with open(args.config) as f:
            data = json.load(f)
    except OSError as e:
        raise ConfigError(f"cannot read config file: {e}") from None
    except json.JSONDecodeError as e:
        raise ConfigError(f"config file is not valid JSON: {e}") from None
    if not isinstance(data, dict):
        raise ConfigError("config file must hold a JSON object")
    version = data.pop("schema_version", CONFIG_SCHEMA)
    if version != CONFIG_SCHEMA:
        raise ConfigError(f"unsupported config schema_version {version}")
    known = {k for k in vars(args) if k not in ("command", "config")}
    for key, value in data.items():
        attr = key.replace("-", "_")
        if attr not in known:
            raise ConfigError(f"unknown config key {key!r}")
        # command line wins; config fills unset values only
        current = getattr(args, attr)
        if current is None or current is False:
            setattr(args, attr, value)


def _outdir(args) -> Path:
    out = args.out or os.environ.get("INFOMARKET_OUT")
    if not out:
        raise ConfigError("no output directory: pass --out or set INFOMARKET_OUT")
    path = Path(out)
    path.mkdir(parents=True, exist_ok=True)
    return path


def _effective(args, **extra) -> dict:
    skip = {"command", "config", "out"}
    eff = {k: v for k, v in sorted(vars(args).items()) if k not in skip and v is not None}
    eff.update(extra)
    return eff


def _announce(command: str, eff: dict, out: Path) -> None:
    print(f"infomarket {command} -> {out}")
    print(json.dumps(eff, sort_keys=True, default=str))


def _write_manifest(out: Path, command: str, eff: dict) -> None:
    manifest = {
        "schema_version": MANIFEST_SCHEMA,
        "package_version": __version__,
        "command": command,
        "params": eff,
    }
    with open(out / "manifest.json", "w") as f:
        json.dump(manifest, f, indent=2, sort_keys=True)
        f.write("\n")


def _session_overrides(args) -> dict:
    kw = {}
    if args.agents is not None:
        kw["n_agents"] = args.agents
    if args.periods is not None:
        kw["n_periods"] = args.periods
    if args.steps is not None:
        kw["steps_per_period"] = args.steps
    if getattr(args, "no_clearing", False):
        kw["clear_book"] = False
    return kw


def cmd_simulate(args) -> int:
    out = _outdir(args)
    seed = args.seed if args.seed is not None else 0
    eff = _effective(args, seed=seed)
    _announce("simulate", eff, out)
    scfg = reference_session(record_series=True, **_session_overrides(args))
    path = generate_dividend_path(scfg.dividends, stream(seed, PATH_DOMAIN, 0))
    result = run_session(scfg, path, stream(seed, RUN_DOMAIN, 0, 0))
    export_session_csv(result, out)
    _write_manifest(out, "simulate", eff)
    print(f"trades: {len(result.trade_prices)}")
    return EXIT_OK


def _emit_batch_outputs(batch, out: Path) -> None:
    write_runs_csv(batch, out / "runs.csv")
    table = jcurve_table(batch.samples_by_level())
    write_jcurve_csv(table, out / "jcurve.csv")
    write_pvalues_csv(table, out / "pvalues.csv")
    if batch.period_returns is not None:
        write_efficiency_csv(batch, out / "efficiency.csv")
        print(f"mean net simple return: {batch.mean_net_return():.6f} "
              f"(r_e = {batch.config.session.rates.r_e})")


def cmd_batch(args) -> int:
    out = _outdir(args)
    seed = args.seed if args.seed is not None else 0
    preset = args.preset or "jcurve10"
    eff = _effective(args, seed=seed, preset=preset)
    _announce("batch", eff, out)
    if preset == "tradercount_sweep":
        samples = {}
        for n in SWEEP_TRADER_COUNTS:
            cfg = sweep_batch(n, seed, jobs=args.jobs)
            if args.sessions is not None or args.runs is not None:
                cfg = sweep_batch(n, seed,
                                  n_sessions=args.sessions or cfg.n_sessions,
                                  runs_per_session=args.runs or cfg.runs_per_session,
                                  jobs=args.jobs)
            batch = run_batch(cfg)
            write_runs_csv(batch, out / f"runs_{n}.csv")
            samples[n] = batch.samples_by_level()[0]
        write_sweep_csv(random_trader_sweep(samples), out / "sweep.csv")
        _write_manifest(out, "batch", eff)
        return EXIT_OK
    cfg = batch_for_preset(preset, seed, jobs=args.jobs)
    session = cfg.session
    overrides = _session_overrides(args)
    if overrides:
        session = reference_session(
            overrides.get("n_agents", len(session.agents)),
            n_periods=overrides.get("n_periods", session.n_periods),
            steps_per_period=overrides.get("steps_per_period", session.steps_per_period),
            clear_book=overrides.get("clear_book", session.clear_book_each_period),
        )
    from dataclasses import replace

    cfg = replace(
        cfg,
        session=session,
        n_sessions=args.sessions if args.sessions is not None else cfg.n_sessions,
        runs_per_session=args.runs if args.runs is not None else cfg.runs_per_session,
    )
    batch = run_batch(cfg)
    _emit_batch_outputs(batch, out)
    _write_manifest(out, "batch", eff)
    return EXIT_OK


def cmd_stats(args) -> int:
    out = _outdir(args)
    seed = args.seed if args.seed is not None else 0
    eff = _effective(args, seed=seed)
    _announce("stats", eff, out)
    if args.ticks:
        series = load_ticks(args.ticks)
        returns = series.log_returns()
    else:
        scfg = reference_session(record_series=True, **_session_overrides(args))
        path = generate_dividend_path(scfg.dividends, stream(seed, PATH_DOMAIN, 0))
        result = run_session(scfg, path, stream(seed, RUN_DOMAIN, 0, 0))
        prices = result.prices if args.per_step else result.trade_prices
        returns = log_returns(prices)
        report = efficiency_report(result)
        write_efficiency_summary_csv(report, out / "efficiency.csv")
        print(f"mean net simple return: {report.mean:.6f} (r_e = {report.r_e}, r_f = {report.r_f})")
    ret_acf = acf(returns, args.max_lag)
    abs_acf = acf(np.abs(returns), args.max_lag)
    write_acf_csv(ret_acf, abs_acf, out / "acf.csv")
    mom = moments(returns)
    jb = jarque_bera(returns)
    write_moments_csv(mom, jb, len(returns), out / "moments.csv")
    _write_manifest(out, "stats", eff)
    print(f"n={len(returns)} kurtosis={mom.kurtosis:.3f} JB p={jb[1]:.3g}")
    return EXIT_OK


def cmd_markov(args) -> int:
    out = _outdir(args)
    seed = args.seed if args.seed is not None else 0
    preset = args.preset or "markov3"
    eff = _effective(args, seed=seed, preset=preset)
    _announce("markov", eff, out)
    cfg, codes = switching_for_preset(preset)
    from dataclasses import replace

    if args.traders is not None:
        cfg = replace(cfg, n_traders=args.traders)
        codes = tuple(range(1, (1 << args.traders) + 1))
    if args.periods is not None:
        cfg = replace(cfg, n_periods=args.periods)
    if args.interval is not None:
        cfg = replace(cfg, interval=args.interval)
    if getattr(args, "no_clearing", False):
        cfg = replace(cfg, clear_book_each_period=False)
    if args.states:
        codes = tuple(int(c) for c in str(args.states).split(","))
    runs = run_switching_ensemble(cfg, codes, seed, jobs=args.jobs)
    est = aggregate_runs(runs, cfg.n_states)
    write_states_csv(runs, out / "states.csv")
    write_tmatrix_csv(est, out / "tmatrix.csv")
    write_freqs_csv(est, out / "freqs.csv")
    _write_manifest(out, "markov", eff)
    ties = sum(r.tie_events for r in runs)
    all_eq = sum(r.all_equal_events for r in runs)
    print(f"runs: {len(runs)}  tie intervals: {ties}  all-equal intervals: {all_eq}")
    return EXIT_OK


def cmd_replay(args) -> int:
    manifest_path = Path(args.manifest)
    if manifest_path.is_dir():
        manifest_path = manifest_path / "manifest.json"
    try:
        with open(manifest_path) as f:
            manifest = json.load(f)
    except OSError as e:
        raise ConfigError(f"cannot read manifest: {e}") from None
    except json.JSONDecodeError as e:
        raise ConfigError(f"manifest is not valid JSON: {e}") from None
    if manifest.get("schema_version") != MANIFEST_SCHEMA:
        raise ConfigError(f"unsupported manifest schema_version {manifest.get('schema_version')}")
    command = manifest.get("command")
    params = manifest.get("params", {})
    if command not in ("simulate", "batch", "stats", "markov"):
        raise ConfigError(f"manifest has unknown command {command!r}")
    argv = [command]
    for key, value in params.items():
        flag = "--" + key.replace("_", "-")
        if isinstance(value, bool):
            if value:
                argv.append(flag)
        else:
            argv.extend([flag, str(value)])
    if args.out:
        argv.extend(["--out", args.out])
    print(f"replaying {command} from {manifest_path}")
    return main(argv)


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    handlers = {
        "simulate": cmd_simulate,
        "batch": cmd_batch,
        "stats": cmd_stats,
        "markov": cmd_markov,
        "replay": cmd_replay,
    }
    try:
        _apply_config_file(args, parser)
        return handlers[args.command](args)
    except ConfigError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except TickDataError as e:
        print(f"data error: {e}", file=sys.stderr)
        return EXIT_DATA
    except (ValueError, KeyError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
