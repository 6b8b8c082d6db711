"""Command-line front end.

Subcommands: simulate, estimate, grid-search, sensitivity, compare,
report. Exit codes: 0 success, 1 input/configuration error, 2 internal
error. Worker count comes from --workers or the FOURIERSPOT_WORKERS
environment variable.
"""

from __future__ import annotations

import argparse
import sys
import traceback
from pathlib import Path

import numpy as np

from . import harness, seeds
from .errors import ConfigurationError, InputFileError
from .fourier_estimator import (FreqParams, default_eval_times, detect_noise,
                                estimate_classical, estimate_pdf, select_freq)
from .harness import (MODEL_KINDS, ResultStore, ScenarioConfig,
                      _parse_noise_tag, _parse_sampling_tag,
                      load_experiment_config, run_comparison, run_grid_search,
                      run_sensitivity_study,
                      write_comparison_csv, write_report_tables)
from .path_sim import TRADING_DAY_S, write_panel_csv
from .sampling import read_ticks_csv, write_ticks_csv


class _CliError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # exit 1 on usage errors, not argparse's 2
        raise _CliError(message)


def _build_parser() -> _Parser:
    p = _Parser(prog="fourierspot",
                description="Spot covariance estimation and Monte Carlo benchmarks")
    p.add_argument("--workers", type=int, default=None, help="worker processes")
    sub = p.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="simulate one path and dump ticks")
    sim.add_argument("--model", choices=sorted(MODEL_KINDS), default="heston")
    sim.add_argument("--noise", default="none", help="noise tag, e.g. iid:2.5")
    sim.add_argument("--sampling", default="poisson:10")
    sim.add_argument("--d", type=int, default=2)
    sim.add_argument("--seed", type=int, default=0)
    sim.add_argument("--path-index", type=int, default=0)
    sim.add_argument("--out", required=True, help="tick CSV output")
    sim.add_argument("--dense-out", default=None, help="optional dense-path CSV")

    est = sub.add_parser("estimate", help="estimate spot covariance from a tick CSV")
    est.add_argument("ticks", help="input CSV: asset,time_s,log_price")
    est.add_argument("--estimator", choices=["pdf", "classical"], default="pdf")
    est.add_argument("--N", type=int, default=None)
    est.add_argument("--M", type=float, default=None)
    est.add_argument("--alpha", type=float, default=None)
    est.add_argument("--beta", type=float, default=None)
    est.add_argument("--noise", choices=["auto", "yes", "no"], default="auto")
    est.add_argument("--eval-grid-minutes", type=float, default=20.0)
    est.add_argument("--day-length-s", type=float, default=TRADING_DAY_S,
                     help="seconds per day; output is variance per day")
    est.add_argument("--out", required=True)

    grid = sub.add_parser("grid-search", help="(alpha, beta) accuracy grid")
    grid.add_argument("--model", choices=sorted(MODEL_KINDS), default="heston")
    grid.add_argument("--noise", default="none")
    grid.add_argument("--paths", type=int, default=100)
    grid.add_argument("--seed", type=int, default=20260809)
    grid.add_argument("--out", required=True, help="covariance-error grid CSV")

    sens = sub.add_parser("sensitivity", help="sync vs async frequency sweep")
    sens.add_argument("--rho", type=float, nargs="+",
                      default=[0.2, 0.3, -0.3, 0.5, -0.5, 0.7, -0.7, 1.0, -1.0])
    sens.add_argument("--n", type=int, default=500)
    sens.add_argument("--paths", type=int, default=1000)
    sens.add_argument("--n-step", type=int, default=5, help="frequency sweep stride")
    sens.add_argument("--seed", type=int, default=20260809)
    sens.add_argument("--out-dir", required=True)

    cmp_ = sub.add_parser("compare", help="run scenario set and tabulate estimators")
    cmp_.add_argument("--config", required=True, help="YAML experiment file")
    cmp_.add_argument("--store", default="results")
    cmp_.add_argument("--external", action="append", default=[],
                      metavar="NAME=FILE", help="external estimate CSV")
    cmp_.add_argument("--force", action="store_true")
    cmp_.add_argument("--full", action="store_true",
                      help="override to the full study scale "
                           "(500 paths, d up to 40); hours of compute")
    cmp_.add_argument("--out", default=None, help="comparison table CSV")

    rep = sub.add_parser("report", help="regenerate tables from a result store")
    rep.add_argument("--store", default="results")
    rep.add_argument("--out-dir", default="tables")
    return p


def _cmd_simulate(args) -> int:
    cfg = ScenarioConfig(model=MODEL_KINDS[args.model](),
                         noise=_parse_noise_tag(args.noise),
                         sampling=_parse_sampling_tag(args.sampling),
                         d=args.d, master_seed=args.seed, n_paths=1)
    day_ticks, _, _, bundle = harness.simulate_scenario_path(cfg, args.path_index)
    ticks = [t.rescaled(cfg.day_length_s) for t in day_ticks]
    write_ticks_csv(args.out, ticks)
    if args.dense_out:
        noisy = cfg.noise.apply(bundle, seeds.stream(
            cfg.master_seed, cfg.seed_key(), args.path_index, seeds.NOISE))
        write_panel_csv(bundle, args.dense_out, obs_log_prices=noisy.obs_log_prices)
    print(f"wrote {sum(len(t) for t in ticks)} ticks for {args.d} assets to {args.out}")
    return 0


def _cmd_estimate(args) -> int:
    ticks_s = read_ticks_csv(args.ticks)
    day = args.day_length_s
    ticks = [t.rescaled(1.0 / day) for t in ticks_s]
    window = ticks[0].window
    n_mean = int(np.mean([t.n_increments for t in ticks]))
    if args.noise == "auto":
        noisy = detect_noise(ticks)
    else:
        noisy = args.noise == "yes"
    if args.N is not None:
        m_loc = args.M if args.M is not None else float(max(args.N, 1)) ** (4.0 / 9.0)
        freq = FreqParams(N=args.N, M=m_loc)
    else:
        freq = select_freq(n_mean, alpha=args.alpha, beta=args.beta, noise_present=noisy)
        if args.M is not None:
            freq = FreqParams(N=freq.N, M=args.M, alpha=freq.alpha, n_ref=freq.n_ref)
    spacing = args.eval_grid_minutes * 60.0 / day
    eval_times = default_eval_times(window, spacing)
    if args.estimator == "pdf":
        est = estimate_pdf(ticks, freq, eval_times, window=window)
    else:
        est = estimate_classical(ticks, freq.N, max(1, int(np.sqrt(freq.N))),
                                 eval_times, window=window)
    est = _rescale_times(est, day)
    est.to_csv(args.out)
    print(f"{args.estimator}: N={freq.N} M={freq.M:.4g} noise={'yes' if noisy else 'no'} "
          f"-> {len(est.eval_times)} matrices to {args.out}")
    return 0


def _rescale_times(est, day):
    est.eval_times = est.eval_times * day
    return est


def _cmd_grid_search(args) -> int:
    cfg = ScenarioConfig(model=MODEL_KINDS[args.model](),
                         noise=_parse_noise_tag(args.noise),
                         d=2, n_paths=args.paths, master_seed=args.seed)
    res = run_grid_search(cfg, workers=args.workers)
    res.write_csv(args.out)
    print(f"best (alpha, beta) = {res.best}; covariance-error grid in {args.out}")
    return 0


def _cmd_sensitivity(args) -> int:
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    n_values = list(range(0, args.n + 1, max(1, args.n_step)))
    if n_values[-1] != args.n:
        n_values.append(args.n)
    for rho in args.rho:
        res = run_sensitivity_study(rho, n=args.n, n_paths=args.paths,
                                    n_values=n_values, master_seed=args.seed,
                                    workers=args.workers)
        path = out_dir / f"sensitivity_rho_{rho:+.2f}.csv".replace("+", "p").replace("-", "m")
        res.write_csv(path)
        print(f"rho={rho:+.2f}: wrote {path}")
    return 0


def _cmd_compare(args) -> int:
    parsed = load_experiment_config(args.config)
    if args.full:
        import dataclasses as _dc

        full_dims = (2, 5, 10, 15, 20, 25, 30, 40)
        parsed["configs"] = [
            _dc.replace(cfg, n_paths=500, d=d)
            for cfg in parsed["configs"] if cfg.d == parsed["configs"][0].d
            for d in full_dims
        ]
    store = ResultStore(args.store)
    external = {}
    for item in args.external:
        if "=" not in item:
            raise _CliError(f"--external expects NAME=FILE, got {item!r}")
        name, path = item.split("=", 1)
        external[name] = path
    rows = run_comparison(parsed["configs"], store, parsed["estimators"],
                          external=external or None, force=args.force,
                          workers=args.workers)
    if args.out:
        write_comparison_csv(rows, args.out)
        print(f"wrote {len(rows)} comparison rows to {args.out}")
    else:
        for row in rows:
            print(f"{row['scenario']:40s} {row['estimator']:>10s} "
                  f"MISE {row['mise']:.4e}  %PSD {row['psd_pct']:.2f}")
    return 0


def _cmd_report(args) -> int:
    written = write_report_tables(ResultStore(args.store), args.out_dir)
    for path in written:
        print(f"wrote {path}")
    return 0


_COMMANDS = {
    "simulate": _cmd_simulate,
    "estimate": _cmd_estimate,
    "grid-search": _cmd_grid_search,
    "sensitivity": _cmd_sensitivity,
    "compare": _cmd_compare,
    "report": _cmd_report,
}


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        if args.workers is not None:
            import os

            os.environ[harness.WORKERS_ENV] = str(args.workers)
        return _COMMANDS[args.command](args)
    except (_CliError, ValueError, ConfigurationError, InputFileError,
            FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except Exception:
        traceback.print_exc()
        return 2


if __name__ == "__main__":
    sys.exit(main())
