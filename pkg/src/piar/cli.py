"""Command-line front end.

Commands: ``simulate``, ``fit``, ``forecast``, ``diagnose`` and
``mc-experiment``. Options may also come from a JSON file given with
``--config``; its keys are the long option names with dashes replaced by
underscores, and flags on the command line override it.

Failures print one line ``error: <Code>: <message>`` on stderr and exit
with a non-zero status (see ``EXIT_CODES``).
"""

import argparse
import csv
import json
import logging
import math
import os
import sys
from typing import Dict, List, Optional, Sequence

import numpy as np

from .core import NoiseSpec, PeriodicCoefficients, PeriodicSeries, year_season
from .diagnostics import fit_metrics, lr_unit_root_test, mcleod_stat, normality_summary, periodic_acf
from .errors import InputError, NumericalError, PiarError
from .estimate import FittedModel, fit_par, fit_piar, residuals
from .experiment import run_experiment
from .forecast import forecast_mc, forecast_vs
from .generate import SimConfig, simulate_piar
from .mcmatrix import EigenSpec
from .models import table2_model
from .pifilter import cascade

logger = logging.getLogger("piar")

EXIT_CODES = {"InputError": 3, "NumericalError": 4, "FileNotFound": 5, "IOError": 6, "InvalidConfig": 7}


class MalformedCSV(InputError):
    code = "MalformedCSV"


class InvalidConfig(InputError):
    code = "InvalidConfig"


def fmt(v: float) -> str:
    return f"{v:.6g}"


# ---------------------------------------------------------------- input/output

def read_series(path: str, period: int) -> PeriodicSeries:
    """Read ``time_index,value`` or ``year,season,value`` CSV (header required)."""
    with open(path, newline="", encoding="utf-8") as fh:
        rows = [r for r in csv.reader(fh) if r]
    if len(rows) < 2:
        raise MalformedCSV(f"{path}: expected a header row and at least one data row")
    width = len(rows[0])
    if width not in (2, 3):
        raise MalformedCSV(f"{path}: expected 2 or 3 columns, got {width}")
    times, values = [], []
    for lineno, row in enumerate(rows[1:], start=2):
        if len(row) != width:
            raise MalformedCSV(f"{path}:{lineno}: expected {width} fields")
        try:
            if width == 2:
                t = int(row[0])
            else:
                year, season = int(row[0]), int(row[1])
                if not 1 <= season <= period:
                    raise MalformedCSV(f"{path}:{lineno}: season {season} outside [1, {period}]")
                t = (year - 1) * period + season
            values.append(float(row[-1]))
        except ValueError as exc:
            raise MalformedCSV(f"{path}:{lineno}: {exc}") from None
        times.append(t)
    if np.any(np.diff(times) != 1):
        raise MalformedCSV(f"{path}: time index must be contiguous and increasing")
    return PeriodicSeries(np.array(values), period, times[0])


def _open_out(path: str):
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    return open(path, "w", newline="", encoding="utf-8")


def write_csv(path: str, header: Sequence[str], rows: Sequence[Sequence]):
    with _open_out(path) as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([repr(float(v)) if isinstance(v, (float, np.floating)) else v for v in row])


def write_series(path: str, x: PeriodicSeries):
    write_csv(path, ["time_index", "value"], zip(x.times.tolist(), x.values.tolist()))


def print_table(header: Sequence[str], rows: Sequence[Sequence], out=None):
    out = out or sys.stdout
    cells = [list(header)] + [[fmt(v) if isinstance(v, (float, np.floating)) else str(v) for v in r] for r in rows]
    widths = [max(len(r[i]) for r in cells) for i in range(len(header))]
    for r in cells:
        print("  ".join(c.rjust(w) for c, w in zip(r, widths)), file=out)


# ---------------------------------------------------------------- models

def _blocks(value, m1: int):
    if value in (None, ""):
        return (1,) * m1
    if isinstance(value, str):
        try:
            value = [int(v) for v in value.split(",") if v.strip()]
        except ValueError:
            raise InputError(f"blocks must be comma-separated integers, got {value!r}") from None
    return tuple(int(v) for v in value)


def load_model(name: str):
    """``(spec, noise, stationary)`` for ``table2:*`` or a JSON model file.

    JSON keys: ``period``, ``sigma2``, and either ``seeds`` (list of
    seed-vectors) with optional ``blocks``, or ``theta`` (``d`` rows of
    PI-parameters); optional ``stationary`` (``d`` rows).
    """
    if name.startswith("table2:"):
        b = table2_model(name)
        return b.spec, b.noise, None
    with open(name, encoding="utf-8") as fh:
        try:
            cfg = json.load(fh)
        except json.JSONDecodeError as exc:
            raise InvalidConfig(f"{name}: {exc}") from None
    try:
        d = int(cfg["period"])
        noise = NoiseSpec(cfg["sigma2"])
        if "seeds" in cfg:
            seeds = np.array(cfg["seeds"], dtype=float).T.reshape(d, -1)
            spec = EigenSpec(d, d, _blocks(cfg.get("blocks"), seeds.shape[1]), seeds)
        else:
            spec = PeriodicCoefficients(np.array(cfg["theta"], dtype=float).reshape(d, -1))
        stationary = PeriodicCoefficients(np.array(cfg["stationary"], dtype=float).reshape(d, -1)) \
            if cfg.get("stationary") else None
    except KeyError as exc:
        raise InvalidConfig(f"{name}: missing key {exc}") from None
    return spec, noise, stationary


def _fit(args, x: PeriodicSeries) -> FittedModel:
    if args.p is None:
        raise InputError("--p is required")
    if args.m1 == 0:
        return fit_par(x, args.p, demean=not args.no_demean)
    return fit_piar(x, args.p, args.m1, _blocks(args.blocks, args.m1), n_starts=args.restarts,
                    seed=args.seed, demean=not args.no_demean, criterion=args.criterion)


def _series(args) -> PeriodicSeries:
    if not args.input:
        raise InputError("--input is required")
    if args.period is None:
        raise InputError("--period is required")
    x = read_series(args.input, args.period)
    if getattr(args, "log", False):
        if np.any(x.values <= 0):
            raise InputError("--log needs a strictly positive series")
        x = x.with_values(np.log(x.values))
    return x


def parameter_rows(model: FittedModel) -> List[list]:
    """Table rows ``[name, value_s1, ..., value_sd]`` for the fitted model."""
    rows = []
    m1 = model.m1
    if m1 == 1:
        rows.append(["alpha"] + model.pi_filter.phi[:, 0].tolist())
    elif m1 == 2 and model.seeds is not None:
        alpha, beta = cascade(model.seeds, chained=model.blocks == (2,))
        rows.append(["alpha"] + alpha.phi[:, 0].tolist())
        rows.append(["beta"] + beta.phi[:, 0].tolist())
    for i in range(m1):
        rows.append([f"theta_{i + 1}"] + model.pi_filter.phi[:, i].tolist())
    for i in range(model.stationary.order):
        rows.append([f"psi_{i + 1}"] + model.stationary.phi[:, i].tolist())
    rows.append(["sigma"] + model.sigma2.sd.tolist())
    rows.append(["sigma2"] + model.sigma2.sigma2.tolist())
    return rows


# ---------------------------------------------------------------- commands

def cmd_simulate(args) -> int:
    if not args.model:
        raise InputError("--model is required")
    if args.n is None:
        raise InputError("--n is required")
    spec, noise, stationary = load_model(args.model)
    x = simulate_piar(SimConfig(spec, noise, args.n, stationary=stationary, burn_in=args.burn_in,
                                rng_seed=args.seed))
    if args.output:
        write_series(args.output, x)
        print(f"wrote {len(x)} observations to {args.output}")
    else:
        w = csv.writer(sys.stdout, lineterminator="\n")
        w.writerow(["time_index", "value"])
        w.writerows([t, repr(v)] for t, v in zip(x.times.tolist(), x.values.tolist()))
    return 0


def cmd_fit(args) -> int:
    x = _series(args)
    model = _fit(args, x)
    d = x.period
    header = ["parameter"] + [f"s{s}" for s in range(1, d + 1)]
    rows = parameter_rows(model)
    print_table(header, rows)
    print(f"loglik {fmt(model.loglik)}  aic {fmt(model.aic)}  bic {fmt(model.bic)}  n {model.n_used}"
          f"  mean {fmt(model.mean)}")
    named = {r[0]: np.array(r[1:]) for r in rows}
    for key in ("alpha", "beta"):
        if key in named:
            print(f"prod {key} {fmt(float(np.prod(named[key])))}")
    if args.output:
        write_csv(args.output, header, rows)
    return 0


def cmd_forecast(args) -> int:
    x = _series(args)
    model = _fit(args, x)
    method = forecast_vs if args.method == "vs" else forecast_mc
    res = method(model, x, args.horizon, level=args.level)
    times, pt, lo, up, sd = res.chronological(args.steps)
    header = ["time_index", "year", "season", "point", "lower", "upper", "sd"]
    rows = [[int(t), *year_season(int(t), x.period), a, b, c, e] for t, a, b, c, e in zip(times, pt, lo, up, sd)]
    if args.log:
        header += ["point_exp", "lower_exp", "upper_exp"]
        rows = [r + [math.exp(r[3]), math.exp(r[4]), math.exp(r[5])] for r in rows]
    print_table(header, rows)
    if args.output:
        write_csv(args.output, header, rows)
    if args.plot_data:
        scale = np.exp if args.log else (lambda v: v)
        obs = [[int(t), "observed", float(scale(v)), "", ""] for t, v in zip(x.times, x.values)]
        fc = [[int(t), "forecast", float(scale(a)), float(scale(b)), float(scale(c))]
              for t, a, b, c in zip(times, pt, lo, up)]
        write_csv(args.plot_data, ["time_index", "kind", "value", "lower", "upper"], obs + fc)
    if args.holdout:
        hold = read_series(args.holdout, x.period)
        met = fit_metrics(model, hold, res, back_transform=args.log)
        mrows = [[h + 1, a, b] for h, (a, b) in enumerate(zip(met.mape, met.rmse))]
        print(f"aic {fmt(met.aic)}  bic {fmt(met.bic)}")
        print_table(["step", "mape", "rmse"], mrows)
        if args.metrics:
            write_csv(args.metrics, ["step", "mape", "rmse"], mrows)
    return 0


def cmd_diagnose(args) -> int:
    x = _series(args)
    model = _fit(args, x)
    resid = residuals(model, x)
    acf = periodic_acf(resid, args.lags)
    reports = mcleod_stat(acf, model.p)
    acf_rows = [[s + 1, l + 1, acf.rho[s, l], -acf.bound, acf.bound]
                for s in range(acf.period) for l in range(acf.max_lag)]
    mc_rows = [[r.season, r.statistic, r.df, r.critical_value, r.decision] for r in reports]
    print("McLeod portmanteau")
    print_table(["season", "statistic", "df", "critical", "decision"], mc_rows)
    norm = normality_summary(resid)
    print(f"skewness {fmt(norm.skewness)}  excess kurtosis {fmt(norm.excess_kurtosis)}")
    lr_rows = []
    if args.m1 > 0:
        rep = lr_unit_root_test(x, args.p, args.m1, _blocks(args.blocks, args.m1), demean=not args.no_demean,
                                covariance=args.lr_covariance, n_starts=args.restarts, seed=args.seed)
        lr_rows = [[rep.statistic, rep.critical_value, args.m1, rep.decision, rep.source]]
        print(f"LR unit-root test: statistic {fmt(rep.statistic)}  critical {fmt(rep.critical_value)}"
              f"  -> {rep.decision}")
    if args.output_dir:
        out = args.output_dir
        write_csv(os.path.join(out, "acf.csv"), ["season", "lag", "rho", "bound_lower", "bound_upper"], acf_rows)
        write_csv(os.path.join(out, "mcleod.csv"), ["season", "statistic", "df", "critical_value", "decision"],
                  mc_rows)
        write_csv(os.path.join(out, "qq.csv"), ["theoretical", "ordered"],
                  zip(norm.theoretical.tolist(), norm.ordered.tolist()))
        if lr_rows:
            write_csv(os.path.join(out, "lr.csv"), ["statistic", "critical_value", "m1", "decision", "source"],
                      lr_rows)
    return 0


def cmd_mc(args) -> int:
    if not args.model:
        raise InputError("--model is required")
    spec, noise, stationary = load_model(args.model)
    if not isinstance(spec, EigenSpec) or stationary is not None:
        raise InputError("mc-experiment needs a seed-based model without a stationary part")
    summary = run_experiment(spec, noise, args.n, args.reps, args.seed, n_starts=args.restarts,
                             workers=args.workers)
    header = ["row"] + summary.names
    rows = [[label] + vals.tolist() for label, vals in summary.rows()]
    print(f"{args.model}: {summary.reps} replications, n={args.n}, failures={summary.failures}")
    print_table(header, rows)
    if args.output:
        write_csv(args.output, header, rows)
    if args.estimates:
        write_csv(args.estimates, ["replication"] + summary.names,
                  [[r] + row.tolist() for r, row in enumerate(summary.estimates)])
    return 0


# ---------------------------------------------------------------- parser

def _add_data(p):
    p.add_argument("--input", help="CSV with time_index,value or year,season,value")
    p.add_argument("--period", "-d", type=int, help="period d")


def _add_model(p, lr=False):
    p.add_argument("--p", type=int, help="autoregressive order p")
    p.add_argument("--m1", type=int, default=0, help="number of unit roots (0 fits a PAR(p))")
    p.add_argument("--blocks", help="unit Jordan block sizes, e.g. 1,1 or 2 (default: all simple)")
    p.add_argument("--restarts", type=int, default=20, help="random restarts of the seed search")
    p.add_argument("--criterion", choices=["rss", "ml"], default="rss", help="seed criterion")
    p.add_argument("--no-demean", action="store_true", help="do not subtract the overall mean")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="piar", description="Periodic (integrated) autoregressions")
    parser.add_argument("--config", help="JSON file with option defaults")
    parser.add_argument("--verbose", "-v", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--seed", type=int, default=0, help="random seed")
        p.add_argument("--output", "-o", help="output CSV")

    p = sub.add_parser("simulate", help="simulate a series")
    common(p)
    p.add_argument("--model", help="table2:I|II|III or a JSON model file")
    p.add_argument("--n", type=int, help="sample size")
    p.add_argument("--burn-in", type=int, default=0, help="burn-in of the stationary part")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("fit", help="fit a PAR or PIAR model")
    common(p)
    _add_data(p)
    _add_model(p)
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("forecast", help="whole-year forecasts with intervals")
    common(p)
    _add_data(p)
    _add_model(p)
    p.add_argument("--horizon", "-H", type=int, default=1, help="forecast horizon in years")
    p.add_argument("--steps", type=int, help="truncate to the first STEPS seasons")
    p.add_argument("--level", type=float, default=0.95)
    p.add_argument("--method", choices=["vs", "mc"], default="vs")
    p.add_argument("--log", action="store_true", help="fit on the log scale and back-transform")
    p.add_argument("--plot-data", help="CSV with observed values and forecast ribbons")
    p.add_argument("--holdout", help="CSV of realized values for MAPE/RMSE")
    p.add_argument("--metrics", help="output CSV for MAPE/RMSE")
    p.set_defaults(func=cmd_forecast)

    p = sub.add_parser("diagnose", help="residual diagnostics and LR unit-root test")
    common(p)
    _add_data(p)
    _add_model(p)
    p.add_argument("--lags", type=int, default=12, help="maximum lag L")
    p.add_argument("--lr-covariance", choices=["diagonal", "full"], default="diagonal")
    p.add_argument("--output-dir", help="directory for acf.csv, mcleod.csv, qq.csv, lr.csv")
    p.set_defaults(func=cmd_diagnose)

    p = sub.add_parser("mc-experiment", help="Monte Carlo study of the PIAR estimator")
    common(p)
    p.add_argument("--model", help="table2:I|II|III or a JSON model file")
    p.add_argument("--reps", type=int, default=200)
    p.add_argument("--n", type=int, default=240)
    p.add_argument("--restarts", type=int, default=0, help="random restarts per fit")
    p.add_argument("--workers", type=int, help="worker processes (default: PIAR_THREADS or CPU count)")
    p.add_argument("--estimates", help="CSV of per-replication estimates")
    p.set_defaults(func=cmd_mc)
    return parser


def parse_args(argv: Optional[Sequence[str]] = None) -> argparse.Namespace:
    parser = build_parser()
    argv = list(sys.argv[1:] if argv is None else argv)
    first = parser.parse_args(argv)
    if not first.config:
        return first
    try:
        with open(first.config, encoding="utf-8") as fh:
            cfg: Dict = json.load(fh)
    except json.JSONDecodeError as exc:
        raise InvalidConfig(f"{first.config}: {exc}") from None
    if not isinstance(cfg, dict):
        raise InvalidConfig(f"{first.config}: top level must be an object")
    sub = next(a for a in parser._subparsers._group_actions if isinstance(a, argparse._SubParsersAction))
    subparser = sub.choices[first.command]
    known = {a.dest for a in subparser._actions}
    unknown = sorted(set(cfg) - known - {"command"})
    if unknown:
        raise InvalidConfig(f"{first.config}: unknown keys {', '.join(unknown)}")
    subparser.set_defaults(**{k: v for k, v in cfg.items() if k != "command"})
    return parser.parse_args(argv)


def main(argv: Optional[Sequence[str]] = None) -> int:
    try:
        args = parse_args(argv)
        logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                            format="%(levelname)s %(name)s: %(message)s")
        return args.func(args)
    except PiarError as exc:
        if isinstance(exc, InvalidConfig):
            status = EXIT_CODES["InvalidConfig"]
        elif isinstance(exc, NumericalError):
            status = EXIT_CODES["NumericalError"]
        else:
            status = EXIT_CODES["InputError"]
        line = f"{exc.code}: {exc}"
    except FileNotFoundError as exc:
        status, line = EXIT_CODES["FileNotFound"], f"FileNotFound: {exc.filename}: no such file"
    except OSError as exc:
        status, line = EXIT_CODES["IOError"], f"IOError: {exc}"
    print(f"error: {line}", file=sys.stderr)
    return status


if __name__ == "__main__":
    sys.exit(main())
