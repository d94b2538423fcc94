"""Command-line front end.

Every randomised command takes ``--seed``; without it a seed is drawn and
printed to stderr so the run can be repeated. ``--workers`` defaults to
the ``STYLIZED_WORKERS`` environment variable (1 if unset).

Exit codes: 0 success, 1 usage or configuration error, 2 data error,
3 numerical failure, 4 threshold gate failed.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path

import numpy as np

from . import series_io
from ._seeding import child_seeds, fresh_seed
from .feature_harness import HarnessError, evaluate_features, render_report
from .garch_baseline import GarchFitError
from .models import DecompositionModel, ModelError, fit_decomposition, fit_garch_model, load_model, save_model
from .multiscale_vol import (InfeasibleError, MultiscaleConfig, calibrate_alpha_n, estimate_piecewise_vol,
                             residual_diagnostics, sojourn_curve)
from .series_io import PriceSeries, ReturnSeries, SeriesError
from .stats_core import acf_values, gain_loss_curve
from .vol_sim import HighFreqParams

log = logging.getLogger("stylized")

EXIT_OK, EXIT_CONFIG, EXIT_DATA, EXIT_NUMERIC, EXIT_GATE = 0, 1, 2, 3, 4
WORKERS_ENV = "STYLIZED_WORKERS"


class ConfigError(Exception):
    pass


class DataError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


def _default_workers() -> int:
    raw = os.environ.get(WORKERS_ENV, "1")
    try:
        w = int(raw)
    except ValueError:
        raise ConfigError(f"{WORKERS_ENV}={raw!r} is not an integer") from None
    if w < 1:
        raise ConfigError(f"{WORKERS_ENV} must be at least 1")
    return w


def _seed(args) -> int:
    if args.seed is None:
        args.seed = fresh_seed()
        print(f"seed: {args.seed}", file=sys.stderr)
    return args.seed


def _workers(args) -> int:
    w = args.workers if args.workers is not None else _default_workers()
    if w < 1:
        raise ConfigError("--workers must be at least 1")
    return w


def _load_returns(path, method="simple") -> ReturnSeries:
    if not Path(path).is_file():
        raise DataError(f"no such file: {path}")
    s = series_io.load_series(path, method=method)
    if isinstance(s, PriceSeries):
        s = series_io.to_returns(s, method)
    return s


def _load_model(path):
    if not Path(path).is_file():
        raise ConfigError(f"no such parameter file: {path}")
    return load_model(path)


def _out_dir(path) -> Path:
    p = Path(path)
    p.mkdir(parents=True, exist_ok=True)
    return p


# -- commands --------------------------------------------------------------------

def cmd_ingest(args) -> int:
    if not Path(args.input).is_file():
        raise DataError(f"no such file: {args.input}")
    kind = "price" if args.prices else "return" if args.returns else None
    s = series_io.load_series(args.input, kind=kind, delimiter=args.delimiter, method=args.method,
                              value_column=args.value_column, date_column=args.date_column)
    if isinstance(s, PriceSeries):
        s = series_io.to_returns(s, args.method)
    out = args.output or str(Path(args.input).with_suffix("")) + ".returns.csv"
    series_io.save_returns(s, out)
    print(f"{len(s)} nonzero returns ({s.zeros_removed} zeros removed) -> {out}")
    return EXIT_OK


def cmd_calibrate(args) -> int:
    if args.series is not None:
        n = len(_load_returns(args.series))
    elif args.n is not None:
        n = args.n
    else:
        raise ConfigError("give --n or --series")
    if n < 2:
        raise ConfigError("n must be at least 2")
    seed = _seed(args)
    a_n = calibrate_alpha_n(n, args.alpha, args.nsim, seed=seed, workers=_workers(args))
    print(repr(a_n))
    if args.output:
        series_io.dump_json({"n": n, "alpha": args.alpha, "nsim": args.nsim, "seed": seed, "alpha_n": a_n},
                            args.output)
    return EXIT_OK


def cmd_segment(args) -> int:
    r = _load_returns(args.series, args.method)
    if args.alpha_n is None:
        seed = _seed(args)
        args.alpha_n = calibrate_alpha_n(len(r), args.alpha, args.nsim, seed=seed, workers=_workers(args))
        print(f"calibrated alpha_n: {args.alpha_n!r}", file=sys.stderr)
    vol = estimate_piecewise_vol(r, MultiscaleConfig(alpha_n=args.alpha_n))
    out = _out_dir(args.out_dir)
    series_io.write_columns(out / "segments.csv", {"start": vol.breakpoints + 1, "end": vol.ends + 1,
                                                   "length": vol.lengths, "level": vol.levels})
    t = np.arange(1, vol.n + 1)
    series_io.write_columns(out / "steps.csv", {"t": t, "abs_return": np.abs(r.values), "volatility": vol.expand()})
    soj = sojourn_curve(vol)
    series_io.write_columns(out / "sojourn.csv", {"level": [s[0] for s in soj], "length": [s[1] for s in soj]})
    diag = residual_diagnostics(r, vol)
    print(f"{len(vol)} segments at alpha_n={args.alpha_n!r}; residual kurtosis {diag.kurtosis:.3f}")
    return EXIT_OK


def cmd_fit(args) -> int:
    r = _load_returns(args.series, args.method)
    if args.model == "garch":
        m = fit_garch_model(r, resign=not args.no_resign, gamma=args.gamma, nu_bins=args.nu_bins,
                            label=args.label or "garch11")
        p = m.params
        print(f"a0={p.a0:.6g} a1={p.a1:.6g} b1={p.b1:.6g} stationary={p.stationary}")
    else:
        high = HighFreqParams(args.lambda1, args.sigma1, args.lambda2, args.sigma2, args.nu_t)
        m = fit_decomposition(r, alpha_n=args.alpha_n, pow=args.pow, order=args.order, high=high, delta=args.delta,
                              rho=args.rho, eta=args.eta, gamma=args.gamma, nu_bins=args.nu_bins, eacf1=args.eacf1,
                              label=args.label or "decomposition")
        print(f"{m.fit_info['segments']} segments, J={m.fit_info['J']} frequencies")
    save_model(m, args.output)
    return EXIT_OK


def cmd_simulate(args) -> int:
    m = _load_model(args.params)
    n = args.n
    if n is None:
        if not isinstance(m, DecompositionModel):
            raise ConfigError("--n is required for this model")
        n = m.vol.low.n
    if n < 2 or args.count < 1:
        raise ConfigError("need n >= 2 and count >= 1")
    seeds = child_seeds(_seed(args), args.count)
    paths = [m.simulate(n, s) for s in seeds]
    series_io.save_paths(paths, args.output, layout=args.layout)
    print(f"{args.count} paths of length {n} -> {args.output}")
    return EXIT_OK


def cmd_evaluate(args) -> int:
    r = _load_returns(args.series, args.method)
    models = [_load_model(p) for p in args.params]
    seed = _seed(args)
    workers = _workers(args)
    alpha_n = args.alpha_n
    if alpha_n is None:
        alpha_n = calibrate_alpha_n(len(r), 0.9, args.calibration_nsim, seed=child_seeds(seed, 1, 0)[0],
                                    workers=workers)
    reports = [evaluate_features(r, m, nsim=args.nsim, max_lag=args.max_lag, master_seed=seed, alpha_n=alpha_n,
                                 nsim_ref=args.nsim_ref, workers=workers, keep_simulations=args.figure_dir is not None)
               for m in models]
    text = render_report(reports[0], args.format, rows=reports[1:])
    if args.output:
        Path(args.output).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    if args.figure_dir is not None:
        out = _out_dir(args.figure_dir)
        cols = {"lag": np.arange(1, args.max_lag + 1), "data": acf_values(np.abs(r.values), args.max_lag)}
        for rep in reports:
            cols[rep.model_label] = rep.simulated["mean_acf"]
        series_io.write_columns(out / "acf.csv", cols)
        gl = gain_loss_curve(r)
        series_io.write_columns(out / "gainloss.csv", {"abs_return": gl.bin_centers, "pos_frequency": gl.pos_frequency})
    if args.threshold is not None:
        worst = min(rep.min_p() for rep in reports)
        if worst < args.threshold:
            print(f"gate failed: minimum p-value {worst:.3f} < {args.threshold}", file=sys.stderr)
            return EXIT_GATE
    return EXIT_OK


_PLOT_KINDS = {
    # kind: header signature
    "segments": ("t", "abs_return", "volatility"),
    "sojourn": ("level", "length"),
    "gainloss": ("abs_return", "pos_frequency"),
    "acf": ("lag",),
}


def _detect_kind(columns) -> str:
    names = tuple(columns)
    for kind, sig in _PLOT_KINDS.items():
        if names[:len(sig)] == sig:
            return kind
    return "paths"


def cmd_plot(args) -> int:
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    if not Path(args.input).is_file():
        raise DataError(f"no such file: {args.input}")
    try:
        cols = series_io.read_columns(args.input)
    except (ValueError, IndexError) as exc:
        raise DataError(str(exc)) from exc
    kind = args.kind or _detect_kind(cols)
    fig, ax = plt.subplots(figsize=(9, 4.5))
    if kind == "segments":
        ax.plot(cols["t"], cols["abs_return"], lw=0.4, color="0.6", label="|r|")
        ax.step(cols["t"], cols["volatility"], where="post", color="k", label="volatility")
        ax.set_xlabel("day")
    elif kind == "sojourn":
        ax.scatter(cols["length"], cols["level"], s=8, color="k")
        ax.set_xscale("log")
        ax.set_xlabel("sojourn length (days)")
        ax.set_ylabel("volatility level")
    elif kind == "gainloss":
        ax.plot(cols["abs_return"], cols["pos_frequency"], "o-", ms=3, color="k")
        ax.axhline(0.5, ls=":", color="0.5")
        ax.set_xlabel("|r|")
        ax.set_ylabel("fraction positive")
    elif kind == "acf":
        styles = iter(["-", "--", "-.", ":"])
        for name, v in cols.items():
            if name != "lag":
                ax.plot(cols["lag"], v, next(styles, "-"), lw=0.8, label=name)
        ax.set_xlabel("lag")
        ax.set_ylabel("ACF of |r|")
    elif kind == "paths":
        for name, v in list(cols.items())[: args.max_series]:
            ax.plot(np.arange(1, v.size + 1), v, lw=0.4, label=name)
        ax.set_xlabel("day")
    else:
        raise ConfigError(f"unknown plot kind {kind!r}")
    if kind in ("segments", "acf") or (kind == "paths" and len(cols) <= 8):
        ax.legend(frameon=False)
    out = args.output or str(Path(args.input).with_suffix(".svg"))
    fig.tight_layout()
    fig.savefig(out, format="svg")
    plt.close(fig)
    print(out)
    return EXIT_OK


# -- parser ------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="stylized", description=__doc__.split("\n")[0])
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def seeded(sp):
        sp.add_argument("--seed", type=int, help="master seed (printed if omitted)")
        sp.add_argument("--workers", type=int, help=f"worker processes (default ${WORKERS_ENV} or 1)")

    def method(sp):
        sp.add_argument("--method", choices=("simple", "log"), default="simple")

    sp = sub.add_parser("ingest", help="read prices or returns and write a clean return file")
    sp.add_argument("input")
    g = sp.add_mutually_exclusive_group()
    g.add_argument("--prices", action="store_true", help="input holds prices")
    g.add_argument("--returns", action="store_true", help="input holds returns")
    sp.add_argument("--delimiter", default=",")
    sp.add_argument("--value-column")
    sp.add_argument("--date-column")
    sp.add_argument("-o", "--output")
    method(sp)
    sp.set_defaults(func=cmd_ingest)

    sp = sub.add_parser("calibrate", help="alpha_n giving one white-noise segment with frequency alpha")
    sp.add_argument("--n", type=int)
    sp.add_argument("--series")
    sp.add_argument("--alpha", type=float, default=0.9)
    sp.add_argument("--nsim", type=int, default=1000)
    sp.add_argument("-o", "--output", help="also write a JSON record")
    seeded(sp)
    sp.set_defaults(func=cmd_calibrate)

    sp = sub.add_parser("segment", help="piecewise-constant volatility and sojourn data")
    sp.add_argument("series")
    sp.add_argument("--alpha-n", type=float, help="default: calibrated at --alpha")
    sp.add_argument("--alpha", type=float, default=0.9)
    sp.add_argument("--nsim", type=int, default=1000)
    sp.add_argument("-o", "--out-dir", default=".")
    method(sp)
    seeded(sp)
    sp.set_defaults(func=cmd_segment)

    sp = sub.add_parser("fit", help="fit a model and write its parameter JSON")
    sp.add_argument("series")
    sp.add_argument("--model", choices=("decomposition", "garch"), default="decomposition")
    sp.add_argument("--alpha-n", type=float, default=0.998)
    sp.add_argument("--pow", type=float, default=0.8)
    sp.add_argument("--order", choices=("energy", "index"), default="energy")
    hf = HighFreqParams()
    sp.add_argument("--lambda1", type=float, default=hf.lambda1)
    sp.add_argument("--sigma1", type=float, default=hf.sigma1)
    sp.add_argument("--lambda2", type=float, default=hf.lambda2)
    sp.add_argument("--sigma2", type=float, default=hf.sigma2)
    sp.add_argument("--nu-t", type=float, default=hf.nu_t)
    sp.add_argument("--delta", type=float, default=0.2)
    sp.add_argument("--rho", type=float, default=0.0)
    sp.add_argument("--eta", type=float, default=0.0)
    sp.add_argument("--gamma", type=float, default=1.0)
    sp.add_argument("--nu-bins", type=int, default=50)
    sp.add_argument("--eacf1", type=float, help="default: the data's lag-1 sign autocorrelation")
    sp.add_argument("--no-resign", action="store_true", help="GARCH only: keep the Gaussian signs")
    sp.add_argument("--label")
    sp.add_argument("-o", "--output", required=True)
    method(sp)
    sp.set_defaults(func=cmd_fit)

    sp = sub.add_parser("simulate", help="simulate return paths from a parameter file")
    sp.add_argument("params")
    sp.add_argument("--n", type=int)
    sp.add_argument("--count", type=int, default=1)
    sp.add_argument("--layout", choices=("wide", "long"), default="wide")
    sp.add_argument("-o", "--output", required=True)
    seeded(sp)
    sp.set_defaults(func=cmd_simulate)

    sp = sub.add_parser("evaluate", help="Monte-Carlo p-values of the eleven features")
    sp.add_argument("series")
    sp.add_argument("params", nargs="+")
    sp.add_argument("--nsim", type=int, default=1000)
    sp.add_argument("--nsim-ref", type=int, help="size of the reference-mean batch (default: --nsim)")
    sp.add_argument("--max-lag", type=int, default=1500)
    sp.add_argument("--alpha-n", type=float, help="segmentation level for feature 4 (default: calibrated)")
    sp.add_argument("--calibration-nsim", type=int, default=1000)
    sp.add_argument("--format", choices=("text", "json", "csv"), default="text")
    sp.add_argument("--threshold", type=float, help="exit 4 if any p-value is below this")
    sp.add_argument("--figure-dir", help="also write ACF and gain-loss CSVs here")
    sp.add_argument("-o", "--output")
    method(sp)
    seeded(sp)
    sp.set_defaults(func=cmd_evaluate)

    sp = sub.add_parser("plot", help="render a CSV written by another command as SVG")
    sp.add_argument("input")
    sp.add_argument("--kind", choices=(*_PLOT_KINDS, "paths"), help="default: detected from the header")
    sp.add_argument("--max-series", type=int, default=20)
    sp.add_argument("-o", "--output")
    sp.set_defaults(func=cmd_plot)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (ConfigError, ModelError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (DataError, SeriesError, FileNotFoundError, json.JSONDecodeError) as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except (InfeasibleError, GarchFitError, HarnessError, FloatingPointError, np.linalg.LinAlgError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
