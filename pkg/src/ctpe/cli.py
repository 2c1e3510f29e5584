"""Command-line experiment harness.

Subcommands:
  train <config>                 one seed through the reference training loop
  sweep <config>                 multi-seed sweep, CSV out, rate fit
  limits <config>                Monte-Carlo limits and trace diagnostics
  check <suite> <config>         diagnostic suite (moments|limits|variances|rg)
  rates <csv> [--window LO HI]   fit a slope on an existing curve
  plot <csv> <out.svg>           render a curve, optional slope guide

Exit codes: 0 on success, 2 when the only failures were diverged seeds,
1 on any other error.  ``CTPE_THREADS`` bounds the sweep worker pool.
"""

import argparse
import sys

import numpy as np

from .checks import SUITES, run_suite
from .config import ExperimentConfig
from .experiment import (build_experiment, read_curve_csv, run_experiment,
                         write_curve_csv)
from .learn import DivergenceError, train
from .oracle import estimate_limits, trace_diagnostics
from .ratefit import fit_rate
from .streams import RngStream
from .svgplot import plot_curve_svg

__all__ = ["main"]


def _load_config(path: str) -> ExperimentConfig:
    with open(path) as fh:
        return ExperimentConfig.from_text(fh.read())


def _cmd_train(args) -> int:
    cfg = _load_config(args.config)
    model, phi, lcfg, (theta_ref, ell, theta0) = build_experiment(cfg)
    if cfg.metric == "param_mse":
        metric = lambda st: float(np.sum((st.theta - theta_ref) ** 2))  # noqa: E731
    else:
        def metric(st):
            d = (st.theta_bar if lcfg.averaging else st.theta) - theta_ref
            return float(d @ ell @ d)
    stream = RngStream(cfg.master_seed).child(0)
    try:
        state = train(model, phi, lcfg, cfg.dt, cfg.mode, stream, cfg.k_max,
                      metric=metric, log_every=cfg.log_every, theta0=theta0,
                      n_sub=cfg.n_sub, burn_in=cfg.burn_in)
    except DivergenceError as exc:
        print(f"train: {exc}", file=sys.stderr)
        return 2
    rows = [(k, m, 0.0, 1) for k, m in state.error_log]
    out = args.out or cfg.out_csv
    if out:
        write_curve_csv(rows, out)
        print(f"wrote {out} ({len(rows)} rows)")
    else:
        for k, m, *_ in rows:
            print(f"k={k} metric={m:.6e}")
    print(f"final theta: {np.array2string(state.theta, precision=6)}")
    return 0


def _cmd_sweep(args) -> int:
    cfg = _load_config(args.config)
    if args.out:
        cfg = ExperimentConfig.from_mapping({**cfg.to_mapping(), "out.csv": args.out})
    res = run_experiment(cfg)
    tail = res.rows[-1]
    print(f"sweep: {cfg.seeds} seeds, k_max={cfg.k_max}, "
          f"final mean metric {tail[1]:.6e} ({tail[3]} seeds ok)")
    if res.fit is not None:
        print(f"rate fit: slope {res.fit.slope:+.4f} over k in "
              f"[{res.fit.window[0]:g}, {res.fit.window[1]:g}] "
              f"(r^2 {res.fit.r_squared:.4f}, {res.fit.n_points} points)")
    if cfg.out_csv:
        print(f"wrote {cfg.out_csv}")
    if res.n_diverged:
        print(f"warning: {res.n_diverged} seed(s) diverged", file=sys.stderr)
        return 2
    return 0


def _cmd_limits(args) -> int:
    cfg = _load_config(args.config)
    model, phi, _, _ = build_experiment(cfg)
    stream = RngStream(cfg.master_seed).child(900)
    lim = estimate_limits(model, phi, max(cfg.k_max, 10**5), stream)
    np.set_printoptions(precision=6, suppress=True)
    print(f"n_samples = {lim.n_samples}")
    print(f"H =\n{lim.H}")
    print(f"se(H) =\n{lim.se_H}")
    print(f"b_vec = {lim.b_vec} (se {lim.se_b})")
    print(f"theta* = {lim.theta_star} (se {lim.se_theta})")
    print(f"eig(S) = {np.linalg.eigvalsh(lim.S)}")
    rep = trace_diagnostics(lim, model=model)
    print(f"tr(H H^-T) = {rep.tr_h_hinv_t:.6f}, tr(S) = {rep.tr_s:.6f}")
    print(f"eig(H) = {rep.eig_h}")
    if rep.spectral_bound is not None:
        print(f"spectral cone |Im| <= {rep.spectral_bound:.4f} Re: "
              f"{'satisfied' if rep.spectral_ok else 'violated'}")
    return 0


def _cmd_check(args) -> int:
    cfg = _load_config(args.config)
    model, phi, _, _ = build_experiment(cfg)
    stream = RngStream(cfg.master_seed).child(905)
    report = run_suite(args.suite, model, phi, stream)
    print(report)
    return 0


def _cmd_rates(args) -> int:
    rows = read_curve_csv(args.csv)
    window = tuple(args.window) if args.window else None
    fit = fit_rate([r[0] for r in rows], [r[1] for r in rows], window)
    print(f"slope {fit.slope:+.6f}  intercept {fit.intercept:+.6f}  "
          f"r^2 {fit.r_squared:.6f}  window [{fit.window[0]:g}, {fit.window[1]:g}]"
          f"  n={fit.n_points}")
    return 0


def _cmd_plot(args) -> int:
    rows = read_curve_csv(args.csv)
    slope = args.slope
    if slope is None and args.window:
        slope = fit_rate([r[0] for r in rows], [r[1] for r in rows],
                         tuple(args.window)).slope
    plot_curve_svg(rows, args.out, title=args.title or args.csv,
                   guide_slope=slope)
    print(f"wrote {args.out}")
    return 0


class _Parser(argparse.ArgumentParser):
    # usage errors exit 1; code 2 is reserved for divergence-only failures
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def main(argv=None) -> int:
    parser = _Parser(prog="ctpe", description=__doc__,
                     formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("train", help="single-seed training run")
    p.add_argument("config")
    p.add_argument("--out", help="CSV output path (overrides out.csv)")
    p.set_defaults(func=_cmd_train)

    p = sub.add_parser("sweep", help="multi-seed sweep with CSV output")
    p.add_argument("config")
    p.add_argument("--out", help="CSV output path (overrides out.csv)")
    p.set_defaults(func=_cmd_sweep)

    p = sub.add_parser("limits", help="Monte-Carlo limit estimates")
    p.add_argument("config")
    p.set_defaults(func=_cmd_limits)

    p = sub.add_parser("check", help="run a diagnostic suite")
    p.add_argument("suite", choices=sorted(SUITES))
    p.add_argument("config")
    p.set_defaults(func=_cmd_check)

    p = sub.add_parser("rates", help="fit a log-log slope on a curve CSV")
    p.add_argument("csv")
    p.add_argument("--window", nargs=2, type=float, metavar=("K_LO", "K_HI"))
    p.set_defaults(func=_cmd_rates)

    p = sub.add_parser("plot", help="render a curve CSV as SVG")
    p.add_argument("csv")
    p.add_argument("out")
    p.add_argument("--slope", type=float, help="guide-line slope")
    p.add_argument("--window", nargs=2, type=float, metavar=("K_LO", "K_HI"),
                   help="fit the guide slope over this window")
    p.add_argument("--title")
    p.set_defaults(func=_cmd_plot)

    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, OSError, np.linalg.LinAlgError, RuntimeError) as exc:
        print(f"ctpe {args.command}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
