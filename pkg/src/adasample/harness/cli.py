"""Command line entry point: ``adasample {run,sweep,compare,oracle}``.

Exit codes: 0 success, 1 usage error, 2 run failure (divergence or line
search), 3 I/O or input-file error.
"""

import argparse
import math
import os
import sys

import numpy as np

from ..control import ControlConfig, TestKind
from ..errors import AdaSampleError, LibsvmParseError
from ..linesearch import LineSearchConfig
from ..objective import LogisticL2, MeanSquareCenters, batch_gradient
from ..optimizer import RunConfig, run
from ..oracle import curvature_bounds, oracle_report, reference_optimum
from ..rng import ORACLE, RngStream, sample_without_replacement
from . import traces
from .data import gen_synthetic, parse_libsvm
from .plots import emit_plots

EXIT_OK, EXIT_USAGE, EXIT_RUN, EXIT_IO = 0, 1, 2, 3

SWEEP_EXPONENTS = range(-10, 16)
TEST_NAMES = {"ip": TestKind.AUGMENTED, "norm": TestKind.NORM}
BOOL_KEYS = {"line_search", "plots"}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _synthetic_arg(text):
    parts = text.split(",")
    if len(parts) != 4:
        raise argparse.ArgumentTypeError("expected N,d,flip,seed")
    try:
        return int(parts[0]), int(parts[1]), float(parts[2]), int(parts[3])
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad --synthetic value {text!r}") from None


def _common(p):
    g = p.add_argument_group("data")
    g.add_argument("--dataset", help="LIBSVM file")
    g.add_argument("--synthetic", type=_synthetic_arg, metavar="N,d,flip,seed")
    g.add_argument("--n-features", type=int, help="override d for LIBSVM input")
    g.add_argument("--objective", choices=["logistic", "centers"], default="logistic",
                   help="centers: quadratic with the feature rows as centers")
    g.add_argument("--lam", type=float, help="l2 weight (default 1/N)")
    t = p.add_argument_group("sample-size control")
    t.add_argument("--test", choices=sorted(TEST_NAMES), default="ip")
    t.add_argument("--theta", type=float, default=0.9)
    t.add_argument("--nu", type=float, default=5.84)
    t.add_argument("--r", type=int, default=10)
    t.add_argument("--omega", type=float, default=10.0)
    t.add_argument("--gamma", type=float)
    t.add_argument("--s0", type=int, default=2)
    s = p.add_argument_group("steplength")
    s.add_argument("--alpha", type=float, help="fixed steplength")
    s.add_argument("--line-search", action="store_true")
    s.add_argument("--l0", type=float, default=1.0)
    s.add_argument("--eta", type=float, default=1.5)
    r = p.add_argument_group("run")
    r.add_argument("--max-epochs", type=float, default=100.0)
    r.add_argument("--tol", type=float, default=1e-6)
    r.add_argument("--seed", type=int, default=0)
    r.add_argument("--out", default="out")
    r.add_argument("--plots", action="store_true")
    r.add_argument("--rstar-tol", type=float, default=1e-8)
    r.add_argument("--trace-diagnostics-every", type=int, default=1)
    r.add_argument("--config", help="key=value file; flags take precedence")


def build_parser():
    parser = _Parser(prog="adasample", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    p = sub.add_parser("run", help="one run, writes trace.csv and iterates.csv")
    _common(p)
    p = sub.add_parser("sweep", help="fixed-step sweep over alpha = 2^-10 .. 2^15")
    _common(p)
    p = sub.add_parser("compare", help="inner product vs norm test on the same seed")
    _common(p)
    p = sub.add_parser("oracle", help="population diagnostics along saved iterates")
    _common(p)
    p.add_argument("--iterates", required=True, help="iterates.csv written by run")
    return parser


def read_config(path):
    values = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            key, sep, val = line.partition("=")
            if not sep:
                raise UsageError(f"{path}:{lineno}: expected key=value")
            values[key.strip().replace("-", "_")] = val.strip()
    return values


def parse_args(argv):
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.config is None:
        return args
    try:
        cfg = read_config(args.config)
    except OSError as exc:
        raise OSError(f"cannot read config {args.config}: {exc}") from exc
    known = vars(args)
    for key in cfg:
        if key not in known or key in ("command", "config"):
            raise UsageError(f"unknown config key {key!r}")
    defaults = {}
    for key, val in cfg.items():
        if key in BOOL_KEYS:
            defaults[key] = val.lower() in ("1", "true", "yes", "on")
        else:
            defaults[key] = val
    sub = parser._subparsers._group_actions[0].choices[args.command]
    sub.set_defaults(**defaults)
    return parser.parse_args(argv)


def load_problem(args):
    if (args.dataset is None) == (args.synthetic is None):
        raise UsageError("give exactly one of --dataset and --synthetic")
    if args.dataset is not None:
        ds = parse_libsvm(args.dataset, n_features=args.n_features)
    else:
        n, d, flip, seed = args.synthetic
        ds = gen_synthetic(n, d, flip, seed)
    if args.objective == "centers":
        return MeanSquareCenters.from_dataset(ds), ds
    return LogisticL2(args.lam), ds


def make_config(args, test=None, alpha=None):
    if args.alpha is not None and args.line_search:
        raise UsageError("--alpha and --line-search are mutually exclusive")
    control = ControlConfig(
        theta=args.theta, nu=args.nu, r=args.r, omega=args.omega, gamma=args.gamma,
        s0=args.s0, test_kind=TEST_NAMES[test or args.test],
    )
    alpha = alpha if alpha is not None else args.alpha
    ls = None if alpha is not None else LineSearchConfig(l0=args.l0, eta=args.eta)
    return RunConfig(
        control=control, linesearch=ls, alpha=alpha, max_epochs=args.max_epochs,
        tol_grad_inf=args.tol, seed=args.seed, diagnostics_every=args.trace_diagnostics_every,
        rstar_tol=args.rstar_tol, record_iterates=True,
    )


def _say(msg):
    print(msg, flush=True)


def cmd_run(args):
    spec, ds = load_problem(args)
    config = make_config(args)
    os.makedirs(args.out, exist_ok=True)
    res = run(spec, ds, config)
    traces.write_trace(os.path.join(args.out, "trace.csv"), res.trace)
    traces.write_iterates(os.path.join(args.out, "iterates.csv"), res.iterates)
    if args.plots and res.trace:
        emit_plots({args.test: res.trace}, args.out)
    _say(f"reason={res.reason} iterations={len(res.trace)} eff_evals={res.eff_evals:.6g} "
         f"f_error={res.f_error:.6g} grad_inf={res.grad_inf:.6g}")
    return EXIT_OK


def best_alpha(rows):
    """Alpha with the smallest final f_error; ties go to the larger alpha."""
    finite = [r for r in rows if math.isfinite(r["f_error"])]
    if not finite:
        return None
    return min(finite, key=lambda r: (r["f_error"], -r["alpha"]))["alpha"]


def cmd_sweep(args):
    spec, ds = load_problem(args)
    os.makedirs(args.out, exist_ok=True)
    r_star = reference_optimum(spec, ds, tol=args.rstar_tol)[1]
    rows, kept = [], {}
    for e in SWEEP_EXPONENTS:
        alpha = 2.0**e
        config = make_config(args, alpha=alpha)
        config.record_iterates = False
        try:
            res = run(spec, ds, config, r_star=r_star)
            rows.append(dict(alpha=alpha, status=res.reason, f_error=res.f_error,
                             eff_evals=res.eff_evals, iterations=len(res.trace)))
            kept[alpha] = res.trace
        except AdaSampleError as exc:
            rows.append(dict(alpha=alpha, status=type(exc).__name__, f_error=math.inf,
                             eff_evals=math.nan, iterations=0))
    best = best_alpha(rows)
    traces.write_rows(
        os.path.join(args.out, "sweep_summary.csv"),
        ["alpha", "status", "f_error", "eff_evals", "iterations", "best"],
        [(r["alpha"], r["status"], r["f_error"], r["eff_evals"], r["iterations"],
          r["alpha"] == best) for r in rows],
    )
    if best is None:
        _say("every steplength failed")
        return EXIT_RUN
    traces.write_trace(os.path.join(args.out, "trace_best.csv"), kept[best])
    if args.plots and kept[best]:
        emit_plots({f"alpha={best:g}": kept[best]}, args.out, prefix="best_")
    _say(f"best_alpha={best:g}")
    return EXIT_OK


def evals_to_reach(trace, level):
    for rec in trace:
        if math.isfinite(rec.f_error) and rec.f_error <= level:
            return rec.eff_evals
    return math.inf


def cmd_compare(args):
    spec, ds = load_problem(args)
    os.makedirs(args.out, exist_ok=True)
    r_star = reference_optimum(spec, ds, tol=args.rstar_tol)[1]
    results = {}
    for name in ("ip", "norm"):
        config = make_config(args, test=name)
        config.record_iterates = False
        results[name] = run(spec, ds, config, r_star=r_star)
        traces.write_trace(os.path.join(args.out, f"trace_{name}.csv"), results[name].trace)
    traces.write_rows(
        os.path.join(args.out, "compare_summary.csv"),
        ["test", "reason", "iterations", "eff_evals", "final_sample_size", "evals_to_1e-4",
         "f_error", "grad_inf"],
        [(name, r.reason, len(r.trace), r.eff_evals,
          r.trace[-1].sample_size if r.trace else 0, evals_to_reach(r.trace, 1e-4),
          r.f_error, r.grad_inf) for name, r in results.items()],
    )
    if args.plots and all(r.trace for r in results.values()):
        emit_plots({name: r.trace for name, r in results.items()}, args.out)
    for name, r in results.items():
        _say(f"{name}: reason={r.reason} eff_evals={r.eff_evals:.6g} "
             f"evals_to_1e-4={evals_to_reach(r.trace, 1e-4):.6g}")
    return EXIT_OK


def cmd_oracle(args):
    spec, ds = load_problem(args)
    os.makedirs(args.out, exist_ok=True)
    iterates = traces.read_iterates(args.iterates)
    mu, lip = curvature_bounds(spec, ds)
    stream = RngStream(args.seed).substream(ORACLE)
    rows = []
    for k, m, x in iterates:
        if x.shape != (ds.n_features,):
            raise UsageError(f"iterate {k} has dimension {x.size}, dataset has {ds.n_features}")
        m = min(max(m, 1), ds.n_samples)
        S = np.sort(sample_without_replacement(stream.substream(k), ds.n_samples, m))
        g = batch_gradient(spec, ds, x, S).batch_mean
        try:
            rep = oracle_report(spec, ds, x, args.theta, args.nu, m, sampled_gradient=g,
                                mu=mu, l=lip)
        except AdaSampleError:
            continue
        rows.append((k, m, rep.beta, rep.s_min_inner, rep.s_min_norm, rep.angle_deg,
                     rep.exact_ip_lhs, rep.exact_orth_lhs, rep.exact_norm_lhs, rep.rho,
                     rep.tan_bound))
    traces.write_rows(os.path.join(args.out, "oracle.csv"), traces.ORACLE_COLUMNS, rows)
    _say(f"oracle rows={len(rows)}")
    return EXIT_OK


COMMANDS = {"run": cmd_run, "sweep": cmd_sweep, "compare": cmd_compare, "oracle": cmd_oracle}


def main(argv=None):
    try:
        args = parse_args(argv)
        return COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"adasample: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (LibsvmParseError, OSError) as exc:
        print(f"adasample: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except AdaSampleError as exc:
        print(f"adasample: run failed: {exc}", file=sys.stderr)
        return EXIT_RUN
    except ValueError as exc:
        print(f"adasample: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
