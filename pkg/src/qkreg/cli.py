"""Command-line entry point: ``qkreg {integrate,kernel-check,estimate,theory,experiment}``.

Exit codes: 0 success, 1 runtime failure (including failed checks), 2 usage
or configuration error.
"""

from __future__ import annotations

import argparse
import math
import sys

import numpy as np

from .errors import QKernelError
from .estim import (
    EstimatorConfig,
    Sample,
    default_bandwidth,
    default_floor,
    default_grid,
    estimate_regression,
    write_estimates_csv,
)
from .kernels import GAUSSIAN, POLY, kernel_moment, make_kernel, poly_norm_const
from .models import MODELS, get_model
from .qcalc import jackson_integral
from .qcore import SeriesPolicy
from .sim import ConfigError, ExperimentConfig, run_experiment, write_report
from . import theory

DEFAULT_Q = 0.9
DEFAULT_TOL = 1e-12

FUNCTIONS = {
    "x": lambda x: x,
    "x2": lambda x: x * x,
    "x3": lambda x: x**3,
    "sin": np.sin,
    "const1": lambda x: np.ones_like(np.asarray(x, dtype=float)),
}


class UsageError(Exception):
    pass


def _grid_spec(text: str):
    try:
        lo, hi, count = text.split(":")
        lo, hi, count = float(lo), float(hi), int(count)
    except ValueError:
        raise argparse.ArgumentTypeError(f"grid must look like lo:hi:count, got {text!r}") from None
    if count < 1 or (count > 1 and not hi > lo):
        raise argparse.ArgumentTypeError("grid needs count >= 1 and lo < hi")
    return np.linspace(lo, hi, count)


def _policy(args, max_terms=None):
    q = args.q
    terms = max_terms or max(10_000, int(50.0 / (1.0 - q)) if 0 < q < 1 else 10_000)
    return SeriesPolicy(tol=args.tol, max_terms=terms)


def _kernel(args):
    return make_kernel(args.kernel, args.q, args.p, _policy(args))


def cmd_integrate(args) -> int:
    if args.name not in FUNCTIONS:
        raise UsageError(f"unknown function {args.name!r}; choose from {', '.join(sorted(FUNCTIONS))}")
    if args.q_pos is not None:
        args.q = args.q_pos
    res = jackson_integral(FUNCTIONS[args.name], args.a, args.b, args.q, _policy(args))
    print(repr(res.value))
    print(f"terms_used {res.terms_used}")
    print(f"truncation_complete {str(res.truncation_complete).lower()}")
    return 0


def cmd_kernel_check(args) -> int:
    k = _kernel(args)
    mass = kernel_moment(k, 0, 1)
    odd = [kernel_moment(k, 1, m) for m in (1, 2, 3)]
    print(f"kernel {k.name} q={k.q.q!r}")
    print(f"norm_const {k.norm_const!r}")
    print(f"sup_bound {k.sup_bound!r}")
    print(f"mass {mass!r}")
    for m, v in zip((1, 2, 3), odd):
        print(f"odd_moment_m{m} {v!r}")
    print(f"moment2 {k.moment2!r}")
    print(f"square_integral {k.square_integral!r}")
    print(f"cube_integral {k.cube_integral!r}")
    ok = abs(mass - 1.0) < 1e-8 and all(abs(v) < 1e-10 for v in odd)
    if k.kind == POLY:
        brute = 2.0 * jackson_integral(
            lambda u: (1.0 - k.q.q**2 * u * u) ** k.p, 0.0, 1.0, k.q, k.policy
        ).value
        closed = poly_norm_const(k.p, k.q)
        print(f"closed_form_vs_jackson {abs(closed - brute)!r}")
        ok = ok and abs(closed - brute) < 1e-10
    print("PASS" if ok else "FAIL")
    return 0 if ok else 1


def cmd_estimate(args) -> int:
    sample = Sample.from_csv(args.input)
    h = args.h if args.h is not None else default_bandwidth(sample.n)
    b = args.b if args.b is not None else default_floor(sample.n)
    grid = args.grid if args.grid is not None else default_grid(sample.xs)
    est = estimate_regression(sample, EstimatorConfig(_kernel(args), h, b, grid))
    if args.out:
        write_estimates_csv(args.out, est)
    else:
        _print_estimates(est)
    return 0


def _print_estimates(est):
    print("grid,f_hat,g_hat,r_hat,floored")
    for row in zip(est.grid, est.f_hat, est.g_hat, est.r_hat, est.floored_mask):
        print(",".join([repr(float(v)) for v in row[:4]] + [str(int(row[4]))]))


def cmd_theory(args) -> int:
    model = get_model(args.model)
    k = _kernel(args)
    h = args.h if args.h is not None else default_bandwidth(args.n)
    grid = args.grid if args.grid is not None else np.linspace(-1.5, 1.5, 7)
    report = theory.theory_report(model, k, args.n, h, args.k, grid, args.c0, args.L)
    text = report.to_json()
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
    else:
        print(text)
    return 0


def cmd_experiment(args) -> int:
    cfg = ExperimentConfig.from_json(args.config)
    if args.seed is not None or args.workers is not None:
        d = cfg.to_dict()
        if args.seed is not None:
            d["seed"] = args.seed
        if args.workers is not None:
            d["workers"] = args.workers
        cfg = ExperimentConfig.from_dict(d)
    report = run_experiment(cfg)
    paths = write_report(report, args.out)
    passes = report.passes()
    for name in sorted(passes):
        detail = {k: v for k, v in report.summary["checks"][name].items() if k != "pass"}
        shown = " ".join(f"{k}={_short(v)}" for k, v in detail.items())
        print(f"{'PASS' if passes[name] else 'FAIL'} {name} {shown}")
    print(f"wrote {len(paths)} files to {args.out} (config hash {cfg.config_hash})")
    return 0 if all(passes.values()) else 1


def _short(v):
    if isinstance(v, float):
        return f"{v:.4g}" if math.isfinite(v) else "nan"
    if isinstance(v, dict):
        return "{" + ",".join(f"{k}:{_short(x)}" for k, x in v.items()) + "}"
    return str(v)


def _add_common(p, with_kernel=True):
    p.add_argument("--q", type=float, default=DEFAULT_Q, help=f"deformation parameter in (0, 1) (default {DEFAULT_Q})")
    p.add_argument("--tol", type=float, default=DEFAULT_TOL, help=f"series truncation tolerance (default {DEFAULT_TOL:g})")
    if with_kernel:
        p.add_argument("--kernel", choices=[GAUSSIAN, POLY], default=POLY, help="kernel family (default poly)")
        p.add_argument("--p", type=int, default=1, help="index of the polynomial kernel (default 1)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qkreg", description="q-kernel regression toolkit")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("integrate", help="Jackson integral of a built-in function")
    p.add_argument("name", help=f"function: one of {', '.join(sorted(FUNCTIONS))}")
    p.add_argument("a", type=float, help="lower limit")
    p.add_argument("b", type=float, help="upper limit")
    p.add_argument("q_pos", nargs="?", type=float, default=None, metavar="q", help="q (same as --q)")
    _add_common(p, with_kernel=False)
    p.set_defaults(func=cmd_integrate)

    p = sub.add_parser("kernel-check", help="verify normalization and moment identities of a kernel")
    _add_common(p)
    p.set_defaults(func=cmd_kernel_check)

    p = sub.add_parser("estimate", help="estimate f, g and r from a CSV sample with header x,y")
    p.add_argument("input", help="input CSV")
    _add_common(p)
    p.add_argument("--h", type=float, default=None, help="bandwidth (default n^(-1/5))")
    p.add_argument("--b", type=float, default=None, help="density floor (default max(1e-3, n^(-1/20)))")
    p.add_argument("--grid", type=_grid_spec, default=None, help="evaluation grid lo:hi:count (default 512 points over the data)")
    p.add_argument("--out", default=None, help="output CSV (default stdout)")
    p.set_defaults(func=cmd_estimate)

    p = sub.add_parser("theory", help="leading-order predictions for a named model")
    p.add_argument("--model", choices=sorted(MODELS), default="default", help="synthetic model (default 'default')")
    _add_common(p)
    p.add_argument("--n", type=int, default=4096, help="sample size (default 4096)")
    p.add_argument("--h", type=float, default=None, help="bandwidth (default n^(-1/5))")
    p.add_argument("--k", type=int, choices=[0, 1], default=1, help="Gamma_k index for the rate terms (default 1)")
    p.add_argument("--c0", type=float, default=theory.DEFAULT_C0, help="growth constant c0 (default 1)")
    p.add_argument("--L", type=float, default=theory.DEFAULT_L, help="rate constant L > sqrt(2[2]_q) (default 2)")
    p.add_argument("--grid", type=_grid_spec, default=None, help="evaluation grid lo:hi:count (default -1.5:1.5:7)")
    p.add_argument("--out", default=None, help="output JSON (default stdout)")
    p.set_defaults(func=cmd_theory)

    p = sub.add_parser("experiment", help="run a Monte Carlo experiment from a JSON config")
    p.add_argument("config", help="experiment config JSON")
    p.add_argument("--out", required=True, help="directory for the CSV tables and JSON summary")
    p.add_argument("--seed", type=int, default=None, help="override the config seed")
    p.add_argument("--workers", type=int, default=None, help="override the number of worker threads")
    p.set_defaults(func=cmd_experiment)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        parser.error(str(exc))
    except ConfigError as exc:
        print(f"qkreg: config error: {exc}", file=sys.stderr)
        return 2
    except (QKernelError, ArithmeticError, ValueError, OSError) as exc:
        print(f"qkreg: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
