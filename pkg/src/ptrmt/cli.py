"""Command-line front end: ``ptrmt {sample,pdf,verify,fit,hist}``.

Exit codes: 0 success, 1 invalid configuration, 2 I/O failure,
3 verification failure, 4 insufficient data.
"""

from __future__ import annotations

import argparse
import contextlib
import json
import os
import sys

import numpy as np

from ptrmt import analytic
from ptrmt.core import Bounded, InvalidParameterError, MatrixParams, Unbounded, spacings
from ptrmt.sampling import sample_batch

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_IO = 2
EXIT_VERIFY = 3
EXIT_DATA = 4

CSV_HEADER = "x1,y1,x2,y2,sigma"
THREADS_ENV = "PT_RMT_THREADS"


class ConfigError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


def _add_ensemble_args(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("ensemble")
    g.add_argument("--ensemble", choices=("unbounded", "bounded"), required=True)
    g.add_argument("--alpha", type=float, default=None, help="Gaussian weight scale (unbounded, default 1)")
    g.add_argument("--l", type=int, default=None, help="integer exponent l (unbounded)")
    g.add_argument("--n", type=int, default=None, help="integer exponent n (unbounded)")
    g.add_argument("--m", type=int, default=None, help="integer exponent m (unbounded)")
    g.add_argument("--lambda0", type=float, default=None, help="separation constant (bounded)")
    g.add_argument("--lambda2", type=float, default=None, help="separation constant (bounded)")
    g.add_argument("--lambda3", type=float, default=None, help="separation constant (bounded)")


def _add_run_args(p: argparse.ArgumentParser, count: int, seed_required: bool = True) -> None:
    p.add_argument("--count", type=int, default=count, help=f"number of draws (default {count})")
    p.add_argument("--seed", type=int, required=seed_required)
    p.add_argument("--workers", type=int, default=1, help=f"sampling threads; ${THREADS_ENV} overrides")


def spec_from_args(args) -> Unbounded | Bounded:
    unbounded_flags = {"alpha": args.alpha, "l": args.l, "n": args.n, "m": args.m}
    bounded_flags = {"lambda0": args.lambda0, "lambda2": args.lambda2, "lambda3": args.lambda3}
    if args.ensemble == "unbounded":
        stray = [k for k, v in bounded_flags.items() if v is not None]
        if stray:
            raise ConfigError(f"--{stray[0]} only applies to --ensemble bounded")
        alpha = 1.0 if args.alpha is None else args.alpha
        l, n, m = (0 if v is None else v for v in (args.l, args.n, args.m))
        return Unbounded(alpha, (l, n, m))
    stray = [k for k, v in unbounded_flags.items() if v is not None]
    if stray:
        raise ConfigError(f"--{stray[0]} only applies to --ensemble unbounded")
    lam = tuple(0.0 if v is None else v for v in bounded_flags.values())
    return Bounded(lam)


def _workers(args) -> int:
    env = os.environ.get(THREADS_ENV)
    if env:
        try:
            w = int(env)
        except ValueError:
            raise ConfigError(f"{THREADS_ENV} must be an integer, got {env!r}") from None
    else:
        w = args.workers
    if w < 1:
        raise ConfigError("workers >= 1 violated")
    return w


def _check_count(count: int) -> None:
    if count < 0:
        raise ConfigError("count >= 0 violated")


@contextlib.contextmanager
def _open_out(path: str):
    if path == "-":
        yield sys.stdout
    else:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            yield fh


def write_sample_csv(params: np.ndarray, fh) -> None:
    table = np.column_stack([params, spacings(params)]) if len(params) else np.empty((0, 5))
    fh.write(CSV_HEADER + "\n")
    np.savetxt(fh, table, fmt="%.17g", delimiter=",", newline="\n")


def read_sample_csv(path: str) -> np.ndarray:
    """``sigma`` column of a file written by ``ptrmt sample``."""
    with open(path, encoding="utf-8") as fh:
        header = fh.readline().strip()
        if header != CSV_HEADER:
            raise ValueError(f"unexpected CSV header {header!r}")
        data = np.loadtxt(fh, delimiter=",", ndmin=2)
    return data[:, 4] if data.size else np.empty(0)


def cmd_sample(args) -> int:
    spec = spec_from_args(args)
    _check_count(args.count)
    batch = sample_batch(spec, args.count, args.seed, workers=_workers(args))
    with _open_out(args.output) as fh:
        if args.format == "csv":
            write_sample_csv(batch.params, fh)
        else:
            for row, s in zip(batch.params.tolist(), batch.spacings.tolist()):
                fh.write(json.dumps(dict(zip(CSV_HEADER.split(","), row + [s]))) + "\n")
    return EXIT_OK


def cmd_pdf(args) -> int:
    spec = spec_from_args(args)
    if args.spacing is not None:
        if args.spacing < 0:
            raise ConfigError("sigma >= 0 violated")
        value = analytic.spacing_pdf(args.spacing, spec)
    else:
        if args.point is None:
            raise ConfigError("one of --point or --spacing is required")
        p = MatrixParams(*args.point)
        if isinstance(spec, Unbounded):
            value = analytic.pdf_unbounded(p, spec.alpha, spec.exponents)
        else:
            value = analytic.pdf_bounded(p, spec.exponents)
    print(f"{float(value):.17g}")
    return EXIT_OK


def cmd_verify(args) -> int:
    from ptrmt.verify import VerifyConfig, verify_ensemble

    spec = spec_from_args(args)
    _check_count(args.count)
    cfg = VerifyConfig(window_quantile=args.window_quantile, bins=args.bins)
    reports = verify_ensemble(
        spec, args.count, args.seed, config=cfg, workers=_workers(args),
        published_reference=args.paper_formula,
    )
    with _open_out(args.output) as fh:
        for r in reports:
            fh.write(r.to_json() + "\n")
    return EXIT_OK if all(r.passed for r in reports) else EXIT_VERIFY


def cmd_fit(args) -> int:
    from ptrmt.verify import fit_exponent

    spec = spec_from_args(args)
    if args.input is not None:
        try:
            sp = read_sample_csv(args.input)
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
    else:
        if args.seed is None:
            raise ConfigError("--seed is required unless --input is given")
        _check_count(args.count)
        sp = sample_batch(spec, args.count, args.seed, workers=_workers(args)).spacings
    fit = fit_exponent(sp, window_quantile=args.window_quantile, bins=args.bins, min_samples=args.min_samples)
    result = {
        "nu_hat": fit.nu_hat,
        "std_error": fit.std_error,
        "window": list(fit.window),
        "prediction": analytic.repulsion_exponent(spec),
        "nu_plain": fit.nu_plain,
        "nu_cdf": fit.nu_cdf,
        "bins": fit.bins,
        "n": fit.n,
    }
    with _open_out(args.output) as fh:
        fh.write(json.dumps(result) + "\n")
    return EXIT_OK


def cmd_hist(args) -> int:
    from ptrmt.core import describe_spec
    from ptrmt.plotting import histogram_svg, spacing_histogram, write_histogram_csv

    spec = spec_from_args(args)
    _check_count(args.count)
    if args.count < 1:
        raise ConfigError("count >= 1 violated")
    if args.bins < 1:
        raise ConfigError("bins >= 1 violated")
    sp = sample_batch(spec, args.count, args.seed, workers=_workers(args)).spacings
    hist = spacing_histogram(sp, args.bins, spec)
    title = ", ".join(f"{k}={v}" for k, v in describe_spec(spec).items()) + f", n={args.count}"
    csv_path = args.csv or os.path.splitext(args.output)[0] + ".csv"
    with open(args.output, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(histogram_svg(hist, spec, title=title))
    with open(csv_path, "w", encoding="utf-8", newline="\n") as fh:
        write_histogram_csv(hist, fh)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="ptrmt", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("sample", help="draw matrices and write x1,y1,x2,y2,sigma rows")
    _add_ensemble_args(p)
    _add_run_args(p, count=1000)
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--output", default="-")
    p.set_defaults(func=cmd_sample)

    p = sub.add_parser("pdf", help="evaluate the matrix-element or spacing density")
    _add_ensemble_args(p)
    p.add_argument("--point", type=float, nargs=4, metavar=("X1", "Y1", "X2", "Y2"))
    p.add_argument("--spacing", type=float, default=None, metavar="SIGMA")
    p.set_defaults(func=cmd_pdf)

    for name, help_text, func in (
        ("verify", "run the verification suite; JSON lines, exit 3 on failure", cmd_verify),
        ("fit", "fit the small-spacing exponent", cmd_fit),
    ):
        p = sub.add_parser(name, help=help_text)
        _add_ensemble_args(p)
        _add_run_args(p, count=1_000_000, seed_required=(name == "verify"))
        p.add_argument("--bins", type=int, default=24)
        p.add_argument("--window-quantile", type=float, default=0.05)
        p.add_argument("--output", default="-")
        p.set_defaults(func=func)
        if name == "verify":
            p.add_argument("--paper-formula", action="store_true",
                           help="use the spacing density as originally printed as the reference")
        else:
            p.add_argument("--input", default=None, help="CSV written by 'ptrmt sample'")
            p.add_argument("--min-samples", type=int, default=100_000)

    p = sub.add_parser("hist", help="spacing histogram as SVG plus bin CSV")
    _add_ensemble_args(p)
    _add_run_args(p, count=1_000_000)
    p.add_argument("--bins", type=int, default=64)
    p.add_argument("--output", required=True, help="SVG path")
    p.add_argument("--csv", default=None, help="bin CSV path (default: SVG path with .csv)")
    p.set_defaults(func=cmd_hist)
    return parser


def main(argv=None) -> int:
    from ptrmt.verify import InsufficientDataError

    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, InvalidParameterError) as exc:
        print(f"ptrmt: error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except InsufficientDataError as exc:
        print(f"ptrmt: insufficient data: {exc}", file=sys.stderr)
        return EXIT_DATA
    except OSError as exc:
        print(f"ptrmt: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
