"""Command-line interface: one subcommand per dataset, CSV or JSON out.

Exit codes: 0 success, 2 invalid input, 3 convergence or resource failure.
"""
from __future__ import annotations

import argparse
import contextlib
import csv
import io
import json
import math
import sys
from decimal import Decimal, localcontext
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from . import __version__
from .curve import build_polyline, holder_frequency, holder_slope_estimate, max_generation
from .dynamics import LAMBDA_MAX, LAMBDA_MIN, SymbolicPoint, classify
from .errors import ComputationError, KochError, ValidationError
from .estimators import monte_carlo_typical
from .measure import (
    alpha_lebesgue,
    alpha_min,
    local_dim_frequency,
    mass_of_interval,
    solve_params,
    spectrum_F,
    spectrum_validity,
    tau,
    tau_prime,
)

KOCH_LAMBDA = math.sqrt(3.0) / 6.0

EXIT_OK, EXIT_INVALID, EXIT_COMPUTE = 0, 2, 3


class CliError(Exception):
    def __init__(self, code: int, message: str):
        super().__init__(message)
        self.code = code


def parse_lambda(text: str) -> float:
    """``"koch"``, a decimal or ``"p/q"``; must lie in ``(1/6, 5/6)``."""
    text = text.strip()
    if text.lower() == "koch":
        return KOCH_LAMBDA
    try:
        value = float(Fraction(text))
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"cannot parse {text!r} (use a number, p/q or 'koch')")
    if not LAMBDA_MIN < value < LAMBDA_MAX:
        raise argparse.ArgumentTypeError(f"{text} is outside the open interval (1/6, 5/6)")
    return value


def parse_rational(text: str) -> Fraction:
    try:
        return Fraction(text.strip())
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"cannot parse {text!r} as an exact rational")


def parse_range(text: str) -> tuple[float, float, int]:
    """``lo,hi,steps`` with ``steps >= 1``."""
    parts = text.split(",")
    try:
        lo, hi, steps = float(parts[0]), float(parts[1]), int(parts[2])
    except (IndexError, ValueError):
        raise argparse.ArgumentTypeError(f"expected lo,hi,steps, got {text!r}")
    if len(parts) != 3 or steps < 1 or not (math.isfinite(lo) and math.isfinite(hi)) or hi < lo:
        raise argparse.ArgumentTypeError(f"expected lo,hi,steps with lo <= hi and steps >= 1, got {text!r}")
    return lo, hi, steps


def parse_point(text: str) -> SymbolicPoint:
    try:
        return SymbolicPoint.parse(text)
    except (ValueError, TypeError) as exc:
        raise argparse.ArgumentTypeError(str(exc))


def _positive(kind):
    def parse(text: str):
        try:
            value = kind(text)
        except ValueError:
            raise argparse.ArgumentTypeError(f"invalid {kind.__name__} {text!r}")
        if not value > 0:
            raise argparse.ArgumentTypeError(f"must be positive, got {text}")
        return value

    return parse


def _at_least(lo: int):
    def parse(text: str) -> int:
        try:
            value = int(text)
        except ValueError:
            raise argparse.ArgumentTypeError(f"invalid int {text!r}")
        if value < lo:
            raise argparse.ArgumentTypeError(f"must be >= {lo}, got {text}")
        return value

    return parse


def _nonnegative_int(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid int {text!r}")
    if value < 0:
        raise argparse.ArgumentTypeError(f"must be >= 0, got {text}")
    return value


def _linspace(lo: float, hi: float, steps: int) -> list[float]:
    return [lo] if steps == 1 else np.linspace(lo, hi, steps).tolist()


# ---------------------------------------------------------------- output


class Formatter:
    def __init__(self, precision: int, exact: bool):
        self.precision = precision
        self.exact = exact

    def rational(self, x: Fraction) -> str:
        if self.exact:
            return f"{x.numerator}/{x.denominator}"
        with localcontext() as ctx:
            ctx.prec = self.precision
            d = Decimal(x.numerator) / Decimal(x.denominator)
        return format(d, "f")

    def number(self, v) -> str:
        if isinstance(v, (bool, str)):
            return str(v)
        if isinstance(v, (int, np.integer)):
            return str(int(v))
        return format(float(v), f".{self.precision}g")


def _json_value(v):
    if isinstance(v, (np.floating, float)):
        v = float(v)
        return v if math.isfinite(v) else None
    if isinstance(v, np.integer):
        return int(v)
    return v


def emit(
    rows: Sequence[dict], meta: dict, args: argparse.Namespace, fmt: Formatter, stream
) -> None:
    if args.format == "json":
        doc = {
            "meta": {k: _json_value(v) for k, v in meta.items()},
            "rows": [{k: _json_value(v) for k, v in r.items()} for r in rows],
        }
        json.dump(doc, stream, allow_nan=False, indent=1)
        stream.write("\n")
        return
    fields = list(rows[0].keys()) if rows else []
    writer = csv.writer(stream, lineterminator="\r\n")
    writer.writerow(fields)
    for r in rows:
        writer.writerow([fmt.number(r[k]) for k in fields])


# ---------------------------------------------------------------- commands


def cmd_curve(args, fmt):
    cap = max_generation()
    if args.gen > cap:
        raise CliError(EXIT_COMPUTE, f"--gen: generation {args.gen} exceeds the cap {cap} (KOCH_MAX_GEN)")
    poly = build_polyline(args.lam, args.gen)
    rows = [{"x": fmt.rational(x), "y": y} for x, y in poly.breakpoints()]
    return rows, {"command": "curve", "lambda": args.lam, "generation": args.gen}


def cmd_spectrum(args, fmt):
    lam = args.lam
    params = solve_params(lam)
    a_min, a_leb = alpha_min(lam), alpha_lebesgue(lam)
    lo, hi, steps = args.alpha_range or (a_min, 1.0, 101)
    flag = spectrum_validity(lam)
    landmarks = {a_min: "alpha_min", a_leb: "alpha_L", 1.0: "alpha_max"}
    alphas = {a: "" for a in _linspace(lo, hi, steps) if a_min <= a <= 1.0}
    for a, name in landmarks.items():
        if lo <= a <= hi:
            alphas[a] = name
    rows = [
        {"alpha": a, "d_F": spectrum_F(lam, a, params), "flag": flag, "landmark": alphas[a]}
        for a in sorted(alphas)
    ]
    meta = {
        "command": "spectrum",
        "lambda": lam,
        "gamma": params.gamma,
        "alpha_min": a_min,
        "alpha_L": a_leb,
        "validity": flag,
    }
    return rows, meta


def cmd_tau(args, fmt):
    params = solve_params(args.lam)
    qs = [args.q] if args.q is not None else _linspace(*(args.q_range or (-10.0, 10.0, 41)))
    rows = []
    for q in qs:
        t = tau(params, q)
        a = tau_prime(params, q)
        rows.append({"q": q, "tau": t, "alpha": a, "tau_star": q * a - t})
    return rows, {"command": "tau", "lambda": args.lam, "gamma": params.gamma}


def cmd_holder(args, fmt):
    p = args.point
    try:
        p.require_period()
    except ValueError as exc:
        raise CliError(EXIT_INVALID, f"--point: {exc}")
    h, validity = holder_frequency(args.lam, p)
    params = solve_params(args.lam)
    row = {
        "point": str(p),
        "class": classify(p).tag.name,
        "h": h,
        "validity": validity.value,
        "slope_estimate": holder_slope_estimate(args.lam, p.digits(args.depth)),
        "local_dim": local_dim_frequency(params, p),
    }
    return [row], {"command": "holder", "lambda": args.lam, "depth": args.depth}


def cmd_mass(args, fmt):
    a, b = args.a, args.b
    if not 0 <= a < b <= 1:
        raise CliError(EXIT_INVALID, f"--a/--b: need 0 <= a < b <= 1, got a={a}, b={b}")
    params = solve_params(args.lam)
    mass, err = mass_of_interval(params, a, b, args.tol)
    row = {"a": fmt.rational(a), "b": fmt.rational(b), "mass": mass, "err": err}
    return [row], {"command": "mass", "lambda": args.lam, "tol": args.tol}


def cmd_mc(args, fmt):
    params = solve_params(args.lam)
    report = monte_carlo_typical(params, args.samples, args.depth, args.seed, workers=args.workers)
    row = report.as_dict()
    row["alpha_L"] = alpha_lebesgue(args.lam)
    return [row], {"command": "mc", "lambda": args.lam, "seed": args.seed}


COMMANDS = {
    "curve": cmd_curve,
    "spectrum": cmd_spectrum,
    "tau": cmd_tau,
    "holder": cmd_holder,
    "mass": cmd_mass,
    "mc": cmd_mc,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--lambda", dest="lam", type=parse_lambda, default=KOCH_LAMBDA,
                        help="parameter in (1/6, 5/6): number, p/q or 'koch' (default)")
    common.add_argument("--format", choices=("csv", "json"), default="csv")
    common.add_argument("--out", help="output file (default: stdout)")
    common.add_argument("--precision", type=_positive(int), default=17,
                        help="significant digits for CSV numbers and decimal x")
    common.add_argument("--exact", action="store_true", help="emit rationals as num/den")

    parser = argparse.ArgumentParser(prog="vonkoch", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("curve", parents=[common], help="breakpoints of F_n")
    p.add_argument("--gen", type=_nonnegative_int, default=3)

    p = sub.add_parser("spectrum", parents=[common], help="multifractal spectrum d_F")
    p.add_argument("--alpha-range", type=parse_range, help="lo,hi,steps (default alpha_min,1,101)")

    p = sub.add_parser("tau", parents=[common], help="L^q spectrum samples")
    g = p.add_mutually_exclusive_group()
    g.add_argument("--q", type=float)
    g.add_argument("--q-range", type=parse_range, help="lo,hi,steps (default -10,10,41); write --q-range=-5,5,11 for a negative lo")

    p = sub.add_parser("holder", parents=[common], help="pointwise exponent of a periodic point")
    p.add_argument("--point", type=parse_point, required=True, help='e.g. "pre:2,per:1"')
    p.add_argument("--depth", type=_at_least(10), default=400, help="digits used by the slope estimate (>= 10)")

    p = sub.add_parser("mass", parents=[common], help="measure of an interval")
    p.add_argument("--a", type=parse_rational, default=Fraction(0))
    p.add_argument("--b", type=parse_rational, default=Fraction(1))
    p.add_argument("--tol", type=_positive(float), default=1e-9)

    p = sub.add_parser("mc", parents=[common], help="Monte-Carlo typical-point statistics")
    p.add_argument("--samples", type=_positive(int), default=10_000)
    p.add_argument("--depth", type=_positive(int), default=1000)
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--workers", type=_positive(int), default=1)
    return parser


def run(argv: Iterable[str] | None = None, stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    parser = build_parser()
    try:
        with contextlib.redirect_stdout(stdout), contextlib.redirect_stderr(stderr):
            args = parser.parse_args(None if argv is None else list(argv))
    except SystemExit as exc:
        return int(exc.code or 0)
    fmt = Formatter(args.precision, args.exact)
    try:
        rows, meta = COMMANDS[args.command](args, fmt)
    except CliError as exc:
        print(f"vonkoch {args.command}: error: {exc}", file=stderr)
        return exc.code
    except ValidationError as exc:
        print(f"vonkoch {args.command}: error: {exc}", file=stderr)
        return EXIT_INVALID
    except (ComputationError, KochError) as exc:
        print(f"vonkoch {args.command}: error: {exc}", file=stderr)
        return EXIT_COMPUTE
    if args.out:
        with open(args.out, "w", newline="", encoding="utf-8") as fh:
            emit(rows, meta, args, fmt, fh)
    else:
        buf = io.StringIO(newline="")
        emit(rows, meta, args, fmt, buf)
        stdout.write(buf.getvalue())
    return EXIT_OK


def main(argv: Iterable[str] | None = None) -> None:
    sys.exit(run(argv))
