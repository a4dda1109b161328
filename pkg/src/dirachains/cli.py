"""Command-line front end.

Subcommands:

* ``pair``         pairing of a chain file with a form file
* ``norm``         two-sided norm table for derivative orders 0..r
* ``natural``      limit of the norm family with plateau detection
* ``oracle``       independent grid LP bound (n <= 2, grade <= 1)
* ``stokes``       boundary-vs-derivative residual series for a cell
* ``cauchy``       refinement-difference norm decay for a cell
* ``dipole-check`` randomized derivative/pairing duality suite

Exit codes: 0 success, 1 malformed input (diagnostic carries file and
line number), 2 certificate or identity validation failure.

All floating-point CSV fields use %.12g; single printed values use the
full float repr.  Given the same inputs, flags, and seed, output files
are byte-identical across runs.  Output files are written atomically.
"""

from __future__ import annotations

import argparse
import io
import math
import sys
from typing import Sequence

import numpy as np

from . import __version__
from .approx import cauchy_rate, fit_loglog_slope, stokes_residual
from .chains import DipoleChain, PointedChain, dipole_derivative, pair
from .exterior import KVector, index_sets
from .forms import FormSpec, lie_derivative
from .fileio import (
    ParseError,
    format_cell_decomposition,
    format_form,
    load_cell,
    load_chain,
    load_form,
    write_atomic,
)
from .norms import (
    check_lower_certificate,
    check_upper_certificate,
    natural_norm,
    norm_sandwich,
)
from .oracle import GridSpec, norm_oracle_grid

_CSV_FMT = ".12g"


def _fmt(x: float) -> str:
    return format(float(x), _CSV_FMT)


def _csv(rows: list[Sequence], header: Sequence[str]) -> str:
    buf = io.StringIO()
    buf.write(",".join(header) + "\n")
    for row in rows:
        buf.write(
            ",".join(c if isinstance(c, str) else _fmt(c) for c in row) + "\n"
        )
    return buf.getvalue()


def _write_out(path: str | None, text: str) -> None:
    if path:
        write_atomic(path, text)


def _fail(message: str) -> SystemExit:
    """Exit code 1 with the message on stderr (malformed input)."""
    print(message, file=sys.stderr)
    return SystemExit(1)


def _parse_int_list(text: str, flag: str) -> list[int]:
    try:
        values = [int(t) for t in text.replace(",", " ").split()]
    except ValueError:
        raise _fail(f"error: {flag} expects comma-separated integers, got {text!r}")
    if not values:
        raise _fail(f"error: {flag} expects at least one value")
    return values


def _parse_grid(text: str) -> GridSpec:
    parts = text.split(",")
    if len(parts) != 3:
        raise _fail("error: --grid expects 'lo,hi,nodes'")
    try:
        return GridSpec(float(parts[0]), float(parts[1]), int(parts[2]))
    except ValueError:
        raise _fail(f"error: bad --grid value {text!r}")


def _validated_sandwich(chain, r: int):
    """Sandwich estimate re-validated from its certificates.

    Exit 2 when a certificate fails to reproduce its claimed bound; the
    table is only trusted as far as its certificates check out.
    """
    est = norm_sandwich(chain, r)
    if not check_lower_certificate(chain, r, est.lower, est.lower_certificate):
        print(f"certificate validation failed: lower bound at r={r}", file=sys.stderr)
        raise SystemExit(2)
    if not check_upper_certificate(chain, r, est.upper, est.upper_certificate):
        print(f"certificate validation failed: upper bound at r={r}", file=sys.stderr)
        raise SystemExit(2)
    return est


def _dump_certificates(out: str, chain, est) -> None:
    if est.lower_certificate is not None:
        _write_out(out + ".lower.form", format_form(est.lower_certificate))
    if est.upper_certificate is not None:
        _write_out(
            out + ".upper.cells",
            format_cell_decomposition(est.upper_certificate, chain.n, chain.k, est.r),
        )


# -- subcommands ---------------------------------------------------------


def _cmd_pair(args) -> int:
    chain = load_chain(args.chain)
    form = load_form(args.form)
    value = pair(chain, form)
    print(repr(value))
    _write_out(args.out, _csv([("pair", value)], ("quantity", "value")))
    return 0


def _cmd_norm(args) -> int:
    chain = load_chain(args.chain)
    if args.order < 0:
        raise _fail("error: -r must be nonnegative")
    rows = []
    last = None
    for r in range(args.order + 1):
        est = _validated_sandwich(chain, r)
        rows.append((est.r, est.lower, est.upper, est.upper - est.lower))
        last = est
        print(
            f"r={est.r}  lower={est.lower:.6g}  upper={est.upper:.6g}  "
            f"gap={est.upper - est.lower:.6g}"
        )
    _write_out(args.out, _csv(rows, ("r", "lower", "upper", "gap")))
    if args.out and last is not None:
        _dump_certificates(args.out, chain, last)
    return 0


def _cmd_natural(args) -> int:
    chain = load_chain(args.chain)
    report = natural_norm(chain, r_max=args.rmax, tol=args.tol)
    rows = []
    for est in report.estimates:
        if not check_lower_certificate(chain, est.r, est.lower, est.lower_certificate):
            print(
                f"certificate validation failed: lower bound at r={est.r}",
                file=sys.stderr,
            )
            return 2
        if not check_upper_certificate(chain, est.r, est.upper, est.upper_certificate):
            print(
                f"certificate validation failed: upper bound at r={est.r}",
                file=sys.stderr,
            )
            return 2
        rows.append((est.r, est.lower, est.upper, est.upper - est.lower))
        print(f"r={est.r}  lower={est.lower:.6g}  upper={est.upper:.6g}")
    if report.plateau_r is None:
        print(f"no plateau within r<={args.rmax}; last upper {report.value:.6g}")
    else:
        print(
            f"plateau at r={report.plateau_r}: natural norm ~ {report.value:.6g} "
            f"(upper bounds {'monotone' if report.upper_monotone else 'NOT monotone'})"
        )
    _write_out(args.out, _csv(rows, ("r", "lower", "upper", "gap")))
    if args.out:
        target = report.plateau_r if report.plateau_r is not None else args.rmax
        _dump_certificates(args.out, chain, report.estimates[target])
    return 0


def _cmd_oracle(args) -> int:
    chain = load_chain(args.chain)
    if not isinstance(chain, PointedChain):
        raise _fail("error: the grid oracle handles pointed chains only")
    grid = _parse_grid(args.grid)
    value = norm_oracle_grid(chain, args.order, grid)
    print(repr(value))
    _write_out(args.out, _csv([("oracle", value)], ("quantity", "value")))
    return 0


def _cmd_stokes(args) -> int:
    cell = load_cell(args.cell)
    form = load_form(args.form)
    ms = _parse_int_list(args.m, "--m")
    rows = []
    for m in ms:
        res = stokes_residual(cell, form, m)
        rows.append((m, res))
        print(f"m={m}  residual={res:.6g}")
    if len(ms) >= 2:
        slope = fit_loglog_slope([m for m, _ in rows], [v for _, v in rows])
        print(f"fitted log-log slope: {slope:.4g}")
    _write_out(args.out, _csv(rows, ("m", "residual")))
    return 0


def _cmd_cauchy(args) -> int:
    cell = load_cell(args.cell)
    ms = _parse_int_list(args.m, "--m")
    report = cauchy_rate(cell, args.order, ms)
    for m, value in report.series:
        print(f"m={m}  upper={value:.6g}")
    print(f"fitted log-log slope: {report.slope:.4g}")
    _write_out(args.out, _csv(list(report.series), ("m", "upper")))
    return 0


def _random_pointed_chain(rng, n: int, k: int, terms: int) -> PointedChain:
    ncoeff = len(index_sets(n, k))
    return PointedChain(
        n,
        k,
        [
            (rng.uniform(-1.0, 1.0, n), KVector(n, k, rng.normal(0.0, 1.0, ncoeff)))
            for _ in range(terms)
        ],
    )


def _random_form(rng, n: int, k: int) -> FormSpec:
    total = FormSpec(n, k, [])
    sets = index_sets(n, k)
    for _ in range(3):
        idx = sets[rng.integers(len(sets))]
        total = total + FormSpec.trig(
            n,
            float(rng.normal(0.0, 1.0)),
            rng.uniform(-2.0, 2.0, n),
            float(rng.uniform(-math.pi, math.pi)),
            idx,
        )
    return total


def _cmd_dipole_check(args) -> int:
    """Derivative/pairing duality: pushing a direction into the chain and
    differentiating the form along it must pair identically."""
    rng = np.random.default_rng(args.seed)
    n = 3
    rows = []
    worst = 0.0
    for trial in range(args.trials):
        k = int(rng.integers(0, n + 1))
        A = _random_pointed_chain(rng, n, k, int(rng.integers(1, 4)))
        w = _random_form(rng, n, k)
        chain: PointedChain | DipoleChain = A
        form = w
        for _ in range(int(rng.integers(1, 3))):
            v = rng.normal(0.0, 1.0, n)
            chain = dipole_derivative(chain, v)
            form = lie_derivative(form, v)
        lhs = pair(chain, w)
        rhs = pair(A, form)
        err = abs(lhs - rhs)
        worst = max(worst, err)
        rows.append((trial, lhs, rhs, err))
    print(f"{args.trials} trials, max |pairing mismatch| = {worst:.3e}")
    _write_out(args.out, _csv(rows, ("trial", "lhs", "rhs", "abs_err")))
    if worst > 1e-9:
        print("duality identity failed beyond 1e-9", file=sys.stderr)
        return 2
    return 0


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dirachains",
        description=__doc__,
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, func, help_text, **flags):
        p = sub.add_parser(name, help=help_text)
        if flags.get("chain"):
            p.add_argument("--chain", required=True, help="chain file")
        if flags.get("form"):
            p.add_argument("--form", required=True, help="form file")
        if flags.get("cell"):
            p.add_argument("--cell", required=True, help="cell file")
        if flags.get("order") is not None:
            p.add_argument(
                "-r", "--order", type=int, default=flags["order"],
                help="derivative order (default %(default)s)",
            )
        if flags.get("rmax"):
            p.add_argument(
                "--rmax", type=int, default=4,
                help="largest derivative order to try (default %(default)s)",
            )
            p.add_argument(
                "--tol", type=float, default=0.01,
                help="relative plateau tolerance (default %(default)s)",
            )
        if flags.get("grid"):
            p.add_argument(
                "--grid", default="-1,1,81",
                help="grid as 'lo,hi,nodes' (default %(default)s)",
            )
        if flags.get("m"):
            p.add_argument(
                "--m", default="4,8,16,32",
                help="comma-separated subdivision counts (default %(default)s)",
            )
        if flags.get("seed"):
            p.add_argument(
                "--seed", type=int, default=0,
                help="random seed; fixes all sampled data (default %(default)s)",
            )
            p.add_argument(
                "--trials", type=int, default=100,
                help="number of random trials (default %(default)s)",
            )
        p.add_argument("--out", default=None, help="write CSV here (atomic)")
        p.set_defaults(func=func)
        return p

    add("pair", _cmd_pair, "pair a chain with a form (CSV: quantity,value)",
        chain=True, form=True)
    add("norm", _cmd_norm,
        "certified norm bounds for orders 0..r (CSV: r,lower,upper,gap)",
        chain=True, order=1)
    add("natural", _cmd_natural,
        "norm-family limit with plateau detection (CSV: r,lower,upper,gap)",
        chain=True, rmax=True)
    add("oracle", _cmd_oracle,
        "independent grid LP bound (CSV: quantity,value)",
        chain=True, order=1, grid=True)
    add("stokes", _cmd_stokes,
        "boundary/derivative residual series (CSV: m,residual)",
        cell=True, form=True, m=True)
    add("cauchy", _cmd_cauchy,
        "refinement norm decay series (CSV: m,upper)",
        cell=True, order=1, m=True)
    add("dipole-check", _cmd_dipole_check,
        "randomized derivative duality suite (CSV: trial,lhs,rhs,abs_err)",
        seed=True)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ParseError as exc:
        print(str(exc), file=sys.stderr)
        return 1
    except SystemExit:
        raise
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
