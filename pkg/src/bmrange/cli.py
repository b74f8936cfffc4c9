"""Command-line front end.

Exit status: 0 on success, 2 on invalid arguments, 3 on bad input data.
All floats are written with 17 significant digits.
"""

from __future__ import annotations

import argparse
import csv
import io
import sys

import numpy as np

from . import densities, empirical, sdensity, simulation
from .errors import (
    ConvergenceError,
    DegeneratePathError,
    DomainError,
    FormatError,
    InsufficientSampleError,
)

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_DATA = 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _UsageError(self.format_usage(), message)


class _UsageError(Exception):
    def __init__(self, usage, message):
        super().__init__(message)
        self.usage = usage


def _fmt(v: float) -> str:
    return f"{v:.17g}"


def _build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--out", default="-", help="output file, '-' for stdout")
    common.add_argument("--workers", type=int, default=1, help="worker threads")

    p = _Parser(prog="bmrange", description="Brownian range / terminal-value densities and s-stat tests.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    d = sub.add_parser("density", parents=[common], help="joint density of (range, W_T) or of (max, -min, W_T)")
    d.add_argument("--t", type=float, default=1.0)
    d.add_argument("--mu", type=float, default=0.0)
    d.add_argument("--sigma", type=float, default=1.0)
    d.add_argument("--r", type=float)
    d.add_argument("--h", type=float)
    d.add_argument("--l", type=float)
    d.add_argument("--x", type=float, required=True)
    d.add_argument("--nmax", type=int, default=100)

    s = sub.add_parser("sdensity", parents=[common], help="density of the range-scaled terminal value")
    s.add_argument("--a", type=float, required=True)
    s.add_argument("--nmax", type=int, default=sdensity.DEFAULT_N_MAX)
    s.add_argument("--form", choices=("one", "two"), default="one")

    t = sub.add_parser("table", parents=[common], help="tabulate s(a) and its CDF as CSV")
    t.add_argument("--resolution", type=int, default=sdensity.DEFAULT_RESOLUTION)
    t.add_argument("--nmax", type=int, default=sdensity.DEFAULT_N_MAX)

    m = sub.add_parser("simulate", parents=[common], help="simulate an ensemble and write its CSV")
    m.add_argument("--process", choices=("wiener", "ar1"), default="wiener")
    m.add_argument("--paths", type=int, required=True)
    m.add_argument("--steps", type=int, required=True)
    m.add_argument("--seed", type=int, required=True)
    m.add_argument("--mu", type=float, default=0.0)
    m.add_argument("--sigma", type=float, default=1.0)
    m.add_argument("--t", type=float, default=1.0)
    m.add_argument("--rho", type=float, default=1.0)

    q = sub.add_parser("sstat", parents=[common], help="structural test of an OHLC CSV")
    q.add_argument("--in", dest="inp", required=True)

    k = sub.add_parser("kstest", parents=[common], help="KS test of a sample CSV against s(a)")
    k.add_argument("--in", dest="inp", required=True)
    k.add_argument("--ref", choices=("sdensity",), default="sdensity")

    g = sub.add_parser("qq", parents=[common], help="QQ pairs against s(a) or a second sample")
    g.add_argument("--a", dest="sample_a", required=True)
    src = g.add_mutually_exclusive_group()
    src.add_argument("--b", dest="sample_b")
    src.add_argument("--ref", choices=("sdensity",))
    g.add_argument("--levels", type=int, default=empirical.QQ_LEVELS)
    return p


def _read_bytes(path: str, stdin) -> bytes:
    if path == "-":
        data = stdin.buffer.read() if hasattr(stdin, "buffer") else stdin.read()
        return data.encode("utf-8") if isinstance(data, str) else data
    with open(path, "rb") as fh:
        return fh.read()


def read_sample(data: bytes) -> np.ndarray:
    """Values of a sample CSV: the ``s_stat`` column of an ensemble file, or a single column."""
    rows = list(csv.reader(io.StringIO(data.decode("utf-8"))))
    if not rows:
        raise FormatError("empty sample file")
    header = [h.strip() for h in rows[0]]
    if "s_stat" in header:
        col = header.index("s_stat")
    elif len(header) == 1:
        col = 0
    else:
        raise FormatError("sample CSV needs an s_stat column or a single column")
    values = []
    for line, row in enumerate(rows[1:], start=2):
        if not row or col >= len(row) or not row[col].strip():
            continue
        try:
            values.append(float(row[col]))
        except ValueError:
            raise FormatError(f"line {line}: not a number: {row[col]!r}") from None
    return np.asarray(values)


def _run(args, stdin) -> str:
    cmd = args.command
    if cmd == "density":
        p = densities.ProcessParams(mu=args.mu, sigma=args.sigma, t=args.t)
        sc = densities.SeriesControl(n_max=args.nmax)
        if args.r is not None:
            if args.h is not None or args.l is not None:
                raise DomainError("give either --r or --h/--l, not both")
            val = densities.joint_range_terminal_density(p, args.r, args.x, sc)
        elif args.h is not None and args.l is not None:
            val = densities.trivariate_density(p, densities.Barriers(args.h, args.l, args.x), sc)
        else:
            raise DomainError("density needs --r, or both --h and --l")
        return _fmt(val) + "\n"
    if cmd == "sdensity":
        fn = sdensity.s_density_one_sided if args.form == "one" else sdensity.s_density_two_sided
        return _fmt(fn(args.a, args.nmax)) + "\n"
    if cmd == "table":
        return sdensity.SDensityTable.build(args.resolution, args.nmax).to_csv()
    if cmd == "simulate":
        spec = simulation.EnsembleSpec(
            simulation.PathSpec(
                process=args.process,
                mu=args.mu,
                sigma=args.sigma,
                t=args.t,
                rho=args.rho,
                n_steps=args.steps,
                seed=args.seed,
            ),
            n_paths=args.paths,
        )
        return simulation.simulate_ensemble(spec, workers=args.workers).to_csv()
    if cmd == "sstat":
        return empirical.analyze_ohlc_csv(_read_bytes(args.inp, stdin)).to_json()
    if cmd == "kstest":
        sample = read_sample(_read_bytes(args.inp, stdin))
        if np.any(np.abs(sample) > 1):
            raise FormatError("s-stat sample has values outside [-1, 1]")
        table = sdensity.default_table()
        report = empirical.ks_test(sample, lambda a: sdensity.s_cdf(a, table))
        report.metadata.update({"reference": "brownian-s-density", "reference_table_resolution": table.resolution})
        return report.to_json()
    if cmd == "qq":
        a = read_sample(_read_bytes(args.sample_a, stdin))
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        if args.sample_b is not None:
            b = read_sample(_read_bytes(args.sample_b, stdin))
            pts = empirical.two_sample_qq(a, b, args.levels)
            w.writerow(["a", "b"])
        else:
            pts = empirical.qq_points(a, sdensity.s_quantile, args.levels)
            w.writerow(["reference", "empirical"])
        for x, y in pts:
            w.writerow([_fmt(x), _fmt(y)])
        return buf.getvalue()
    raise DomainError(f"unknown command {cmd}")


def main(argv=None, stdin=None, stdout=None, stderr=None) -> int:
    stdin = stdin or sys.stdin
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        if args.workers < 1:
            raise DomainError("--workers must be at least 1")
        text = _run(args, stdin)
    except _UsageError as exc:
        stderr.write(exc.usage)
        print(f"bmrange: {exc}", file=stderr)
        return EXIT_USAGE
    except DomainError as exc:
        print(f"bmrange: invalid argument: {exc}", file=stderr)
        return EXIT_USAGE
    except (FormatError, InsufficientSampleError, DegeneratePathError, ConvergenceError, UnicodeDecodeError) as exc:
        print(f"bmrange: data error: {exc}", file=stderr)
        return EXIT_DATA
    except OSError as exc:
        print(f"bmrange: {exc}", file=stderr)
        return EXIT_DATA
    if args.out == "-":
        stdout.write(text)
    else:
        with open(args.out, "w", newline="") as fh:
            fh.write(text)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
