"""Command line front end.

Every subcommand writes one table (CSV with a ``# schema=v1`` first line,
or the equivalent JSON) to ``--out`` or standard output. Exit status is 0 on
success, 1 for usage errors and 2 for numerical failures.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import sys
import warnings

import numpy as np

from . import __version__
from .dynamics import (
    DEFAULT_WEIGHT_FLOOR,
    Method,
    UnderCoverageWarning,
    binned_spectrum,
    frequency_spectrum,
    numeric_ehrenfest,
    numeric_overlaps,
)
from .errors import DomainError, EhrenfestError
from .model import PotentialSpec
from .semiclassics import regwkb_ehrenfest, single_well_ehrenfest, wkb_overlap_set
from .spectrum import Parity, solve_eigen_window
from .sweep import ScalingModel, SweepConfig, fit_scaling, hbar_grid, model_select, run_sweep

SCHEMA = "v1"
EHRENFEST_COLUMNS = ["hbar", "nu_E", "nu_E_inv", "method", "eps_lo", "eps_hi"]

log = logging.getLogger("ehrenfest")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


# ---------------------------------------------------------------- output


def _plain(v):
    # numpy scalars would otherwise leak their repr into the CSV
    return v.item() if isinstance(v, np.generic) else v


class Table:
    """Rows plus optional ``key=value`` annotations, rendered as CSV or JSON."""

    def __init__(self, columns, rows=(), notes=()):
        self.columns = list(columns)
        self.rows = [[_plain(v) for v in r] for r in rows]
        self.notes = [{k: _plain(v) for k, v in n.items()} for n in notes]

    @staticmethod
    def _cell(v):
        if isinstance(v, float):
            return repr(v)
        return str(v)

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write(f"# schema={SCHEMA}\n")
        for note in self.notes:
            buf.write("# " + " ".join(f"{k}={self._cell(v)}" for k, v in note.items()) + "\n")
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(self.columns)
        for r in self.rows:
            w.writerow([self._cell(v) for v in r])
        return buf.getvalue()

    def to_json(self) -> str:
        doc = {"schema": SCHEMA, "columns": self.columns, "rows": self.rows}
        if self.notes:
            doc["notes"] = self.notes
        return json.dumps(doc, indent=1) + "\n"

    @classmethod
    def parse(cls, text: str) -> "Table":
        text = text.lstrip()
        if text.startswith("{"):
            doc = json.loads(text)
            return cls(doc["columns"], doc["rows"], doc.get("notes", ()))
        lines = text.splitlines()
        if not lines or lines[0].strip() != f"# schema={SCHEMA}":
            raise UsageError(f"input is not a schema={SCHEMA} table")
        body = [ln for ln in lines[1:] if not ln.startswith("#")]
        reader = csv.reader(body)
        columns = next(reader)
        return cls(columns, list(reader))


def _emit(table: Table, args):
    text = table.to_json() if args.format == "json" else table.to_csv()
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


# ---------------------------------------------------------------- arguments


def _spec(args) -> PotentialSpec:
    if args.well == "double":
        return PotentialSpec.double(args.alpha, args.beta)
    return PotentialSpec.single(args.beta)


def _decades(text):
    try:
        a, b = (float(x) for x in text.split(":"))
    except ValueError:
        raise argparse.ArgumentTypeError("expected A:B, e.g. 4:12 for hbar from 1e-4 to 1e-12") from None
    if a == b:
        raise argparse.ArgumentTypeError("decade range is empty")
    return min(a, b), max(a, b)


def _hbars(args, *, single=False):
    if args.hbar_decades:
        hs = hbar_grid(*args.hbar_decades, args.per_decade)
    elif args.hbar:
        hs = sorted(set(args.hbar), reverse=True)
    else:
        raise UsageError("give --hbar or --hbar-decades")
    if single and len(hs) != 1:
        raise UsageError("this subcommand takes exactly one --hbar")
    return hs


def _method(args, spec):
    if args.method:
        return Method(args.method)
    return Method.NUMERIC


def _common(p, *, many_hbar=True):
    p.add_argument("--well", choices=["single", "double"], default="double")
    p.add_argument("--alpha", type=int, default=1)
    p.add_argument("--beta", type=int, default=2)
    p.add_argument("--hbar", type=float, action="append", help="repeatable")
    if many_hbar:
        p.add_argument("--hbar-decades", type=_decades, metavar="A:B",
                       help="log-spaced hbar from 1e-A to 1e-B")
        p.add_argument("--per-decade", type=int, default=8)
    else:
        p.set_defaults(hbar_decades=None, per_decade=8)
    p.add_argument("--method", choices=[m.value for m in Method])
    p.add_argument("--weight-floor", type=float, default=DEFAULT_WEIGHT_FLOOR)
    p.add_argument("--out", help="output file (default: standard output)")
    p.add_argument("--format", choices=["csv", "json"], default="csv")
    p.add_argument("-v", "--verbose", action="store_true", default=argparse.SUPPRESS)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="ehrenfest", description="Ehrenfest frequency of 1D polynomial wells.")
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument("-v", "--verbose", action="store_true", default=False)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("spectrum", help="eigenvalues in an energy window")
    _common(p, many_hbar=False)
    p.add_argument("--eps-min", type=float)
    p.add_argument("--eps-max", type=float)
    p.add_argument("--parity", choices=["even", "odd", "both"], default="both")
    p.add_argument("--wavefunction", type=int, metavar="N",
                   help="write q, phi of state N instead of the eigenvalue table")

    p = sub.add_parser("overlaps", help="packet weights |c_n|^2")
    _common(p, many_hbar=False)

    p = sub.add_parser("pnu", help="binned frequency spectrum P(nu)")
    _common(p, many_hbar=False)
    p.add_argument("--bins", type=int, default=200, help="bins on [0, --nu-max]")
    p.add_argument("--nu-max", type=float, default=2.0)

    p = sub.add_parser("ehrenfest", help="Ehrenfest frequency at given hbar values")
    _common(p)

    p = sub.add_parser("sweep", help="hbar sweep with scaling fits")
    _common(p)
    p.add_argument("--workers", type=int, default=1)

    p = sub.add_parser("fit", help="fit a previously written ehrenfest/sweep table")
    p.add_argument("input")
    p.add_argument("--model", choices=["power_law", "logarithmic", "select"], default="select")
    p.add_argument("--out")
    p.add_argument("--format", choices=["csv", "json"], default="csv")
    return parser


# ---------------------------------------------------------------- commands


def _default_window(spec, hbar, args):
    lo = args.eps_min if args.eps_min is not None else (
        max(spec.min_energy, -20 * hbar) if spec.is_double else spec.min_energy
    )
    hi = args.eps_max if args.eps_max is not None else 20 * hbar
    return lo, hi


def cmd_spectrum(args):
    spec = _spec(args)
    (hbar,) = _hbars(args, single=True)
    lo, hi = _default_window(spec, hbar, args)
    parity = None if args.parity == "both" else Parity(args.parity)
    win = solve_eigen_window(spec, hbar, lo, hi, parity, keep_samples=args.wavefunction is not None)
    if args.wavefunction is not None:
        match = [s for s in win.states if s.n == args.wavefunction]
        if not match:
            raise UsageError(f"state n={args.wavefunction} is not in [{lo:g}, {hi:g}]")
        st = match[0]
        return Table(["q", "phi"], zip(st.positions().tolist(), st.samples.tolist()))
    states = sorted(win.states, key=lambda s: s.energy)
    return Table(["n", "eps", "parity"], [(s.n, s.energy, s.parity.value) for s in states])


def _overlap_set(args):
    spec = _spec(args)
    (hbar,) = _hbars(args, single=True)
    method = _method(args, spec)
    if method is Method.WKB_SINGLE_WELL:
        if spec.is_double:
            raise UsageError("--method wkb needs --well single")
        return wkb_overlap_set(spec.beta, hbar)
    if method is Method.REG_WKB:
        raise UsageError("regularized WKB gives energies only, not weights")
    return numeric_overlaps(spec, hbar)


def cmd_overlaps(args):
    os = _overlap_set(args)
    return Table(["n", "eps", "weight"], os.entries, [{"captured_mass": os.captured_mass}])


def cmd_pnu(args):
    if args.bins < 1 or not args.nu_max > 0:
        raise UsageError("--bins and --nu-max must be positive")
    fs = frequency_spectrum(_overlap_set(args))
    centres, density = binned_spectrum(fs, args.nu_max / args.bins, args.nu_max)
    return Table(["nu", "density"], zip(centres.tolist(), density.tolist()))


def _point(spec, hbar, method, floor):
    if method is Method.WKB_SINGLE_WELL:
        return single_well_ehrenfest(spec.beta, hbar)
    if method is Method.REG_WKB:
        return regwkb_ehrenfest(hbar)
    return numeric_ehrenfest(spec, hbar, floor)


def _point_rows(points):
    return [(p.hbar, p.nu_E, p.nu_E_inv, p.method.value, p.eps_lo, p.eps_hi) for p in points]


def cmd_ehrenfest(args):
    spec = _spec(args)
    method = _method(args, spec)
    # reuse the config checks for method/potential compatibility
    cfg = SweepConfig(spec, _hbars(args), method, args.weight_floor)
    points = [_point(spec, h, method, cfg.weight_floor) for h in cfg.hbar_values]
    for p in points:
        log.info("hbar=%g nu_E=%.10g pair=(%.10g, %.10g)", p.hbar, p.nu_E, p.eps_lo, p.eps_hi)
    return Table(EHRENFEST_COLUMNS, _point_rows(points))


def _fit_notes(points):
    notes = []
    if len(points) >= 4:
        for model in ScalingModel:
            f = fit_scaling(points, model)
            notes.append({"fit": model.value, "slope": f.slope, "intercept": f.intercept,
                          "r_squared": f.r_squared})
    try:
        sel = model_select(points)
        notes.append({"preferred": sel.preferred.value})
    except EhrenfestError:
        pass
    return notes


def cmd_sweep(args):
    spec = _spec(args)
    cfg = SweepConfig(spec, _hbars(args), _method(args, spec), args.weight_floor, args.workers)
    failures = {}
    points = run_sweep(cfg, failures)
    for h, msg in failures.items():
        print(f"warning: hbar={h:g} skipped: {msg}", file=sys.stderr)
    return Table(EHRENFEST_COLUMNS, _point_rows(points), _fit_notes(points))


def cmd_fit(args):
    try:
        with open(args.input, encoding="utf-8") as fh:
            table = Table.parse(fh.read())
    except OSError as exc:
        raise UsageError(str(exc)) from None
    try:
        ih, iv = table.columns.index("hbar"), table.columns.index("nu_E_inv")
    except ValueError:
        raise UsageError("table needs hbar and nu_E_inv columns") from None
    pts = [(float(r[ih]), float(r[iv])) for r in table.rows]
    if args.model == "select":
        sel = model_select(pts)
        fits, notes = [sel.power_law, sel.logarithmic], [{"preferred": sel.preferred.value}]
    else:
        fits, notes = [fit_scaling(pts, ScalingModel(args.model))], []
    rows = [(f.model.value, f.slope, f.intercept, f.r_squared) for f in fits]
    return Table(["model", "slope", "intercept", "r_squared"], rows, notes)


COMMANDS = {
    "spectrum": cmd_spectrum,
    "overlaps": cmd_overlaps,
    "pnu": cmd_pnu,
    "ehrenfest": cmd_ehrenfest,
    "sweep": cmd_sweep,
    "fit": cmd_fit,
}


def cli_main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return 1
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s", stream=sys.stderr)
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("always", UnderCoverageWarning)
            table = COMMANDS[args.command](args)
        _emit(table, args)
    except (UsageError, DomainError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (EhrenfestError, ArithmeticError, AssertionError) as exc:
        print(f"numerical failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2
    return 0


def main():
    sys.exit(cli_main())
