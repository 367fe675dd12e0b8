"""Command-line front end.

Exit status: 0 on success, 2 on input errors, 3 on numerical errors. Set
``TAPEVAR_LOG_LEVEL`` (e.g. ``DEBUG``) for progress logging on stderr.
"""
from __future__ import annotations

import argparse
import json
import logging
import os
import sys

from . import __version__
from .charfn import GridSpec, fit_charfn, tabulate_density
from .errors import NumericalError, TapevarError
from .moments import DEFAULT_N_MAX, central_stats, compute_moments
from .tape import (
    TapeSpec,
    TradeSlice,
    Window,
    format_float,
    parse_tape,
    select_window,
    serialize_tape,
    synthesize_tape,
    window_centers,
)
from .var_engine import (
    DEFAULT_EPSILONS,
    MEASURES,
    RESULT_CSV_HEADER,
    VaRRequest,
    compare,
    sweep,
    var,
)

EXIT_OK, EXIT_INPUT, EXIT_NUMERIC = 0, 2, 3
log = logging.getLogger("tapevar")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INPUT, f"{self.prog}: error: {message}\n")


def _epsilons(text: str) -> list[float]:
    try:
        values = [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad epsilon list {text!r}") from None
    if not values or any(not 0 < e < 1 for e in values):
        raise argparse.ArgumentTypeError("every epsilon must lie in (0, 1)")
    return values


def _positive(text: str) -> float:
    x = float(text)
    if not x > 0:
        raise argparse.ArgumentTypeError(f"must be > 0, got {text}")
    return x


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="tapevar", description="Frequency- vs market-based VaR on trade tapes.")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def tape_args(p, window=True):
        p.add_argument("--input", "-i", required=True, help="tape CSV (t,value,volume[,price]); - for stdin")
        p.add_argument("--output", "-o", default="-", help="output path; - for stdout")
        p.add_argument("--n-max", type=int, default=DEFAULT_N_MAX)
        p.add_argument("--format", choices=("csv", "json"), default="csv")
        if window:
            p.add_argument("--center", type=float, help="window center; whole tape if omitted")
            p.add_argument("--delta", type=_positive, help="window width")

    p = sub.add_parser("moments", help="moment table of a window")
    tape_args(p)

    p = sub.add_parser("var", help="VaR quantiles under one measure")
    tape_args(p)
    p.add_argument("--measure", choices=MEASURES, default="market-gaussian")
    p.add_argument("--eps", type=_epsilons, default=list(DEFAULT_EPSILONS))

    p = sub.add_parser("compare", help="all measures side by side")
    tape_args(p)
    p.add_argument("--eps", type=_epsilons, default=list(DEFAULT_EPSILONS))

    p = sub.add_parser("density", help="density/CDF grid of a fitted approximation")
    tape_args(p)
    p.add_argument("--kind", choices=("market", "frequency"), default="market")
    p.add_argument("--order", type=int, choices=(2, 3), default=2)
    p.add_argument("--sigmas", type=_positive, default=10.0, help="grid half-width in sigmas")
    p.add_argument("--points", type=int, default=4096)
    p.add_argument("--diagnostics", help="JSON sidecar path (default <output>.diagnostics.json)")

    p = sub.add_parser("simulate", help="write a synthetic tape")
    p.add_argument("--output", "-o", default="-")
    p.add_argument("--count", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--start-price", type=_positive, default=100.0)
    p.add_argument("--const-price", type=_positive, help="constant price (zero drift and volatility)")
    p.add_argument("--drift", type=float, default=0.0)
    p.add_argument("--volatility", type=float, default=0.001)
    p.add_argument("--volume-kind", choices=("constant", "integer", "lognormal"), default="lognormal")
    p.add_argument("--volume", type=_positive, default=100.0)
    p.add_argument("--const-volume", type=_positive, help="shorthand for --volume-kind constant --volume X")
    p.add_argument("--volume-sigma", type=float, default=1.0)
    p.add_argument("--t0", type=float, default=0.0)
    p.add_argument("--dt", type=_positive, default=1.0)
    p.add_argument("--poisson-arrivals", action="store_true")

    p = sub.add_parser("sweep", help="compare over a grid of window centers")
    tape_args(p, window=False)
    p.add_argument("--start", type=float, required=True)
    p.add_argument("--end", type=float, required=True)
    p.add_argument("--stride", type=_positive, required=True)
    p.add_argument("--delta", type=_positive, required=True)
    p.add_argument("--eps", type=_epsilons, default=list(DEFAULT_EPSILONS))
    p.add_argument("--workers", type=int, default=1)
    return parser


def _read_text(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    with open(path, encoding="utf-8") as fh:
        return fh.read()


def _write_text(path: str, text: str):
    if path == "-":
        sys.stdout.write(text)
        sys.stdout.flush()
    else:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)


def _load_slice(args) -> TradeSlice:
    tape = parse_tape(_read_text(args.input), source=args.input)
    log.debug("parsed %d trades from %s", len(tape), args.input)
    if args.center is None and args.delta is None:
        return TradeSlice(tape.trades)
    if args.center is None or args.delta is None:
        raise TapevarError("--center and --delta must be given together")
    return select_window(tape, Window(args.center, args.delta))


def _dumps(obj) -> str:
    return json.dumps(obj, indent=2) + "\n"


def _cmd_moments(args) -> str:
    m = compute_moments(_load_slice(args), args.n_max)
    return _dumps(m.to_dict()) if args.format == "json" else m.to_csv()


def _cmd_var(args) -> str:
    sl = _load_slice(args)
    n_max = max(args.n_max, 3 if args.measure == "market-order3" else 2)
    m = compute_moments(sl, n_max)
    results = [var(sl, VaRRequest(e, args.measure, n_max), m) for e in args.eps]
    if args.format == "json":
        return _dumps([r.to_dict() for r in results])
    return "\n".join([RESULT_CSV_HEADER] + [r.csv_row() for r in results]) + "\n"


def _cmd_compare(args) -> str:
    report = compare(_load_slice(args), args.eps, args.n_max)
    for w in report.warnings:
        log.warning(w)
    return _dumps(report.to_dict()) if args.format == "json" else report.to_csv()


def _cmd_density(args) -> str:
    sl = _load_slice(args)
    m = compute_moments(sl, max(args.n_max, args.order))
    F = fit_charfn(central_stats(m, args.kind), args.order)
    grid = tabulate_density(F, GridSpec.around(F, args.sigmas, args.points))
    sidecar = args.diagnostics
    if sidecar is None and args.output != "-":
        sidecar = args.output + ".diagnostics.json"
    if sidecar:
        _write_text(sidecar, _dumps(grid.diagnostics()))
    if grid.warning:
        log.warning("pseudo-density is negative (min %s)", format_float(grid.min_density))
    if args.format == "json":
        return _dumps({"price": grid.prices.tolist(), "density": grid.density.tolist(),
                       "cdf": grid.cdf.tolist(), "diagnostics": grid.diagnostics()})
    return grid.to_csv()


def _cmd_simulate(args) -> str:
    spec = TapeSpec(
        count=args.count,
        start_price=args.const_price or args.start_price,
        drift=0.0 if args.const_price else args.drift,
        volatility=0.0 if args.const_price else args.volatility,
        volume_kind="constant" if args.const_volume else args.volume_kind,
        volume=args.const_volume or args.volume,
        volume_sigma=args.volume_sigma,
        t0=args.t0,
        dt=args.dt,
        poisson_arrivals=args.poisson_arrivals,
    )
    return serialize_tape(synthesize_tape(spec, args.seed))


def _cmd_sweep(args) -> str:
    tape = parse_tape(_read_text(args.input), source=args.input)
    centers = window_centers(args.start, args.end, args.stride)
    entries = sweep(tape, centers, args.delta, args.eps, args.n_max, args.workers)
    produced = [e for e in entries if e.report is not None]
    for e in entries:
        if e.error:
            log.warning("center %s: %s", format_float(e.center), e.error)
    if not produced:
        raise TapevarError("no window in the sweep contains trades")
    if args.format == "json":
        return _dumps([
            {"center": e.center, "report": e.report.to_dict() if e.report else None,
             "error": e.error}
            for e in entries
        ])
    lines = ["center," + RESULT_CSV_HEADER]
    for e in produced:
        c = format_float(e.center)
        lines.extend(f"{c},{row}" for row in e.report.csv_rows())
    return "\n".join(lines) + "\n"


COMMANDS = {
    "moments": _cmd_moments, "var": _cmd_var, "compare": _cmd_compare,
    "density": _cmd_density, "simulate": _cmd_simulate, "sweep": _cmd_sweep,
}


def main(argv=None) -> int:
    logging.basicConfig(level=os.environ.get("TAPEVAR_LOG_LEVEL", "WARNING").upper(),
                        format="%(name)s: %(levelname)s: %(message)s", stream=sys.stderr)
    args = build_parser().parse_args(argv)
    try:
        out = COMMANDS[args.command](args)
        _write_text(args.output, out)
    except NumericalError as exc:
        print(f"tapevar {args.command}: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (TapevarError, OSError, UnicodeDecodeError) as exc:
        print(f"tapevar {args.command}: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INPUT
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
