"""Command-line entry point: ``heralded {herald,scan,solve,verify,cascade}``.

Exit codes: 0 success, 1 numerical failure, 2 invalid input.
"""

from __future__ import annotations

import argparse
import math
import sys
import warnings

from .cascade import b_prime, cascade_negativity_closed, cascade_numeric
from .entanglement import schmidt_negativity
from .errors import NumericalError, ValidationError
from .fock import TAIL_EPS, DelocalizedPhoton, choose_cutoff, delocalized_photon, dump_json
from .herald import herald_distribution, herald_hybrid_numeric
from .interferometer import BeamSplitter
from .search import BALANCED, scan_grid, solve_max_negativity
from .verify import run_verification

_NOT_CONFIG = {"command", "output", "emit_config", "func", "verdict"}


def _photon(args) -> DelocalizedPhoton:
    if args.a0 is None:
        return DelocalizedPhoton.from_magnitude(args.a1, args.a1_phase)
    phase = complex(math.cos(args.a1_phase), math.sin(args.a1_phase))
    return delocalized_photon(args.a0, args.a1 * phase)


def _cutoff(args, r_sq: float) -> int:
    return args.cutoff if args.cutoff is not None else choose_cutoff(r_sq, args.tail_eps)


def cmd_herald(args) -> str:
    bs, photon = BeamSplitter.from_t(args.t), _photon(args)
    cutoff = _cutoff(args, args.r_sq)
    if args.p_max is not None:
        recs = herald_distribution(args.r_sq, bs, photon, args.p_max, args.tail_eps, cutoff)
        return dump_json([r.to_dict() for r in recs])
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        rec = herald_hybrid_numeric(args.r_sq, bs, photon, args.p, args.tail_eps, cutoff)
    return dump_json(rec.to_dict())


def cmd_scan(args) -> str:
    table = scan_grid(tuple(args.r_range), tuple(args.t_range), args.a1, args.p, tuple(args.steps), args.tail_eps)
    if args.format == "json":
        return dump_json({"metadata": table.metadata(), "rows": [list(r) for r in table.rows]})
    return table.to_csv()


def cmd_solve(args) -> str:
    pts = solve_max_negativity(args.a1, args.p, tuple(args.r_bracket), tuple(args.t_bracket),
                               tuple(args.steps), tail_eps=args.tail_eps)
    return dump_json([pt.to_dict() for pt in pts])


def cmd_verify(args) -> str:
    report = run_verification(args.tail_eps)
    args.verdict = report["ok"]
    return dump_json(report)


def cmd_cascade(args) -> str:
    photon = DelocalizedPhoton.from_magnitude(args.a1, args.a1_phase)
    bs1, bs2 = BeamSplitter.from_t(args.t), BeamSplitter.from_t(args.t2)
    c1, c2 = _cutoff(args, args.r_sq), _cutoff(args, args.r_sq2)
    stage1 = herald_hybrid_numeric(args.r_sq, bs1, photon, 0, args.tail_eps, c1)
    state, prob = cascade_numeric(stage1, args.r_sq2, bs2, args.p, args.tail_eps, c2)
    kw = {"cutoff1": c1, "cutoff2": c2}
    return dump_json({
        "p": args.p,
        "probability": prob,
        "stage1_probability": stage1.probability,
        "negativity": schmidt_negativity(state).value,
        "negativity_closed": cascade_negativity_closed(args.p, args.r_sq, bs1, photon, args.r_sq2, bs2, **kw),
        "b_prime": b_prime(args.p, args.r_sq, bs1, args.r_sq2, bs2, photon, **kw),
        "state": state.to_dict(),
    })


def _add_photon(p):
    p.add_argument("--a1", type=float, default=BALANCED, help="magnitude of the mode-2 photon amplitude")
    p.add_argument("--a1-phase", type=float, default=0.0, help="phase of a1 in radians")


def _add_common(p):
    p.add_argument("--tail-eps", type=float, default=TAIL_EPS, help="squeezed-vacuum tail bound")
    p.add_argument("--format", choices=("json", "csv"), default=None)
    p.add_argument("-o", "--output", help="write the artifact here instead of stdout")
    p.add_argument("--emit-config", metavar="PATH", help="also write the resolved flags as JSON")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="heralded", description="Heralded hybrid entanglement workbench.")
    sub = parser.add_subparsers(dest="command", required=True)

    h = sub.add_parser("herald", help="heralded hybrid state for one outcome")
    h.add_argument("--r-sq", type=float, required=True)
    h.add_argument("--t", type=float, required=True, help="beam-splitter transmittance")
    _add_photon(h)
    h.add_argument("--a0", type=float, default=None, help="explicit |a0|; must normalize with --a1")
    h.add_argument("--p", type=int, default=0, help="detected photon number")
    h.add_argument("--p-max", type=int, default=None, help="emit every outcome 0..P_MAX instead")
    h.add_argument("--cutoff", type=int, default=None, help="override the automatic cutoff")
    _add_common(h)
    h.set_defaults(func=cmd_herald)

    s = sub.add_parser("scan", help="negativity/probability surface as CSV")
    s.add_argument("--r-range", type=float, nargs=2, default=(0.0, 1.5), metavar=("LO", "HI"))
    s.add_argument("--t-range", type=float, nargs=2, default=(0.02, 0.98), metavar=("LO", "HI"))
    s.add_argument("--steps", type=int, nargs=2, default=(50, 50), metavar=("NR", "NT"))
    s.add_argument("--p", type=int, default=0)
    _add_photon(s)
    _add_common(s)
    s.set_defaults(func=cmd_scan)

    v = sub.add_parser("solve", help="maximal-negativity operating points")
    v.add_argument("--r-bracket", type=float, nargs=2, default=(0.0, 1.5), metavar=("LO", "HI"))
    v.add_argument("--t-bracket", type=float, nargs=2, default=(0.02, 0.98), metavar=("LO", "HI"))
    v.add_argument("--steps", type=int, nargs=2, default=(60, 97), metavar=("NR", "NT"))
    v.add_argument("--p", type=int, default=0)
    _add_photon(v)
    _add_common(v)
    v.set_defaults(func=cmd_solve)

    f = sub.add_parser("verify", help="run the built-in consistency checks")
    _add_common(f)
    f.set_defaults(func=cmd_verify)

    c = sub.add_parser("cascade", help="second-stage CV entangled state")
    c.add_argument("--r-sq", type=float, required=True, help="first-stage squeezing")
    c.add_argument("--t", type=float, required=True, help="first-stage transmittance")
    c.add_argument("--r-sq2", type=float, default=None, help="second-stage squeezing (default: same)")
    c.add_argument("--t2", type=float, default=None, help="second-stage transmittance (default: same)")
    c.add_argument("--p", type=int, default=0)
    c.add_argument("--cutoff", type=int, default=None)
    _add_photon(c)
    _add_common(c)
    c.set_defaults(func=cmd_cascade)
    return parser


def _config(args) -> dict:
    return {"command": args.command} | {
        k: (list(v) if isinstance(v, tuple) else v) for k, v in sorted(vars(args).items()) if k not in _NOT_CONFIG
    }


def _write(path: str | None, text: str) -> None:
    if path is None:
        sys.stdout.write(text)
        sys.stdout.flush()
        return
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "cascade":
        args.r_sq2 = args.r_sq if args.r_sq2 is None else args.r_sq2
        args.t2 = args.t if args.t2 is None else args.t2
    if args.command == "scan" and args.format is None:
        args.format = "csv"
    if args.format == "csv" and args.command != "scan":
        print(f"error: {args.command} only emits json", file=sys.stderr)
        return 2
    args.verdict = True
    try:
        if args.emit_config:
            _write(args.emit_config, dump_json(_config(args)))
        text = args.func(args)
    except ValidationError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2
    except NumericalError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    _write(args.output, text)
    return 0 if args.verdict else 1


if __name__ == "__main__":
    sys.exit(main())
