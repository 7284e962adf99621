"""paralex command line.

Subcommands: report, check, classify, decompose, flow.

Exit codes: 0 success (or all identities pass), 1 usage error, 2 evaluation
failure, 3 frame not flat where flatness is required.  ``check`` exits 4 when
it ran cleanly but some applicable identity failed.
"""

from __future__ import annotations

import argparse
import io
import json
import sys

import numpy as np

from . import __version__
from ._parallel import pmap
from .algebra import KILLING_TOL, RANK_TOL, classification_check
from .connections import default_flat_tol, gamma, pre_one_parameter_flow
from .curvature import decomposition_report, identity_suite, point_data
from .errors import FrameSyntaxError, NotFlatError, ParalexError, UnknownFrameError
from .exprparse import load_frame_file
from .frame import catalog_lookup, parse_point, sample_points
from .tensor import FDConfig

EXIT_OK, EXIT_USAGE, EXIT_EVAL, EXIT_NOT_FLAT, EXIT_FAILED = 0, 1, 2, 3, 4


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _block(arr, slots: str) -> dict:
    arr = np.asarray(arr, dtype=float) + 0.0  # drop negative zeros
    return {"slots": slots, "shape": list(arr.shape), "values": arr.tolist()}


def _document(p, command: str, points=()) -> dict:
    return {
        "command": command,
        "frame": p.name,
        "dim": p.dim,
        "points": [np.asarray(x, dtype=float).tolist() for x in points],
        "blocks": None,
        "identities": None,
        "classification": None,
        "decomposition": None,
        "flow": None,
    }


def _load_frame(args):
    if args.frame_file:
        return load_frame_file(args.frame_file)
    if not args.frame:
        raise UsageError("one of --frame or --frame-file is required")
    return catalog_lookup(args.frame)


def _fd_config(args) -> FDConfig:
    return FDConfig(step=args.fd_step) if args.fd_step else FDConfig()


def _point(text: str):
    try:
        return parse_point(text)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _points(args, p, default_count: int):
    if args.at:
        pts = [_point(a) for a in args.at]
        for pt in pts:
            if pt.size != p.dim:
                raise UsageError(f"point {pt.tolist()} has {pt.size} coordinates, frame has {p.dim}")
        return pts
    return sample_points(p, args.samples or default_count, args.seed)


def _emit(args, doc: dict, text: str, out) -> None:
    payload = json.dumps(doc, indent=2) + "\n"
    if args.json == "-":
        out.write(payload)
        return
    out.write(text)
    if args.json:
        with open(args.json, "w") as fh:
            fh.write(payload)


def _fmt(arr) -> str:
    return np.array2string(np.asarray(arr) + 0.0, precision=6, suppress_small=True, max_line_width=100)


def cmd_report(args, out) -> int:
    p = _load_frame(args)
    cfg = _fd_config(args)
    pts = [_point(a) for a in args.at] if args.at else [p.domain.center]
    for pt in pts:
        if pt.size != p.dim:
            raise UsageError(f"point {pt.tolist()} has {pt.size} coordinates, frame has {p.dim}")

    def per_point(x):
        d = point_data(p, x, cfg)
        return {
            "w": _block(d.w, "^i (a)"),
            "w_inv": _block(d.w_inv, "(a) _i"),
            "g": _block(d.g, "_i _j"),
            "g_inv": _block(d.ginv, "^i ^j"),
            "gamma": _block(gamma(p, x, cfg).gamma, "^i _j _k"),
            "I": _block(d.I, "^i _j _k"),
            "frakR": _block(d.F, "^i _k _j _r"),
            "S": _block(d.S, "^i _k _j _r"),
            "ricS": _block(d.ric, "_k _j"),
            "K": _block(d.K, ""),
            "sectional": _block(d.sect, "(k) (l)"),
        }

    per = pmap(per_point, pts)
    names = list(per[0])
    doc = _document(p, "report", pts)
    doc["blocks"] = {name: [b[name] for b in per] for name in names}

    buf = io.StringIO()
    for x, blocks in zip(pts, per):
        buf.write(f"# frame {p.name} at {_fmt(x)}\n")
        for name in names:
            b = blocks[name]
            buf.write(f"{name} [{b['slots']}]\n{_fmt(b['values'])}\n")
    _emit(args, doc, buf.getvalue(), out)
    return EXIT_OK


def cmd_check(args, out) -> int:
    p = _load_frame(args)
    pts = _points(args, p, 20)
    rep = identity_suite(p, pts, tol=args.tol, cfg=_fd_config(args), flat_tol=args.flat_tol, mapper=pmap)
    doc = _document(p, "check", pts)
    doc["identities"] = rep.to_dict()

    buf = io.StringIO()
    buf.write(f"# frame {p.name}: {rep.samples} points, flat={'yes' if rep.flat else 'no'} "
              f"(linear curvature {rep.flat_residual:.3e}, tol {rep.flat_tol:g})\n")
    for r in rep.records:
        res = "-" if r.residual is None else f"{r.residual:.3e}"
        buf.write(f"{r.status.upper():<20} {r.id:<36} residual {res:>10}  tol {r.tol:g}\n")
    buf.write(f"bi-invariant: {'yes' if rep.bi_invariant else 'no'} "
              f"(residual {rep.bi_invariance_residual:.3e})\n")
    _emit(args, doc, buf.getvalue(), out)
    return EXIT_OK if rep.all_passed else EXIT_FAILED


def cmd_classify(args, out) -> int:
    p = _load_frame(args)
    pts = _points(args, p, 20)
    flat_tol = args.flat_tol if args.flat_tol is not None else default_flat_tol(p)
    try:
        chk = classification_check(p, pts, tol=args.tol or 1e-6, cfg=_fd_config(args),
                                   flat_tol=flat_tol, rank_tol=args.rank_tol,
                                   det_threshold=args.killing_tol)
    except NotFlatError as exc:
        print(f"frame is not flat: {exc}", file=sys.stderr)
        return EXIT_NOT_FLAT
    doc = _document(p, "classify", pts)
    doc["classification"] = chk.to_dict()
    cls = chk.classification
    buf = io.StringIO()
    buf.write(f"{cls.summary()}\n")
    buf.write(f"derived series dims: {cls.derived}\nlower central series dims: {cls.lower_central}\n")
    buf.write(f"killing rank {cls.killing_rank}, signature {cls.killing_signature}\n")
    for cl in chk.clauses:
        buf.write(f"{'consistent' if cl['consistent'] else 'INCONSISTENT':<13} {cl['clause']}\n")
    _emit(args, doc, buf.getvalue(), out)
    return EXIT_OK


def cmd_decompose(args, out) -> int:
    p = _load_frame(args)
    pts = _points(args, p, 5)
    rep = decomposition_report(p, pts, cfg=_fd_config(args), mapper=pmap)
    doc = _document(p, "decompose", pts)
    doc["decomposition"] = rep.to_dict()
    buf = io.StringIO()
    buf.write(f"# frame {p.name}: best convention {rep.best.label()}\n")
    buf.write(f"{'point':<40} {'residual':>12} {'|F-S|':>12} {'|R_LC|':>12}\n")
    for x, r, d, rl in zip(rep.points, rep.residuals, rep.diff_norms, rep.riemann_norms):
        buf.write(f"{_fmt(x):<40} {r:>12.4e} {d:>12.4e} {rl:>12.4e}\n")
    buf.write(f"worst residual {rep.worst_residual:.4e}\n")
    _emit(args, doc, buf.getvalue(), out)
    return EXIT_OK


def cmd_flow(args, out) -> int:
    p = _load_frame(args)
    if args.start is None or args.dir is None:
        raise UsageError("flow needs --from and --dir")
    x0, v = _point(args.start), _point(args.dir)
    if x0.size != p.dim or v.size != p.dim:
        raise UsageError(f"--from and --dir need {p.dim} coordinates")
    path = pre_one_parameter_flow(p, x0, v, args.t, args.dt)
    if path.truncated:
        print(f"warning: path left the chart domain at t={path.times[-1]:g}; truncated", file=sys.stderr)
    doc = _document(p, "flow", [x0])
    doc["flow"] = {"direction": v.tolist(), "dt": args.dt, "t_end": args.t, "truncated": path.truncated,
                   "t": path.times.tolist(), "points": path.points.tolist()}
    buf = io.StringIO()
    buf.write("t," + ",".join(f"x{i + 1}" for i in range(p.dim)) + "\n")
    for t, pt in zip(path.times, path.points):
        buf.write(",".join(repr(float(v)) for v in (t, *pt)) + "\n")
    _emit(args, doc, buf.getvalue(), out)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    src = common.add_mutually_exclusive_group()
    src.add_argument("--frame", help="catalog name (euclidean-<n>, heisenberg3, affine2, quaternion3, rotor2)")
    src.add_argument("--frame-file", help="frame expression file")
    common.add_argument("--at", action="append", help="comma separated point; repeatable")
    common.add_argument("--samples", type=int, help="number of seeded random sample points")
    common.add_argument("--seed", type=int, default=42)
    common.add_argument("--tol", type=float, help="override identity/clause tolerances")
    common.add_argument("--flat-tol", type=float, help="linear curvature tolerance for flatness")
    common.add_argument("--fd-step", type=float, help="base finite-difference step")
    common.add_argument("--json", nargs="?", const="-", metavar="PATH",
                        help="write JSON to PATH, or to stdout instead of text when PATH is omitted")

    parser = _Parser(prog="paralex", description="Numerical laboratory for absolute parallelisms.")
    parser.add_argument("--version", action="version", version=f"paralex {__version__}")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)
    sub.add_parser("report", parents=[common], help="geometric objects at points").set_defaults(func=cmd_report)
    sub.add_parser("check", parents=[common], help="identity suite").set_defaults(func=cmd_check)
    cl = sub.add_parser("classify", parents=[common], help="Lie algebra classification")
    cl.add_argument("--rank-tol", type=float, default=RANK_TOL, help="singular value threshold for series ranks")
    cl.add_argument("--killing-tol", type=float, default=KILLING_TOL, help="Killing eigenvalue threshold")
    cl.set_defaults(func=cmd_classify)
    sub.add_parser("decompose", parents=[common], help="curvature decomposition residuals").set_defaults(
        func=cmd_decompose)
    fl = sub.add_parser("flow", parents=[common], help="pre-1-parameter path as CSV")
    fl.add_argument("--from", dest="start", help="start point")
    fl.add_argument("--dir", help="initial velocity")
    fl.add_argument("--t", type=float, default=1.0, help="end time")
    fl.add_argument("--dt", type=float, default=1e-3, help="RK4 step")
    fl.set_defaults(func=cmd_flow)
    return parser


def main(argv=None, out=None) -> int:
    out = out or sys.stdout
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if not getattr(args, "command", None):
            raise UsageError("a subcommand is required: report, check, classify, decompose, flow")
        if args.samples is not None and args.samples < 1:
            raise UsageError("--samples must be at least 1")
        return args.func(args, out)
    except UsageError as exc:
        print(f"paralex: error: {exc}", file=sys.stderr)
        parser.print_usage(sys.stderr)
        return EXIT_USAGE
    except (UnknownFrameError, FrameSyntaxError, OSError) as exc:
        print(f"paralex: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except NotFlatError as exc:
        print(f"paralex: frame is not flat: {exc}", file=sys.stderr)
        return EXIT_NOT_FLAT
    except (ParalexError, ValueError, np.linalg.LinAlgError) as exc:
        print(f"paralex: evaluation failed: {exc}", file=sys.stderr)
        return EXIT_EVAL


if __name__ == "__main__":
    sys.exit(main())
