"""Command line entry point.

Every command prints one JSON report to standard output. Reports are
deterministic for fixed inputs and seed: floats are written with 17
significant digits and keys keep insertion order.

Exit codes: 0 success, 1 target not reached, 2 precondition failure,
3 numerical anomaly, 4 parse error.
"""
from __future__ import annotations

import argparse
import hashlib
import json
import math
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .bifurcation import build_sheets, trace_segment
from .binormal import KINDS, enumerate_binormals
from .errors import ParseError, PolynormError, PreconditionError
from .geom import DEFAULT_EPS_ANG, DEFAULT_EPS_REL, Tolerance
from .normals import normals_from, sheet_clearance
from .polytope import Polytope, build_hull, is_generic, perturb_generic, validate_genericity
from .search import chebyshev_center, find_high_normal_point
from .spherical import classify_skew, minimal_bigon, vertex_figure

SCHEMA = 1
COMMANDS = ("normals", "verify", "skew", "binormals", "sheets", "chebyshev", "perturb")
AUTO_PERTURB_DEFAULT = {"verify": True, "skew": True, "binormals": True, "sheets": True,
                        "normals": False, "chebyshev": False, "perturb": False}


# ---------------------------------------------------------------------------
# input

def _parse_off(text: str) -> np.ndarray:
    lines = []
    for raw in text.splitlines():
        line = raw.split("#", 1)[0].strip()
        if line:
            lines.append(line)
    if not lines:
        raise ParseError("empty OFF file")
    head = lines[0].split()
    if not head[0].endswith("OFF"):
        raise ParseError("missing OFF header")
    rest = head[1:]
    body = lines[1:]
    if not rest:
        if not body:
            raise ParseError("missing OFF counts line")
        rest = body[0].split()
        body = body[1:]
    try:
        n_verts = int(rest[0])
    except (ValueError, IndexError):
        raise ParseError("malformed OFF counts line") from None
    if len(body) < n_verts:
        raise ParseError(f"OFF file declares {n_verts} vertices but has {len(body)} rows")
    try:
        pts = np.array([[float(x) for x in row.split()[:3]] for row in body[:n_verts]])
    except ValueError:
        raise ParseError("non-numeric vertex coordinate") from None
    if pts.ndim != 2 or pts.shape[1] != 3:
        raise ParseError("vertex rows need three coordinates")
    return pts


def _parse_json(text: str) -> np.ndarray:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON: {exc}") from None
    verts = doc.get("vertices") if isinstance(doc, dict) else doc
    try:
        pts = np.array(verts, dtype=float)
    except (TypeError, ValueError):
        raise ParseError("vertices must be a list of numeric triples") from None
    if pts.ndim != 2 or pts.shape[1] != 3:
        raise ParseError("vertices must be a list of numeric triples")
    return pts


def read_points(path, fmt: str | None = None) -> tuple[np.ndarray, bytes]:
    """Vertex coordinates of an OFF or JSON polytope file and the raw bytes."""
    try:
        data = Path(path).read_bytes()
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc.strerror}") from None
    try:
        text = data.decode("utf-8")
    except UnicodeDecodeError:
        raise ParseError("file is not UTF-8 text") from None
    if fmt is None:
        suffix = Path(path).suffix.lower()
        if suffix == ".off":
            fmt = "off"
        elif suffix == ".json":
            fmt = "json"
        else:
            fmt = "json" if text.lstrip()[:1] in "[{" else "off"
    if fmt == "off":
        return _parse_off(text), data
    if fmt == "json":
        return _parse_json(text), data
    raise ParseError(f"unknown format {fmt!r}")


def load_polytope(path, fmt: str | None = None, eps_rel: float = DEFAULT_EPS_REL,
                  eps_ang: float = DEFAULT_EPS_ANG) -> Polytope:
    """Parse a polytope file and rebuild its hull; faces in the file are ignored."""
    pts, _ = read_points(path, fmt)
    return build_hull(pts, Tolerance.for_points(pts, rel=eps_rel, eps_ang=eps_ang))


# ---------------------------------------------------------------------------
# serialization

def _fmt_float(x: float) -> str:
    if not math.isfinite(x):
        return "null"
    s = "%.17g" % x
    if not any(c in s for c in ".en"):
        s += ".0"
    return s


def to_json(obj, indent: int = 2, _level: int = 0) -> str:
    """Deterministic JSON with 17-significant-digit floats."""
    pad = "\n" + " " * (indent * (_level + 1))
    end = "\n" + " " * (indent * _level)
    if obj is None or isinstance(obj, (bool, np.bool_)):
        return json.dumps(None if obj is None else bool(obj))
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return _fmt_float(float(obj))
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, np.ndarray):
        obj = obj.tolist()
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [json.dumps(str(k)) + ": " + to_json(v, indent, _level + 1) for k, v in obj.items()]
        return "{" + pad + ("," + pad).join(items) + end + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        if all(isinstance(v, (int, float, np.integer, np.floating)) and not isinstance(v, bool) for v in obj):
            return "[" + ", ".join(to_json(v) for v in obj) + "]"
        return "[" + pad + ("," + pad).join(to_json(v, indent, _level + 1) for v in obj) + end + "]"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def _count(c) -> dict:
    return c.as_dict()


def _point(text: str) -> np.ndarray:
    try:
        vals = [float(x) for x in text.split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad point {text!r}") from None
    if len(vals) != 3:
        raise argparse.ArgumentTypeError("a point needs three comma-separated coordinates")
    return np.array(vals)


def _segment(text: str) -> tuple[np.ndarray, np.ndarray]:
    parts = text.split(":")
    if len(parts) != 2:
        raise argparse.ArgumentTypeError("segment is x,y,z:x,y,z")
    return _point(parts[0]), _point(parts[1])


# ---------------------------------------------------------------------------
# commands

class _Context:
    def __init__(self, args, P: Polytope, raw: bytes):
        self.args = args
        self.P = P
        self.raw = raw
        self.warnings: list[str] = []
        self.exit_code = 0
        self.plot_dir = Path(args.plot) if args.plot else None

    def generic(self) -> Polytope:
        """The input, perturbed into general position when allowed and needed."""
        P = self.P
        if is_generic(P):
            return P
        if not self.args.auto_perturb:
            rules = sorted(validate_genericity(P).rules_violated())
            self.warnings.append("polytope is not generic: " + ", ".join(rules))
            return P
        Q = perturb_generic(P, self.args.seed, self.args.magnitude)
        self.warnings.append(f"input perturbed to a generic polytope "
                             f"(seed {self.args.seed}, magnitude {self.args.magnitude})")
        return Q


def _records(records) -> list[dict]:
    return [{"type": r.morse_type.value, "feature": [r.feature[0].value, r.feature[1]],
             "base": r.base, "squared_distance": r.squared_distance} for r in records]


def cmd_normals(ctx: _Context) -> dict:
    P = ctx.generic()
    y = ctx.args.point
    records, count = normals_from(P, y)
    if ctx.plot_dir:
        from .plots import write_csv
        write_csv(ctx.plot_dir / "normals.csv", ["type", "feature", "id", "x", "y", "z", "squared_distance"],
                  [(r.morse_type.value, r.feature[0].value, r.feature[1], *map(float, r.base),
                    r.squared_distance) for r in records])
    return {"point": y, "count": _count(count), "clearance": sheet_clearance(P, y),
            "normals": _records(records)}


def _trajectory(rep) -> dict | None:
    if rep is None:
        return None
    return {"start": rep.start, "end": rep.end, "outcome": rep.outcome, "case": rep.case,
            "eps": rep.eps, "rerouted": rep.rerouted,
            "events": [{"t": e.t, "sheet": e.sheet, "color": e.color, "kind": e.kind, "pair": e.pair,
                        "total_after": e.count_after.total} for e in rep.events],
            "cells": [{"t0": lo, "t1": hi, "total": c.total} for lo, hi, c in rep.cells],
            "warnings": list(rep.warnings)}


def cmd_verify(ctx: _Context) -> dict:
    a = ctx.args
    res = find_high_normal_point(ctx.P, a.target, seed=a.seed, auto_perturb=a.auto_perturb,
                                 perturb_magnitude=a.magnitude, threads=a.threads)
    ctx.warnings.extend(res.warnings)
    payload = {
        "success": res.success,
        "target": res.target,
        "perturbed": res.perturbed,
        "vertices": res.polytope.vertices if res.perturbed else None,
        "witness": {"point": res.witness, "count": _count(res.count), "strategy": res.strategy,
                    "clearance": res.clearance, "normals": _records(res.normals)},
        "trajectory": _trajectory(res.trajectory),
        "attempts": res.attempts,
    }
    if a.oracle:
        from .oracle import mesh_critical_points
        checks = []
        for h in (1 / 100, 1 / 200):
            rep = mesh_critical_points(res.polytope, res.witness, h)
            checks.append({"resolution": h, "counts": list(rep.counts), "issues": list(rep.issues),
                           "agrees": rep.counts == (res.count.n_min, res.count.n_saddle, res.count.n_max)})
        payload["oracle"] = checks
        if not all(c["agrees"] for c in checks):
            ctx.warnings.append("mesh oracle disagrees with the engine count")
    if ctx.plot_dir:
        from .plots import count_profile_svg, write_csv
        write_csv(ctx.plot_dir / "witness_normals.csv", ["type", "feature", "id", "x", "y", "z"],
                  [(r.morse_type.value, r.feature[0].value, r.feature[1], *map(float, r.base))
                   for r in res.normals])
    if ctx.plot_dir and res.trajectory is not None:
        tr = res.trajectory
        count_profile_svg(ctx.plot_dir / "count_profile.svg", tr.cells, tr.events)
        write_csv(ctx.plot_dir / "events.csv", ["t", "sheet", "color", "kind", "pair", "total_after"],
                  [(e.t, e.sheet, e.color, e.kind, e.pair, e.count_after.total) for e in tr.events])
    if not res.success:
        ctx.exit_code = 1
    return payload


def cmd_skew(ctx: _Context) -> dict:
    P = ctx.generic()
    out = []
    for v in range(P.n_vertices):
        Q = vertex_figure(P, v)
        rep = classify_skew(Q, P.tol)
        big = minimal_bigon(Q, P.tol)
        out.append({"vertex": v, "verdict": rep.verdict, "method": rep.method,
                    "acute_angles": rep.acute_vertices, "interior_angles": Q.interior_angles(),
                    "certificate": rep.certificate, "short_maxima": rep.short_maxima,
                    "bigon": {"width": big.width, "acute": big.is_acute, "kind": big.kind},
                    "warnings": rep.warnings})
        if ctx.plot_dir:
            from .plots import spherical_chart_svg
            spherical_chart_svg(ctx.plot_dir / f"vertex_{v}.svg", Q.vertices,
                                [rep.certificate] if rep.certificate is not None else [],
                                title=f"vertex {v}: {rep.verdict}")
    n_nice = sum(r["verdict"] == "nice" for r in out)
    return {"n_vertices": P.n_vertices, "n_nice": n_nice, "n_skew": len(out) - n_nice,
            "vertices": out}


def cmd_binormals(ctx: _Context) -> dict:
    P = ctx.generic()
    bins = enumerate_binormals(P)
    return {"counts": bins.kind_counts(), "euler_sum": bins.euler_sum(), "dropped": bins.dropped,
            "binormals": [{"kind": b.kind, "start": [b.start[0][0], b.start[0][1], b.start[1]],
                           "end": [b.end[0][0], b.end[0][1], b.end[1]],
                           "direction": b.direction, "length": b.length} for b in bins],
            "kinds": list(KINDS)}


def cmd_sheets(ctx: _Context) -> dict:
    P = ctx.generic()
    sheets = build_sheets(P)
    rows = [{"index": i, "color": s.color, "owner": [list(s.owner[0]), list(s.owner[1])],
             "empty": s.is_empty, "area": s.area(),
             "carrier": {"normal": s.carrier.unit_normal, "offset": s.carrier.offset}}
            for i, s in enumerate(sheets)]
    payload = {"n_sheets": len(sheets), "n_nonempty": sum(not s.is_empty for s in sheets), "sheets": rows}
    if ctx.args.segment is not None:
        a, b = ctx.args.segment
        tr = trace_segment(P, sheets, a, b)
        payload["segment"] = {"start": a, "end": b,
                              "events": [{"t": e.t, "sheet": e.sheet, "color": e.color, "kind": e.kind,
                                          "pair": e.pair, "before": _count(e.count_before),
                                          "after": _count(e.count_after)} for e in tr.events],
                              "cells": [{"t0": lo, "t1": hi, "count": _count(c)} for lo, hi, c in tr.cells]}
        if ctx.plot_dir:
            from .plots import count_profile_svg
            count_profile_svg(ctx.plot_dir / "segment_profile.svg", tr.cells, tr.events)
    if ctx.plot_dir:
        from .plots import sheet_section_svg, write_csv
        sheet_section_svg(ctx.plot_dir / "sheet_section.svg", P, sheets)
        write_csv(ctx.plot_dir / "sheets.csv", ["index", "color", "empty", "area"],
                  [(r["index"], r["color"], r["empty"], r["area"]) for r in rows])
    return payload


def cmd_chebyshev(ctx: _Context) -> dict:
    P = ctx.generic()
    c, r = chebyshev_center(P)
    payload = {"center": c, "radius": r}
    try:
        _, count = normals_from(P, c)
        payload["count"] = _count(count)
    except PreconditionError as exc:
        payload["count"] = None
        ctx.warnings.append(f"centre not countable: {exc}")
    return payload


def cmd_perturb(ctx: _Context) -> dict:
    a = ctx.args
    Q = perturb_generic(ctx.P, a.seed, a.magnitude)
    payload = {"generic_input": Q is ctx.P, "vertices": Q.vertices,
               "n_vertices": Q.n_vertices, "n_edges": Q.n_edges, "n_faces": Q.n_faces}
    if a.output:
        out = Path(a.output)
        if out.suffix.lower() == ".off":
            lines = ["OFF", f"{Q.n_vertices} {Q.n_faces} {Q.n_edges}"]
            lines += [" ".join("%.17g" % x for x in p) for p in Q.vertices]
            lines += [" ".join(map(str, (len(f.vertices), *f.vertices))) for f in Q.faces]
            out.write_text("\n".join(lines) + "\n")
        else:
            out.write_text(to_json({"vertices": Q.vertices,
                                    "faces": [list(f.vertices) for f in Q.faces]}) + "\n")
        payload["output"] = str(out)
    return payload


HANDLERS = {"normals": cmd_normals, "verify": cmd_verify, "skew": cmd_skew, "binormals": cmd_binormals,
            "sheets": cmd_sheets, "chebyshev": cmd_chebyshev, "perturb": cmd_perturb}


# ---------------------------------------------------------------------------
# driver

def _default_seed() -> int:
    raw = os.environ.get("POLYNORM_SEED")
    try:
        return int(raw) if raw else 0
    except ValueError:
        return 0


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("file", help="polytope file (OFF or JSON)")
    common.add_argument("--format", choices=("off", "json"), default=None)
    common.add_argument("--seed", type=int, default=None, help="default: $POLYNORM_SEED or 0")
    common.add_argument("--eps-rel", type=float, default=DEFAULT_EPS_REL,
                        help="length tolerance relative to the bounding-box diameter")
    common.add_argument("--eps-ang", type=float, default=DEFAULT_EPS_ANG)
    common.add_argument("--threads", type=int, default=1)
    common.add_argument("--plot", metavar="DIR", default=None, help="write SVG/CSV plot files here")
    common.add_argument("--auto-perturb", action=argparse.BooleanOptionalAction, default=None)
    common.add_argument("--magnitude", type=float, default=1e-3, help="perturbation magnitude")

    p = argparse.ArgumentParser(prog="polynorm", description="Normals of convex polytopes.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)
    s = sub.add_parser("normals", parents=[common], help="all normals from an interior point")
    s.add_argument("--point", type=_point, required=True, metavar="X,Y,Z")
    s = sub.add_parser("verify", parents=[common], help="find a point with many normals")
    s.add_argument("--target", type=int, default=10)
    s.add_argument("--oracle", action="store_true", help="cross-check the witness on a boundary mesh")
    sub.add_parser("skew", parents=[common], help="nice/skew verdict for every vertex")
    sub.add_parser("binormals", parents=[common], help="enumerate binormals")
    s = sub.add_parser("sheets", parents=[common], help="bifurcation sheets")
    s.add_argument("--segment", type=_segment, default=None, metavar="A:B",
                   help="trace crossings along the segment from A to B")
    sub.add_parser("chebyshev", parents=[common], help="largest inscribed ball")
    s = sub.add_parser("perturb", parents=[common], help="projective perturbation into general position")
    s.add_argument("--output", default=None, help="write the perturbed polytope (.off or .json)")
    return p


def run(argv=None) -> tuple[dict, int]:
    """Execute one command; returns the report and the exit code."""
    args = build_parser().parse_args(argv)
    if args.seed is None:
        args.seed = _default_seed()
    if args.auto_perturb is None:
        args.auto_perturb = AUTO_PERTURB_DEFAULT[args.command]
    report = {"schema": SCHEMA, "command": args.command, "input": {"path": None, "sha256": None},
              "seed": args.seed, "tolerance": {"eps_rel": args.eps_rel, "eps_ang": args.eps_ang}}
    try:
        pts, raw = read_points(args.file, args.format)
        report["input"] = {"path": Path(args.file).name, "sha256": hashlib.sha256(raw).hexdigest()}
        P = build_hull(pts, Tolerance.for_points(pts, rel=args.eps_rel, eps_ang=args.eps_ang))
        report["tolerance"]["eps_len"] = P.tol.eps_len
        ctx = _Context(args, P, raw)
        payload = HANDLERS[args.command](ctx)
    except PolynormError as exc:
        report["error"] = {"code": exc.code, "message": str(exc)}
        report["warnings"] = []
        return report, exc.exit_code
    report["payload"] = payload
    report["warnings"] = ctx.warnings
    return report, ctx.exit_code


def main(argv=None) -> int:
    report, code = run(argv)
    sys.stdout.write(to_json(report) + "\n")
    return code


if __name__ == "__main__":
    sys.exit(main())
