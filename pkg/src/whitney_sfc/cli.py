"""Command line interface ``whitney-sfc``.

Exit codes: 0 when every check passes, 1 on a property violation, 2 on
usage or configuration errors.  Output depends only on the arguments.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
from fractions import Fraction

from . import analysis, curve as cv, whitney as wh
from .exact import BudgetExceeded, CubeAddress, DomainError, ShapeError, format_fraction, to_fraction

FORMATS = ("csv", "json", "svg")


class UsageError(Exception):
    pass


def _default_budget() -> int:
    return int(os.environ.get("WHITNEY_SFC_BUDGET", cv.DEFAULT_BUDGET))


def _fr(q) -> str:
    return format_fraction(Fraction(q))


def _vec(v) -> list[str]:
    return [_fr(x) if isinstance(x, (Fraction, int)) else str(x) for x in v]


def _check(name: str, ref: str, ok: bool, detail) -> dict:
    return {"name": name, "paper_ref": ref, "status": "pass" if ok else "fail", "detail": detail}


def _config(args) -> dict:
    keys = ("n", "m", "depth", "budget", "precision", "seed", "format", "k", "points")
    return {k: getattr(args, k) for k in keys if getattr(args, k, None) is not None}


def _emit(args, text: str) -> list[str]:
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        return [args.out]
    sys.stdout.write(text)
    return []


def _report(args, command: str, checks: list[dict], artifacts=()) -> int:
    doc = {"command": command, "config": _config(args), "checks": checks, "artifacts": list(artifacts)}
    _emit(args, json.dumps(doc, indent=2, sort_keys=False) + "\n")
    return 0 if all(c["status"] == "pass" for c in checks) else 1


# -- curve commands ---------------------------------------------------------------------------


def _svg_polyline(points, size=512, extra="") -> str:
    pts = " ".join(f"{x:.6f},{size - y:.6f}" for x, y in points)
    return (
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}" viewBox="0 0 {size} {size}">\n'
        f'<rect x="0" y="0" width="{size}" height="{size}" fill="none" stroke="#999"/>\n'
        f'<polyline points="{pts}" fill="none" stroke="#1f4e9c" stroke-width="1"/>\n'
        f"{extra}</svg>\n"
    )


def cmd_curve_order(args) -> int:
    n, s = args.n, args.depth
    order = cv.fn_order(n, s, args.budget)
    fmt = args.format or "csv"
    if fmt == "svg":
        if n != 2:
            raise UsageError("svg output needs --n 2")
        size = 512
        scale = size / (1 << s)
        pts = [((i + 0.5) * scale, (j + 0.5) * scale) for i, j in order.tolist()]
        _emit(args, _svg_polyline(pts, size))
        return 0
    rows = []
    side = Fraction(1, 1 << s)
    for k, idx in enumerate(order.tolist()):
        addr = CubeAddress.from_index(n, idx, s)
        rows.append(
            {
                "rank": k,
                "digits": " ".join(map(str, addr.digits)),
                "corner": [_fr(Fraction(i, 1 << s)) for i in idx],
                "side": _fr(side),
            }
        )
    if fmt == "json":
        _emit(args, json.dumps(rows, indent=1) + "\n")
        return 0
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["rank", "digits"] + [f"x{a}" for a in range(n)] + ["side"])
    for r in rows:
        w.writerow([r["rank"], r["digits"]] + r["corner"] + [r["side"]])
    _emit(args, buf.getvalue())
    return 0


def curve_checks(n: int, s: int, budget: int | None) -> list[dict]:
    checks = []
    trans = cv.curve(n).t
    problems = cv.check_continuity(trans)
    checks.append(_check("transition_continuity", "entry/exit corner chaining", not problems, problems[:5]))
    adj = cv.adjacency_report(n, s, budget)
    checks.append(
        _check("adjacency", "consecutive cubes share a face holding the curve vertex", adj.ok,
               {"pairs": adj.pairs, "violations": adj.violations[:5]})
    )
    checks.append(_check("measure", "preimage length equals volume", cv.measure_check(n, s, budget), {}))
    if s >= 1:
        ref = cv.refinement_check(n, s - 1, budget)
        checks.append(_check("refinement", "children stay inside the parent cube", not ref, ref[:5]))
        pre = cv.preimage_check(n, s - 1, 1, budget)
        checks.append(_check("preimage", "open cubes pull back into one interval", not pre, pre[:5]))
    order = cv.fn_order(n, s, budget)
    back = cv.curve(n).rank_array(order, s)
    ok = bool((back == list(range(len(order)))).all())
    checks.append(_check("codec_roundtrip", "encode/decode bijection", ok, {}))
    if n == 2:
        bad = analysis.hilbert_compare(s)
        checks.append(_check("hilbert_oracle", "classical Hilbert recursion up to isometry", not bad, bad[:5]))
    return checks


def cmd_curve_verify(args) -> int:
    return _report(args, "curve verify", curve_checks(args.n, args.depth, args.budget))


def _parse_point(text: str) -> list[Fraction]:
    try:
        return [to_fraction(p) for p in text.split(",")]
    except DomainError as exc:
        raise UsageError(str(exc)) from exc


def cmd_curve_encode(args) -> int:
    pt = _parse_point(args.point)
    if len(pt) != args.n:
        raise UsageError(f"point needs {args.n} coordinates")
    print(cv.encode_index(args.n, pt, args.depth))
    return 0


def cmd_curve_decode(args) -> int:
    addr = cv.decode_index(args.n, args.rank, args.depth)
    print(" ".join(map(str, addr.digits)))
    print(",".join(_fr(c) for c in addr.corner))
    return 0


# -- whitney commands -------------------------------------------------------------------------


def _wm(args, depth=None) -> wh.WhitneyMap:
    if args.m is None or args.n is None:
        raise UsageError("--m and --n are required")
    if not args.m > args.n >= 1:
        raise UsageError(f"need m > n >= 1, got m={args.m}, n={args.n}")
    return wh.WhitneyMap(args.m, args.n, depth if depth is not None else args.depth, args.precision)


def _segment_json(seg: wh.SegmentL) -> dict:
    return {
        "start": _vec(seg.start),
        "end": _vec(seg.end),
        "axis": seg.axis,
        "value_start": _vec(seg.value_start),
        "value_end": _vec(seg.value_end),
    }


def cmd_whitney_build(args) -> int:
    wm = _wm(args)
    E = wh.build_E(wm, args.depth, args.budget)
    fmt = args.format or "json"
    if fmt == "svg":
        if wm.m != 2:
            raise UsageError("svg output needs --m 2")
        size = 512
        parts = []
        for cube in E.skeleton:
            x, y = (float(c) * size for c in cube.corner)
            w = float(cube.side) * size
            parts.append(
                f'<rect x="{x:.6f}" y="{size - y - w:.6f}" width="{w:.6f}" height="{w:.6f}" '
                'fill="#dde6f5" stroke="#1f4e9c" stroke-width="0.3"/>\n'
            )
        for seg in E.all_segments():
            (x0, y0), (x1, y1) = [(float(a) * size, size - float(b) * size) for a, b in (seg.start, seg.end)]
            parts.append(
                f'<line x1="{x0:.6f}" y1="{y0:.6f}" x2="{x1:.6f}" y2="{y1:.6f}" stroke="#c0392b" stroke-width="0.8"/>\n'
            )
        _emit(
            args,
            f'<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}" viewBox="0 0 {size} {size}">\n'
            + "".join(parts)
            + "</svg>\n",
        )
        return 0
    if fmt != "json":
        raise UsageError("whitney build writes json or svg")
    doc = {
        "m": wm.m,
        "n": wm.n,
        "depth": args.depth,
        "segments": {str(s): [_segment_json(seg) for seg in segs] for s, segs in E.segments.items()},
        "skeleton": [
            {"digits": " ".join(map(str, c.addr.digits)), "corner": _vec(c.corner), "side": _fr(c.side)}
            for c in E.skeleton
        ],
        "connected": {str(s): v for s, v in E.connected.items()},
    }
    _emit(args, json.dumps(doc, indent=1) + "\n")
    return 0


def whitney_checks(wm: wh.WhitneyMap, depth: int, budget: int | None) -> list[dict]:
    checks = []
    top = max(2, wm.n * depth + 1)
    ident = all(wh.shrunken_side(s) == wh.shrunken_side_closed(s) for s in range(1, top + 1)) and all(
        wh.shrunken_gap(s) == wh.shrunken_gap_closed(s) for s in range(2, top + 1)
    )
    checks.append(_check("shrunken_identities", "side recurrence against closed forms", ident, {"up_to": top}))
    E = wh.build_E(wm, depth, budget)
    segs = E.all_segments()
    one_axis = all(sum(u != v for u, v in zip(s.start, s.end)) == 1 for s in segs)
    checks.append(_check("segments_one_axis", "segment ends differ in one coordinate", one_axis, {"segments": len(segs)}))
    const = [i for i, s in enumerate(segs) if not s.is_constant()]
    checks.append(_check("segments_constant", "equal values of p at joining segment ends", not const, const[:5]))
    conn = {str(s): v for s, v in E.connected.items()}
    checks.append(_check("connectivity", "segments join all cubes of each level", all(E.connected.values()), conn))
    surj = {}
    ok = True
    for s in range(depth + 1):
        good, missing = analysis.surjectivity_check(wm, s, budget)
        surj[str(s)] = {"covered": good, "missing": [list(m) for m in missing[:5]]}
        ok &= good
    checks.append(_check("surjectivity", "paired images cover the target cubes once", ok, surj))
    return checks


def cmd_whitney_verify(args) -> int:
    wm = _wm(args)
    return _report(args, "whitney verify", whitney_checks(wm, args.depth, args.budget))


def cmd_whitney_probe(args) -> int:
    wm = _wm(args, depth=40)
    k = args.k if args.k is not None else 0.75 * wm.m / wm.n
    if not 0 <= k < wm.m / wm.n:
        raise UsageError(f"k must lie in [0, {wm.m}/{wm.n})")
    E = wh.build_E(wm, args.depth, args.budget)
    pts = analysis.sample_e_points(E, args.points, args.seed)
    rep = analysis.vanish_probe(wm, pts, k)
    series = analysis.lemma21_series(wm.m, wm.n, k, precision=args.precision)
    j0 = analysis.lemma21_crossover(wm.m, wm.n, k, precision=args.precision)
    detail = {
        "precision_bits": args.precision,
        "steps": [_fr(h) for h in rep.steps],
        "envelope": [float(f"{e:.12e}") for e in rep.envelope()],
        "quotient": float(f"{rep.trend['quotient']:.12e}"),
        "monotone": rep.trend["monotone"],
        "decreasing": rep.trend["decreasing"],
    }
    checks = [
        _check("vanish_probe", "difference quotients of p shrink near E", rep.verdict, detail),
        _check(
            "series_crossover",
            "bound sequence decreases after its crossover",
            True,
            {"j0": j0, "first_terms": [float(f"{float(v):.12e}") for v in series[:10]]},
        ),
    ]
    return _report(args, "whitney probe", checks)


# -- entry point ---------------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--n", type=int)
    common.add_argument("--m", type=int)
    common.add_argument("--depth", type=int, default=2)
    common.add_argument("--budget", type=int, default=None)
    common.add_argument("--precision", type=int, default=128)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--format", choices=FORMATS)
    common.add_argument("--out")

    p = argparse.ArgumentParser(prog="whitney-sfc", description="Cube-preserving curves and Whitney-type maps.")
    top = p.add_subparsers(dest="group", required=True)

    c = top.add_parser("curve").add_subparsers(dest="action", required=True)
    c.add_parser("order", parents=[common]).set_defaults(func=cmd_curve_order)
    c.add_parser("verify", parents=[common]).set_defaults(func=cmd_curve_verify)
    enc = c.add_parser("encode", parents=[common])
    enc.add_argument("point", help='comma separated coordinates, e.g. "1/2,3/4"')
    enc.set_defaults(func=cmd_curve_encode)
    dec = c.add_parser("decode", parents=[common])
    dec.add_argument("rank", type=int)
    dec.set_defaults(func=cmd_curve_decode)

    w = top.add_parser("whitney").add_subparsers(dest="action", required=True)
    w.add_parser("build", parents=[common]).set_defaults(func=cmd_whitney_build)
    w.add_parser("verify", parents=[common]).set_defaults(func=cmd_whitney_verify)
    pr = w.add_parser("probe", parents=[common])
    pr.add_argument("--k", type=float)
    pr.add_argument("--points", type=int, default=20)
    pr.set_defaults(func=cmd_whitney_probe)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.budget is None:
        args.budget = _default_budget()
    if args.group == "curve" and args.n is None:
        parser.error("--n is required")
    if args.group == "curve" and args.n < 1:
        parser.error("--n must be positive")
    try:
        return args.func(args)
    except (UsageError, DomainError, ShapeError, BudgetExceeded) as exc:
        print(f"whitney-sfc: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
