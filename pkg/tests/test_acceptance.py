"""Acceptance criteria 1-10, one test each; every test prints a PASS/FAIL line."""
import itertools
import math
import random
import time
from fractions import Fraction as F

import mpmath

from whitney_sfc.analysis import (
    hilbert_compare,
    lemma21_crossover,
    lemma21_series,
    surjectivity_check,
)
from whitney_sfc.curve import (
    adjacency_report,
    fn_cube,
    fn_order,
    fn_point_recursive,
    fn_preimage,
    measure_check,
    preimage_check,
    refinement_check,
)
from whitney_sfc.exact import CubeAddress
from whitney_sfc.whitney import (
    WhitneyMap,
    build_E,
    cube_image,
    eval_p,
    shrunken_cube,
    shrunken_gap,
    shrunken_gap_closed,
    shrunken_side,
    theorem2_lift,
)

CURVE_TIME_LIMIT = 60.0  # seconds per (n, s)
WHITNEY_TIME_LIMIT = 120.0  # seconds per (m, n)
MAX_CUBES = 1 << 20
SERIES_CASES = [(2, 1, 1.5, 8), (3, 2, 1.3, 9), (3, 1, 2.5, 14)]  # (m, n, k, pinned crossover)
SERIES_OFFSET = 30
SERIES_DROP = 1e-3
PROBE_SHRINK = 0.1
PROBE_POINTS = 100
WHITNEY_CASES = [(2, 1, 5), (3, 1, 3), (3, 2, 2)]

# depth-2 quadrant placements of the planar curve, rank -> (column, row) in quarters
PLANAR_DEPTH2 = [
    (0, 0), (1, 0), (1, 1), (0, 1),
    (0, 2), (0, 3), (1, 3), (1, 2),
    (2, 2), (2, 3), (3, 3), (3, 2),
    (3, 1), (2, 1), (2, 0), (3, 0),
]
# the same labels drawn on the shrunken family, in drawing units of a 60-unit square
SHRUNKEN_DEPTH2_DRAWN = [
    (0, 0), (15, 0), (15, 15), (0, 15),
    (0, 35), (0, 50), (15, 50), (15, 35),
    (35, 35), (35, 50), (50, 50), (50, 35),
    (50, 15), (35, 15), (35, 0), (50, 0),
]


def verdict(capsys, number, title, ok, detail=""):
    with capsys.disabled():
        print(f"\n[criterion {number:2d}] {'PASS' if ok else 'FAIL'}  {title}  {detail}")
    assert ok, detail


def curve_cases():
    for n in range(1, 6):
        for s in range(1, 21):
            if n * s <= 20:
                yield n, s


def interval(k, depth):
    return CubeAddress.from_index(1, [k], depth)


def boundary_oracle(n, s, rng, cap=4096):
    """Count failures of closed-interval containment and open-cube pullback at sampled parameters."""
    count = 1 << (n * s)
    ks = range(count + 1) if count <= cap else sorted(rng.sample(range(count + 1), cap))
    ts = [F(k, count) for k in ks]
    fine = 1 << (n * (s + 1))
    if fine <= cap:
        ts += [F(k, fine) for k in range(fine + 1)]
    ts += [F(rng.randrange(1 << 30), 1 << 30) for _ in range(64)]
    bad = 0
    for t in ts:
        pt = fn_point_recursive(n, t)
        # every closed depth-s interval holding t maps into a cube holding f(t)
        k = t * count
        owners = {math.floor(k), math.ceil(k) - 1} & set(range(count))
        for j in owners:
            if not fn_cube(n, interval(j, n * s)).contains(pt):
                bad += 1
        scaled = [x * (1 << s) for x in pt]
        if all(v.denominator != 1 for v in scaled):
            delta = CubeAddress.from_index(n, [v.numerator // v.denominator for v in scaled], s)
            a = fn_preimage(n, delta)
            if not a.corner[0] <= t <= a.corner[0] + a.side:
                bad += 1
    return bad, len(ts)


def test_criterion_01_adjacency(capsys):
    worst, failures, cases = 0.0, [], 0
    for n, s in curve_cases():
        start = time.perf_counter()
        rep = adjacency_report(n, s, budget=MAX_CUBES)
        took = time.perf_counter() - start
        worst = max(worst, took)
        cases += 1
        if not rep.ok or took > CURVE_TIME_LIMIT or rep.pairs != (1 << (n * s)) - 1:
            failures.append((n, s, len(rep.violations), round(took, 2)))
    verdict(capsys, 1, "consecutive cubes share a face holding the curve vertex", not failures,
            f"cases={cases} slowest={worst:.2f}s failures={failures[:3]}")


def test_criterion_02_cube_preservation(capsys):
    failures, worst = [], 0.0
    for n, s in curve_cases():
        start = time.perf_counter()
        ref = refinement_check(n, s - 1, MAX_CUBES)
        pre = preimage_check(n, s - 1, 1, MAX_CUBES)
        took = time.perf_counter() - start
        worst = max(worst, took)
        if ref or pre or took > CURVE_TIME_LIMIT:
            failures.append((n, s, len(ref), len(pre)))
    rng = random.Random(2)
    sampled = 0
    for n in range(1, 6):
        for s in range(1, 4):
            bad, count = boundary_oracle(n, s, rng)
            sampled += count
            if bad:
                failures.append(("boundary", n, s, bad))
    verdict(capsys, 2, "refinement and preimage containment", not failures,
            f"boundary samples={sampled} slowest={worst:.2f}s failures={failures[:3]}")


def test_criterion_03_measure(capsys):
    failures = [(n, s) for n, s in curve_cases() if not measure_check(n, s, MAX_CUBES)]
    # exact lengths on a small exhaustive sweep, independent of the vectorised path
    for n, s in [(1, 6), (2, 3), (3, 2), (4, 1), (5, 1)]:
        total = F(0)
        for idx in itertools.product(range(1 << s), repeat=n):
            a = fn_preimage(n, CubeAddress.from_index(n, idx, s))
            if a.side != F(1, 1 << (n * s)):
                failures.append((n, s, idx))
            total += a.side
        if total != 1:
            failures.append((n, s, "total"))
    verdict(capsys, 3, "preimage length equals cube volume exactly", not failures, f"failures={failures[:3]}")


def test_criterion_04_planar_base_case(capsys):
    problems = []
    if fn_order(2, 1).tolist() != [[0, 0], [0, 1], [1, 1], [1, 0]]:
        problems.append("depth-1 order")
    if [tuple(r) for r in fn_order(2, 2).tolist()] != PLANAR_DEPTH2:
        problems.append("depth-2 order")
    # shrunken cubes inherit the order: compare drawn positions ordinally with exact corners
    ranks = {}
    for rank, pos in enumerate(PLANAR_DEPTH2):
        ranks[rank] = shrunken_cube(CubeAddress.from_index(2, pos, 2)).corner
    drawn_axis = sorted({c for p in SHRUNKEN_DEPTH2_DRAWN for c in p})
    exact_axis = sorted({c for p in ranks.values() for c in p})
    to_exact = dict(zip(drawn_axis, exact_axis))
    if not len(drawn_axis) == len(exact_axis) == 4:
        problems.append("shrunken axis positions")
    for rank, drawn in enumerate(SHRUNKEN_DEPTH2_DRAWN):
        if tuple(to_exact[c] for c in drawn) != ranks[rank]:
            problems.append(("shrunken", rank))
    if exact_axis != [0, F(5, 24), F(5, 8), F(5, 6)]:
        problems.append("shrunken corner values")
    # deeper orders refine the pinned depth-2 order
    for s in range(3, 7):
        coarse = [tuple(v >> (s - 2) for v in row) for row in fn_order(2, s).tolist()[:: 1 << (2 * (s - 2))]]
        if coarse != PLANAR_DEPTH2:
            problems.append(("refine", s))
    bad = hilbert_compare(6)
    if bad:
        problems.append(("hilbert", bad[:3]))
    verdict(capsys, 4, "planar orders match pinned placements and the classical recursion", not problems,
            f"problems={problems[:3]}")


def test_criterion_05_shrunken_identities(capsys):
    bad = []
    for s in range(1, 65):
        closed = F(s + 1, s * (1 << s))
        product = F(1, 1 << (s - 1))
        for j in range(2, s + 1):
            product *= 1 - F(1, j * j)
        if not shrunken_side(s) == closed == product:
            bad.append(("side", s))
        if s >= 2:
            if shrunken_side(s) != shrunken_side(s - 1) / 2 * (1 - F(1, s * s)):
                bad.append(("recurrence", s))
            expect = F(1, (s - 1) * s * (1 << (s - 1)))
            if not shrunken_gap(s) == shrunken_gap_closed(s) == expect == shrunken_side(s - 1) - 2 * shrunken_side(s):
                bad.append(("gap", s))
    verdict(capsys, 5, "shrunken side and gap closed forms for s <= 64", not bad, f"bad={bad[:3]}")


def test_criterion_06_surjectivity_and_connectivity(capsys):
    problems, timings = [], {}
    for m, n, top in WHITNEY_CASES:
        start = time.perf_counter()
        wm = WhitneyMap(m, n)
        for s in range(top + 1):
            ok, missing = surjectivity_check(wm, s)
            if not ok:
                problems.append((m, n, s, missing[:3]))
        # scalar pairing route, checked independently of the vectorised one
        images = set()
        for idx in itertools.product(range(1 << (n * top)), repeat=m):
            img = cube_image(wm, CubeAddress.from_index(m, idx, n * top))
            if img.depth != m * top:
                problems.append((m, n, "depth", idx))
            images.add(img.index)
        if len(images) != 1 << (m * n * top):
            problems.append((m, n, "scalar bijection", len(images)))
        E = build_E(wm, top)
        if not all(E.connected.values()) or len(E.connected) != n * top:
            problems.append((m, n, "connectivity", E.connected))
        timings[(m, n)] = round(time.perf_counter() - start, 2)
        if timings[(m, n)] > WHITNEY_TIME_LIMIT:
            problems.append((m, n, "time", timings[(m, n)]))
    verdict(capsys, 6, "pairing is a bijection and E is connected at every level", not problems,
            f"timings={timings} problems={problems[:3]}")


def test_criterion_07_segment_constancy(capsys):
    problems, total = [], 0
    for m, n, top in WHITNEY_CASES:
        wm = WhitneyMap(m, n, depth=30)
        E = build_E(wm, top)
        segs = E.all_segments()
        total += len(segs)
        for seg in segs:
            moved = [a for a, (u, v) in enumerate(zip(seg.start, seg.end)) if u != v]
            if moved != [seg.axis] or seg.value_start != seg.value_end or seg.value_start is None:
                problems.append((m, n, seg))
        # re-evaluate p at the ends and an interior point of a sample of segments
        for seg in segs[:: max(1, len(segs) // 200)]:
            mid = list(seg.start)
            mid[seg.axis] += seg.length / 3
            for x in (seg.start, seg.end, tuple(mid)):
                y, err = eval_p(wm, x)
                if y != seg.value_start or err != 0:
                    problems.append((m, n, "eval", x))
    verdict(capsys, 7, "joining segments move one coordinate with equal end values", not problems,
            f"segments={total} problems={problems[:3]}")


def test_criterion_08_series(capsys):
    lines, ok = [], True
    for m, n, k, pinned in SERIES_CASES:
        j0 = lemma21_crossover(m, n, k)
        vals = lemma21_series(m, n, k, range(j0, j0 + 400))
        decreasing = all(b < a for a, b in zip(vals, vals[1:]))
        drop = float(vals[SERIES_OFFSET] / vals[0])
        case_ok = j0 == pinned and decreasing and drop < SERIES_DROP
        ok &= case_ok
        lines.append(f"({m},{n},{k}) j0={j0} decreasing={decreasing} term(j0+{SERIES_OFFSET})/term(j0)={drop:.3g}")
    verdict(capsys, 8, "bound series decreases past its crossover and drops by 1e-3", ok, "; ".join(lines))


def test_criterion_09_vanishing(capsys, vanish_report_21, deep_map_21, e_points_21):
    rep = vanish_report_21
    E, pts = e_points_21
    steps_ok = rep.steps[0] == F(1, 1 << 8) and rep.steps[-1] == F(1, 1 << 24)
    shrink_ok = rep.trend["finest"] <= PROBE_SHRINK * rep.trend["coarsest"]
    monotone = rep.trend["monotone"]
    # along a joining segment every difference in its direction is exactly zero
    zero_ok = True
    with mpmath.workprec(deep_map_21.precision):
        for seg in E.all_segments()[:40]:
            base = list(seg.start)
            base[seg.axis] += seg.length / 2
            y0, _ = eval_p(deep_map_21, base)
            for e in (8, 16, 24):
                x = list(base)
                x[seg.axis] += F(1, 1 << e)
                zero_ok &= eval_p(deep_map_21, x)[0] == y0
    ok = len(pts) >= PROBE_POINTS and steps_ok and shrink_ok and monotone and zero_ok
    env = ", ".join(f"{v:.3g}" for v in rep.envelope()[:6])
    verdict(capsys, 9, "difference ratios near E shrink monotonically", ok,
            f"points={len(pts)} quotient={rep.trend['quotient']:.3g} monotone={monotone} "
            f"zeros={zero_ok} envelope[:6]=[{env}]")


def test_criterion_10_product_lift(capsys):
    pm = theorem2_lift(3, 2, 1)
    problems = []
    for s in range(1, 4):
        missing = pm.image_cover(s)
        if missing:
            problems.append((s, missing[:3]))
    rng = random.Random(10)
    for _ in range(50):
        x = tuple(F(rng.randrange(1 << 12), 1 << 12) for _ in range(3))
        y, err = pm(x)
        inner_y, inner_err = eval_p(pm.inner, x[1:])
        if y[0] != x[0] or y[1:] != inner_y or err != inner_err:
            problems.append(("identity", x))
    verdict(capsys, 10, "product map covers the target and keeps the identity block exact", not problems,
            f"problems={problems[:3]}")
