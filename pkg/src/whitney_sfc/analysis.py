"""Numerical probes and independent oracles.

Difference quotients are formed from exact rational sample points; values
of ``p`` come back as Fractions or mpmath floats and are combined at the
map's working precision, so a probe never loses the tiny differences the
smooth step produces near ``E``.
"""
from __future__ import annotations

import math
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterable, Sequence

import mpmath
import numpy as np

from .curve import check_budget, fn_order
from .exact import DomainError, to_fraction
from .whitney import (
    SegmentL,
    WhitneyMap,
    _corner_of_index,
    eval_p,
    shrunken_gap_closed,
    shrunken_side,
)

__all__ = [
    "DerivOrderSet",
    "ProbeReport",
    "default_steps",
    "lambda_derivative",
    "vanish_probe",
    "lemma21_series",
    "lemma21_crossover",
    "edge_segments",
    "lemma22_probe",
    "lemma23_probe",
    "sample_e_points",
    "surjectivity_check",
    "hilbert_oracle",
    "hilbert_isometry",
    "hilbert_compare",
]


@dataclass(frozen=True)
class DerivOrderSet:
    """Orders ``{0, 1, .., [k], k, k - 1, .., k - [k]}`` relevant to smoothness ``k``."""

    k: float

    @property
    def integer_part(self) -> list[int]:
        return list(range(int(math.floor(self.k)) + 1))

    @property
    def fractional_part(self) -> list[float]:
        return [self.k - i for i in range(int(math.floor(self.k)) + 1)]

    @property
    def entries(self) -> list[float]:
        return sorted(set(map(float, self.integer_part)) | set(self.fractional_part))


@dataclass
class ProbeReport:
    """Samples ``(point, h, ratio)`` plus a summary of how ratios shrink with ``h``.

    ``trend`` holds, per step size, the largest ratio over all points
    (``envelope``), the coarsest and finest envelope values, their quotient,
    the least-squares slope of ``log2(envelope)`` against ``log2(h)`` and
    whether the envelope is non-increasing as ``h`` shrinks, allowing a
    relative rise of ``noise`` (``monotone``).  ``decreasing`` only asks for
    the shrink factor and a positive fitted slope, so it tolerates
    oscillation.  ``verdict`` requires the finest envelope to be at most
    ``shrink`` times the coarsest and the monotone envelope.
    """

    samples: list[tuple]
    steps: list[Fraction]
    trend: dict = field(default_factory=dict)
    verdict: bool = False
    shrink: float = 0.1
    noise: float = 0.0
    notes: list[str] = field(default_factory=list)

    def envelope(self) -> list[float]:
        return self.trend.get("envelope", [])


def default_steps(coarse: int = 8, fine: int = 24) -> list[Fraction]:
    return [Fraction(1, 1 << e) for e in range(coarse, fine + 1)]


def _num(v) -> mpmath.mpf:
    if isinstance(v, Fraction):
        return mpmath.mpf(v.numerator) / v.denominator
    return mpmath.mpf(v)


def _summarize(report: ProbeReport) -> ProbeReport:
    by_h: dict[Fraction, float] = {h: 0.0 for h in report.steps}
    for _, h, r in report.samples:
        by_h[h] = max(by_h[h], r)
    env = [by_h[h] for h in report.steps]
    coarse, fine = env[0], env[-1]
    monotone = all(b <= a * (1 + report.noise) for a, b in zip(env, env[1:]))
    pos = [(math.log2(float(h)), math.log2(e)) for h, e in zip(report.steps, env) if e > 0]
    slope = None
    if len(pos) >= 2:
        xs, ys = np.array(pos).T
        slope = float(np.polyfit(xs, ys, 1)[0])
    quotient = fine / coarse if coarse > 0 else (0.0 if fine == 0 else math.inf)
    report.trend = {
        "envelope": env,
        "coarsest": coarse,
        "finest": fine,
        "quotient": quotient,
        "log_slope": slope,
        "monotone": monotone,
        "decreasing": bool(fine <= report.shrink * coarse and (fine == 0 or (slope is not None and slope > 0))),
    }
    report.verdict = bool(monotone and fine <= report.shrink * coarse)
    return report


def lambda_derivative(
    f: Callable,
    a: Sequence,
    axis: int,
    lam: float,
    hs: Sequence | None = None,
    bounds: tuple = (None, None),
    precision: int = 128,
) -> ProbeReport:
    """Difference quotients ``sign(t) (f(a + t e_i) - f(a)) / |t|^lam`` for ``t = +-h``.

    ``f`` takes a tuple of Fractions and returns a number (or a 1-tuple).
    The ratio stored per step is the larger absolute quotient over the sides
    that stay within ``bounds``.
    """
    if not 0 < lam <= 1:
        raise DomainError("lambda must lie in (0, 1]")
    hs = default_steps() if hs is None else [to_fraction(h) for h in hs]
    a = tuple(to_fraction(v) for v in a)
    lo, hi = bounds
    samples = []
    with mpmath.workprec(precision):
        fa = _num(_scalar(f(a)))
        for h in hs:
            best = None
            for sgn in (1, -1):
                v = a[axis] + sgn * h
                if (lo is not None and v < lo) or (hi is not None and v > hi):
                    continue
                b = a[:axis] + (v,) + a[axis + 1:]
                q = sgn * (_num(_scalar(f(b))) - fa) / mpmath.power(_num(h), lam)
                best = abs(q) if best is None else max(best, abs(q))
            if best is None:
                raise DomainError(f"step {h} leaves the domain on both sides")
            samples.append((a, h, float(best)))
    return _summarize(ProbeReport(samples, list(hs)))


def _scalar(v):
    if isinstance(v, tuple) and len(v) == 2 and isinstance(v[1], float) and isinstance(v[0], tuple):
        v = v[0]
    if isinstance(v, (tuple, list)):
        if len(v) != 1:
            raise DomainError("expected a scalar-valued function")
        return v[0]
    return v


def _forward_difference(fvals: list, order: int):
    return sum((-1) ** (order - i) * math.comb(order, i) * fvals[i] for i in range(order + 1))


def vanish_probe(
    wm: WhitneyMap,
    points: Iterable[Sequence],
    k: float,
    hs: Sequence | None = None,
    depth: int | None = None,
    mixed: bool | None = None,
    shrink: float = 0.1,
    noise: float = 0.0,
    axes: Sequence[int] | None = None,
) -> ProbeReport:
    """Finite differences of ``p`` of orders ``1 .. max(1, ceil(k))`` divided by ``h^k``.

    For every point, step ``h`` and coordinate function the stored ratio is
    the largest ``|Delta^o_h p_r| / h^k`` over orders ``o``, axes and the
    forward/backward stencils that stay inside ``[0, 1]^m``.  Mixed second
    differences are added for the small cases ``n = 1, m <= 3`` unless
    ``mixed`` says otherwise.  ``axes`` restricts the probed directions.
    """
    if not 0 <= k < wm.m / wm.n:
        raise DomainError(f"k must lie in [0, {wm.m}/{wm.n})")
    hs = default_steps() if hs is None else [to_fraction(h) for h in hs]
    orders = list(range(1, max(1, math.ceil(k)) + 1))
    if mixed is None:
        mixed = wm.n == 1 and wm.m <= 3
    cap = depth if depth is not None else wm.depth
    m = wm.m
    axes = list(range(m)) if axes is None else list(axes)
    samples = []
    worst_err = 0.0

    def p(pt):
        nonlocal worst_err
        y, err = eval_p(wm, pt, cap)
        worst_err = max(worst_err, err)
        return [_num(v) for v in y]

    with mpmath.workprec(wm.precision):
        for x in points:
            x = tuple(to_fraction(v) for v in x)
            for h in hs:
                hk = mpmath.power(_num(h), k)
                best = mpmath.mpf(0)
                for axis in axes:
                    for sgn in (1, -1):
                        top = max(orders)
                        end = x[axis] + sgn * top * h
                        if not 0 <= end <= 1:
                            continue
                        vals = [p(x[:axis] + (x[axis] + sgn * i * h,) + x[axis + 1:]) for i in range(top + 1)]
                        for o in orders:
                            for r in range(wm.n):
                                d = _forward_difference([v[r] for v in vals[: o + 1]], o)
                                best = max(best, abs(d) / hk)
                if mixed and max(orders) >= 2:
                    for i in axes:
                        for j in [a for a in axes if a > i]:
                            for si in (1, -1):
                                for sj in (1, -1):
                                    xi, xj = x[i] + si * h, x[j] + sj * h
                                    if not (0 <= xi <= 1 and 0 <= xj <= 1):
                                        continue
                                    def at(di, dj):
                                        pt = list(x)
                                        pt[i] += di
                                        pt[j] += dj
                                        return p(tuple(pt))
                                    f00, f10, f01, f11 = at(0, 0), at(si * h, 0), at(0, sj * h), at(si * h, sj * h)
                                    for r in range(wm.n):
                                        d = f11[r] - f10[r] - f01[r] + f00[r]
                                        best = max(best, abs(d) / hk)
                samples.append((x, h, float(best)))
    rep = _summarize(ProbeReport(samples, list(hs), shrink=shrink, noise=noise))
    rep.trend["max_truncation_error"] = worst_err
    return rep


def sample_e_points(E, count: int, seed: int = 0) -> list[tuple[Fraction, ...]]:
    """``count`` segment ends drawn from ``E`` by a seeded generator (repeats allowed)."""
    rng = random.Random(seed)
    segs = E.all_segments()
    if not segs:
        raise DomainError("E has no segments to sample")
    pts = []
    for _ in range(count):
        seg = rng.choice(segs)
        pts.append(seg.start if rng.random() < 0.5 else seg.end)
    return pts


# -- bound sequences -----------------------------------------------------------------------


def lemma21_series(m: int, n: int, k: float, js: Iterable[int] | None = None, precision: int = 200) -> list:
    """Majorant ``sqrt(n) 2^(1 - jm) / gap((j+1)n)^k`` of the image diameter over the gap power.

    ``gap(s) = S_{s-1} - 2 S_s = 1 / ((s-1) s 2^(s-1))`` is exact; the
    power is taken in mpmath at ``precision`` bits.  By default ``j`` runs
    from the first index with ``(j+1) n >= 2`` for 60 terms.
    """
    if not 0 <= k < m / n:
        raise DomainError(f"k must lie in [0, {m}/{n})")
    start = 1 if n == 1 else 0
    js = range(start, start + 60) if js is None else js
    out = []
    with mpmath.workprec(precision):
        for j in js:
            s = (j + 1) * n
            if s < 2:
                raise DomainError(f"j={j} gives no gap for n={n}")
            gap = shrunken_gap_closed(s)
            num = mpmath.sqrt(n) * mpmath.mpf(2) ** (1 - j * m)
            out.append(num / mpmath.power(mpmath.mpf(gap.numerator) / gap.denominator, k))
    return out


def lemma21_crossover(m: int, n: int, k: float, horizon: int = 400, precision: int = 200) -> int:
    """First ``j`` after which the majorant decreases strictly up to ``horizon``."""
    start = 1 if n == 1 else 0
    js = list(range(start, start + horizon))
    vals = lemma21_series(m, n, k, js, precision)
    last_rise = None
    for i in range(len(vals) - 1):
        if not vals[i + 1] < vals[i]:
            last_rise = i
    return js[0] if last_rise is None else js[last_rise + 1]


def edge_segments(wm: WhitneyMap, j: int, limit: int | None = None) -> list[SegmentL]:
    """Segments of ``B_1``: pieces of edges of depth ``jn`` shrunken cubes crossing gaps.

    Along each edge the ``n`` levels below the cube leave ``2^n - 1`` gaps;
    each gap is spanned by one segment between two sub-cube vertices.
    """
    m, n = wm.m, wm.n
    d = j * n
    cells = 1 << (m * d)
    check_budget(cells, None)
    side = shrunken_side(d + 1)
    out = []
    for flat in range(cells):
        idx = [0] * m
        for b in range(d):
            for a in range(m):
                idx[a] = (idx[a] << 1) | ((flat >> (m * (d - 1 - b) + (m - 1 - a))) & 1)
        lo = [_corner_of_index(i, d) for i in idx]
        for a in range(m):
            others = [i for i in range(m) if i != a]
            gaps = _gaps_1d(lo[a], d, n)
            for mask in range(1 << (m - 1)):
                base = list(lo)
                for t, i in enumerate(others):
                    base[i] = lo[i] + ((mask >> t) & 1) * side
                for g0, g1 in gaps:
                    start, end = list(base), list(base)
                    start[a], end[a] = g0, g1
                    out.append(SegmentL(tuple(start), tuple(end), a))
                    if limit is not None and len(out) >= limit:
                        return out
    return out


def _gaps_1d(lo: Fraction, d: int, levels: int) -> list[tuple[Fraction, Fraction]]:
    out = []
    stack = [(lo, d, 0)]
    while stack:
        l, dd, k = stack.pop()
        if k == levels:
            continue
        s_cur, s_child = shrunken_side(dd + 1), shrunken_side(dd + 2)
        out.append((l + s_child, l + s_cur - s_child))
        stack.append((l, dd + 1, k + 1))
        stack.append((l + s_cur - s_child, dd + 1, k + 1))
    return sorted(out)


def lemma22_probe(
    wm: WhitneyMap, segments: Sequence[tuple[int, SegmentL]], k: float, depth: int | None = None
) -> ProbeReport:
    """Ratios ``|p(x'') - p(x')| / |L|^k`` for segments tagged with their cube level ``j``.

    Each sample is ``(segment, j, ratio)``; the report also compares each
    ratio with the majorant at ``j`` and with the majorant built on the
    smallest gap actually crossed inside a depth ``jn`` cube,
    ``gap((j+1)n + 1)``.
    """
    samples = []
    notes = []
    cap = wm.depth if depth is None else depth
    series_ok = shifted_ok = True
    worst_series = worst_shifted = 0.0
    with mpmath.workprec(wm.precision):
        for j, seg in segments:
            if seg.value_start is None:
                y0, _ = eval_p(wm, seg.start, cap)
                y1, _ = eval_p(wm, seg.end, cap)
            else:
                y0, y1 = seg.value_start, seg.value_end
            diff = max((abs(_num(a) - _num(b)) for a, b in zip(y0, y1)), default=mpmath.mpf(0))
            if all(a == b for a, b in zip(y0, y1)):
                diff = mpmath.mpf(0)
            ratio = diff / mpmath.power(_num(seg.length), k) if k else diff
            samples.append((seg, j, float(ratio)))
            if k < wm.m / wm.n and (j + 1) * wm.n >= 2:
                bound = lemma21_series(wm.m, wm.n, k, [j], wm.precision)[0]
                g = shrunken_gap_closed((j + 1) * wm.n + 1)
                shifted = mpmath.sqrt(wm.n) * mpmath.mpf(2) ** (1 - j * wm.m) / mpmath.power(_num(g), k)
                worst_series = max(worst_series, float(ratio / bound))
                worst_shifted = max(worst_shifted, float(ratio / shifted))
                series_ok &= ratio <= bound
                shifted_ok &= ratio <= shifted
    rep = ProbeReport(samples, sorted({s[1] for s in samples}))
    rep.trend = {
        "bounded_by_series": series_ok,
        "bounded_by_smallest_gap": shifted_ok,
        "max_ratio_over_series": worst_series,
        "max_ratio_over_smallest_gap_bound": worst_shifted,
    }
    per_level: dict[int, float] = {}
    for _, j, r in samples:
        per_level[j] = max(per_level.get(j, 0.0), r)
    rep.trend["per_level"] = per_level
    levels = sorted(per_level)
    rep.trend["monotone"] = all(per_level[b] <= per_level[a] for a, b in zip(levels, levels[1:]))
    rep.verdict = bool(shifted_ok)
    if not series_ok:
        notes.append("a ratio exceeds the majorant indexed at the cube level")
    rep.notes = notes
    return rep


def lemma23_probe(
    wm: WhitneyMap,
    x0: Sequence,
    axis: int,
    k: float,
    hs: Sequence | None = None,
    depth: int | None = None,
    shrink: float = 0.1,
) -> ProbeReport:
    """``|p(x) - p(x0)| / |x_i - x0_i|^k`` along an axis-parallel approach to ``x0``."""
    hs = default_steps() if hs is None else [to_fraction(h) for h in hs]
    x0 = tuple(to_fraction(v) for v in x0)
    cap = wm.depth if depth is None else depth
    samples = []
    with mpmath.workprec(wm.precision):
        y0, _ = eval_p(wm, x0, cap)
        for h in hs:
            v = x0[axis] + h if x0[axis] + h <= 1 else x0[axis] - h
            x = x0[:axis] + (v,) + x0[axis + 1:]
            y, _ = eval_p(wm, x, cap)
            if all(a == b for a, b in zip(y, y0)):
                r = 0.0
            else:
                diff = max(abs(_num(a) - _num(b)) for a, b in zip(y, y0))
                r = float(diff / mpmath.power(_num(h), k))
            samples.append((x, h, r))
    return _summarize(ProbeReport(samples, list(hs), shrink=shrink))


# -- coverage and oracles ----------------------------------------------------------------------


def surjectivity_check(wm: WhitneyMap, s: int, budget: int | None = None) -> tuple[bool, list]:
    """Whether paired images of all depth ``n*s`` shrunken cubes cover ``K^n_{ms}`` exactly once."""
    m, n = wm.m, wm.n
    check_budget(1 << (m * n * s), budget)
    grid = np.stack(np.meshgrid(*[np.arange(1 << (n * s), dtype=np.int64)] * m, indexing="ij"), axis=-1)
    ranks = wm.curve_m.rank_array(grid.reshape(-1, m), n * s)
    images, _ = wm.curve_n.index_array(ranks, m * s)
    side = 1 << (m * s)
    flat = np.zeros(images.shape[0], dtype=np.int64)
    for a in range(n):
        flat = flat * side + images[:, a]
    counts = np.bincount(flat, minlength=side**n)
    missing = np.nonzero(counts != 1)[0]
    out = []
    for f in missing[:20].tolist():
        out.append(tuple((f // side ** (n - 1 - a)) % side for a in range(n)))
    return bool(missing.size == 0), out


def hilbert_oracle(rank: int, s: int) -> tuple[int, int]:
    """Classical Hilbert index-to-cell recursion on a ``2^s x 2^s`` grid."""
    side = 1 << s
    if not 0 <= rank < side * side:
        raise DomainError("rank out of range")
    x = y = 0
    t = rank
    q = 1
    while q < side:
        rx = 1 & (t // 2)
        ry = 1 & (t ^ rx)
        if ry == 0:
            if rx == 1:
                x, y = q - 1 - x, q - 1 - y
            x, y = y, x
        x += q * rx
        y += q * ry
        t //= 4
        q *= 2
    return x, y


_SQUARE_SYMMETRIES = [
    (swap, fx, fy) for swap in (False, True) for fx in (False, True) for fy in (False, True)
]


def _apply(sym, x, y, side):
    swap, fx, fy = sym
    if swap:
        x, y = y, x
    if fx:
        x = side - 1 - x
    if fy:
        y = side - 1 - y
    return x, y


# quadrant order of the base pattern: bottom-left, top-left, top-right, bottom-right
BASE_QUADRANTS = [(0, 0), (0, 1), (1, 1), (1, 0)]


def hilbert_isometry():
    """The unique square symmetry mapping the oracle's depth-1 order onto ``BASE_QUADRANTS``."""
    found = [
        sym
        for sym in _SQUARE_SYMMETRIES
        if [_apply(sym, *hilbert_oracle(r, 1), 2) for r in range(4)] == BASE_QUADRANTS
    ]
    if len(found) != 1:
        raise AssertionError(f"expected one isometry, found {len(found)}")
    return found[0]


def hilbert_compare(max_depth: int = 6) -> list[tuple[int, int]]:
    """``(depth, rank)`` pairs where ``f_2`` and the transformed oracle disagree."""
    sym = hilbert_isometry()
    bad = []
    for s in range(1, max_depth + 1):
        order = fn_order(2, s)
        side = 1 << s
        for r in range(side * side):
            if _apply(sym, *hilbert_oracle(r, s), side) != tuple(order[r]):
                bad.append((s, r))
    return bad
