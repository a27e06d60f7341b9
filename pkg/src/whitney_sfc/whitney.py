"""Whitney-type maps ``p : [0, 1]^m -> [0, 1]^n`` built on the shrunken cube family.

The shrunken family refines ``[0, 1]^m`` like the dyadic cubes, but a cube
at depth ``d`` has side ``S_{d+1}`` with ``S_1 = 1`` and
``S_s = S_{s-1} (1 - 1/s^2) / 2``, so siblings sit in the corners of their
parent with gaps in between.  Shrunken cubes inherit the curve order of
their dyadic twins (same spatial digits).  Depth ``n*s`` shrunken cubes are
paired with depth ``m*s`` dyadic cubes of ``[0, 1]^n`` of the same rank,
which defines ``p`` on the limit set ``B_0``; on gap points ``p`` is
interpolated along axis-parallel segments with a smooth step.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field, replace
from fractions import Fraction
from functools import lru_cache
from typing import Sequence, Union

import mpmath
import numpy as np

from .curve import check_budget, curve
from .exact import CubeAddress, DomainError, ShapeError, to_fraction

log = logging.getLogger(__name__)

__all__ = [
    "shrunken_side",
    "shrunken_side_closed",
    "shrunken_gap",
    "shrunken_gap_closed",
    "shrunken_corner_1d",
    "ShrunkenCube",
    "shrunken_cube",
    "SegmentL",
    "WhitneyMap",
    "InB0Chain",
    "OnSegment",
    "DepthExhausted",
    "EGraph",
    "ProductMap",
    "cube_image",
    "corner_tail",
    "vertex_value",
    "b0_eval",
    "bump_g",
    "segment_eval",
    "locate",
    "eval_p",
    "build_E",
    "theorem2_lift",
]

Value = Union[Fraction, mpmath.mpf]

# -- the shrunken family ---------------------------------------------------------------

_SIDES = [None, Fraction(1)]


def shrunken_side(s: int) -> Fraction:
    """``S_s`` from the recurrence ``S_s = S_{s-1} (1 - 1/s^2) / 2``, ``S_1 = 1``."""
    if s < 1:
        raise DomainError("S_s is defined for s >= 1")
    while len(_SIDES) <= s:
        j = len(_SIDES)
        _SIDES.append(_SIDES[-1] * (1 - Fraction(1, j * j)) / 2)
    return _SIDES[s]


def shrunken_side_closed(s: int) -> Fraction:
    return Fraction(s + 1, s * (1 << s))


def shrunken_gap(s: int) -> Fraction:
    """Per-axis gap ``S_{s-1} - 2 S_s`` between depth ``s - 1`` siblings, ``s >= 2``."""
    if s < 2:
        raise DomainError("the gap is defined for s >= 2")
    return shrunken_side(s - 1) - 2 * shrunken_side(s)


def shrunken_gap_closed(s: int) -> Fraction:
    return Fraction(1, (s - 1) * s * (1 << (s - 1)))


def shrunken_corner_1d(bits: Sequence[int]) -> Fraction:
    """Lower end of the shrunken interval with address bits ``b_1 .. b_d``.

    A set bit at level ``i`` shifts the interval to the upper corner of its
    parent, i.e. by ``S_i - S_{i+1}``.
    """
    out = Fraction(0)
    for i, b in enumerate(bits, start=1):
        if b not in (0, 1):
            raise DomainError("bits must be 0 or 1")
        if b:
            out += shrunken_side(i) - shrunken_side(i + 1)
    return out


@lru_cache(maxsize=1 << 16)
def _corner_of_index(index: int, depth: int) -> Fraction:
    return shrunken_corner_1d([(index >> (depth - 1 - j)) & 1 for j in range(depth)])


@dataclass(frozen=True)
class ShrunkenCube:
    addr: CubeAddress
    corner: tuple[Fraction, ...]
    side: Fraction

    def vertex(self, bits: Sequence[int]) -> tuple[Fraction, ...]:
        return tuple(c + b * self.side for c, b in zip(self.corner, bits))

    def contains(self, point: Sequence[Fraction]) -> bool:
        return all(c <= x <= c + self.side for c, x in zip(self.corner, point))


def shrunken_cube(addr: CubeAddress) -> ShrunkenCube:
    d = addr.depth
    return ShrunkenCube(addr, tuple(_corner_of_index(i, d) for i in addr.index), shrunken_side(d + 1))


def shrunken_cell(point: Sequence[Fraction], depth: int) -> tuple[int, ...] | None:
    """Per-axis index of the depth-``depth`` shrunken cube holding ``point`` (None in a gap)."""
    out = []
    for x in point:
        i, lo = 0, Fraction(0)
        for d in range(depth):
            s_cur, s_child = shrunken_side(d + 1), shrunken_side(d + 2)
            if x <= lo + s_child:
                i = 2 * i
            elif x >= lo + s_cur - s_child:
                i, lo = 2 * i + 1, lo + s_cur - s_child
            else:
                return None
        out.append(i)
    return tuple(out)


# -- the map on B_0 ------------------------------------------------------------------------


@dataclass(frozen=True)
class WhitneyMap:
    """Configuration of ``p : [0, 1]^m -> [0, 1]^n``.

    ``depth`` caps the number of pairing steps (shrunken depth ``n * depth``)
    and ``precision`` is the working precision in bits for the smooth step.
    """

    m: int
    n: int
    depth: int = 8
    precision: int = 128

    def __post_init__(self):
        if not self.m > self.n >= 1:
            raise DomainError(f"need m > n >= 1, got m={self.m}, n={self.n}")
        if self.depth < 0:
            raise DomainError("depth must be non-negative")

    @property
    def curve_m(self):
        return curve(self.m)

    @property
    def curve_n(self):
        return curve(self.n)

    def __call__(self, x, depth: int | None = None):
        return eval_p(self, x, depth)


def cube_image(wm: WhitneyMap, addr: CubeAddress) -> CubeAddress:
    """Dyadic cube of ``[0, 1]^n`` paired with the shrunken cube ``addr``.

    Children are paired step by step: the ``2^(nm)`` shrunken descendants
    ``n`` levels down, ranked by the ``m``-curve inside the parent, go to
    the equally ranked descendants ``m`` levels down under the ``n``-curve.
    """
    m, n = wm.m, wm.n
    if addr.dim != m:
        raise ShapeError(f"expected a cube of dimension {m}")
    if addr.depth % n:
        raise ShapeError(f"shrunken depth {addr.depth} is not a multiple of {n}")
    tm, tn = wm.curve_m.t, wm.curve_n.t
    qm = qn = 0
    idx = [0] * n
    digits = addr.digits
    for j in range(addr.depth // n):
        k = 0
        for c in digits[j * n:(j + 1) * n]:
            d = tm.inverse[qm][c - 1]
            qm = tm.nxt[qm][d]
            k = (k << m) | d
        for i in range(m):
            d = (k >> (n * (m - 1 - i))) & (tn.base - 1)
            c = tn.child[qn][d]
            qn = tn.nxt[qn][d]
            for a in range(n):
                idx[a] = (idx[a] << 1) | ((c >> (n - 1 - a)) & 1)
    return CubeAddress.from_index(n, idx, m * (addr.depth // n))


@lru_cache(maxsize=None)
def corner_tail(m: int, state: int, corner: tuple[int, ...]) -> Fraction:
    """Relative curve parameter of a cube corner: limit of the corner sub-cube chain."""
    t = curve(m).t
    c = 0
    for b in corner:
        c = (c << 1) | b
    q, seen, digits = state, {}, []
    while q not in seen:
        seen[q] = len(digits)
        d = t.inverse[q][c]
        digits.append(d)
        q = t.nxt[q][d]
    start = seen[q]
    pre, cyc = digits[:start], digits[start:]
    base = t.base
    val = Fraction(0)
    for i, d in enumerate(pre):
        val += Fraction(d, base ** (i + 1))
    period = Fraction(0)
    for d in cyc:
        period = period * base + d
    val += period / (base ** len(cyc) - 1) / base ** len(pre)
    return val


def vertex_param(wm: WhitneyMap, addr: CubeAddress, corner: Sequence[int]) -> Fraction:
    """Parameter of the ``m``-curve at the limit of ``addr``'s corner chain."""
    cm = wm.curve_m
    rank = cm.rank(addr.index, addr.depth)
    state = cm.walk(rank, addr.depth)[1] if addr.depth else 0
    return (rank + corner_tail(wm.m, state, tuple(corner))) / (1 << (wm.m * addr.depth))


def vertex_value(wm: WhitneyMap, addr: CubeAddress, corner: Sequence[int]) -> tuple[Fraction, ...]:
    """Exact ``p`` at the ``corner`` vertex of the shrunken cube ``addr``."""
    return wm.curve_n.point(vertex_param(wm, addr, corner))


def b0_eval(wm: WhitneyMap, digits: Sequence[int], depth: int):
    """Truncated evaluation of ``p`` on the point of ``B_0`` given by spatial digits.

    Returns ``(x, y, err)``: the minimal corner of the depth ``n*depth``
    shrunken cube, the minimal corner of its image and the bound
    ``sqrt(n) * 2^(-m*depth)`` on ``|p(x) - y|``.
    """
    need = depth * wm.n
    if len(digits) < need:
        raise ShapeError(f"need at least {need} digits")
    addr = CubeAddress(wm.m, tuple(digits[:need]))
    img = cube_image(wm, addr)
    return shrunken_cube(addr).corner, img.corner, math.sqrt(wm.n) * 2.0 ** (-wm.m * depth)


# -- the smooth step and segments -----------------------------------------------------------


def _mpf(v) -> mpmath.mpf:
    if isinstance(v, Fraction):
        return mpmath.mpf(v.numerator) / v.denominator
    return mpmath.mpf(v)


def _g_inner(t):
    return mpmath.exp(-1 / t) / (mpmath.exp(-1 / t) + mpmath.exp(-1 / (1 - t)))


def bump_g(t, order: int = 0, precision: int = 128) -> Value:
    """Smooth step ``g = e(t) / (e(t) + e(1 - t))`` with ``e(t) = exp(-1/t)``.

    ``g`` and all its derivatives are 0 on ``(-inf, 0]``; ``g = 1`` on
    ``[1, inf)``.  Exact values (Fractions) are returned where they are
    known exactly, otherwise mpmath floats at ``precision`` bits.
    """
    if order < 0:
        raise DomainError("derivative order must be non-negative")
    t = to_fraction(t) if not isinstance(t, mpmath.mpf) else t
    if t <= 0:
        return Fraction(0)
    if t >= 1:
        return Fraction(1 if order == 0 else 0)
    if order == 0 and t == Fraction(1, 2):
        return Fraction(1, 2)
    with mpmath.workprec(precision):
        x = _mpf(t)
        if order == 0:
            return +_g_inner(x)
        return +mpmath.diff(_g_inner, x, order)


@dataclass(frozen=True)
class SegmentL:
    """Axis-parallel segment from ``start`` to ``end`` along ``axis``.

    ``value_start`` / ``value_end`` are the values of ``p`` at the ends (None
    until evaluated).
    """

    start: tuple[Fraction, ...]
    end: tuple[Fraction, ...]
    axis: int
    value_start: tuple | None = None
    value_end: tuple | None = None

    def __post_init__(self):
        diff = [a for a, (u, v) in enumerate(zip(self.start, self.end)) if u != v]
        if diff != [self.axis]:
            raise ShapeError(f"segment ends must differ exactly in axis {self.axis}, got {diff}")
        if self.start[self.axis] > self.end[self.axis]:
            raise ShapeError("segment start must precede its end along the axis")

    @property
    def length(self) -> Fraction:
        return self.end[self.axis] - self.start[self.axis]

    def contains(self, x: Sequence[Fraction]) -> bool:
        a = self.axis
        return all(
            (u == v if i != a else self.start[a] <= v <= self.end[a])
            for i, (u, v) in enumerate(zip(self.start, x))
        )

    def is_constant(self) -> bool:
        return self.value_start is not None and self.value_start == self.value_end


def segment_eval(seg: SegmentL, x: Sequence, precision: int = 128) -> tuple:
    """Interpolate ``p`` on a segment with the smooth step."""
    x = [to_fraction(v) for v in x]
    if not seg.contains(x):
        raise DomainError("point is not on the segment")
    if seg.value_start is None or seg.value_end is None:
        raise DomainError("segment end values are not set")
    a = seg.axis
    u = (x[a] - seg.start[a]) / seg.length
    g = bump_g(u, precision=precision)
    out = []
    with mpmath.workprec(precision):
        for v0, v1 in zip(seg.value_start, seg.value_end):
            if v0 == v1 or g == 0:
                out.append(v0)
            elif g == 1:
                out.append(v1)
            elif isinstance(g, Fraction) and isinstance(v0, Fraction) and isinstance(v1, Fraction):
                out.append(v0 + (v1 - v0) * g)
            else:
                out.append(_mpf(v0) + (_mpf(v1) - _mpf(v0)) * _mpf(g))
    return tuple(out)


# -- locating points and evaluating p -----------------------------------------------------


@dataclass(frozen=True)
class InB0Chain:
    """``x`` is the ``corner`` vertex of the last cube of ``chain``."""

    chain: tuple[CubeAddress, ...]
    corner: tuple[int, ...]


@dataclass(frozen=True)
class OnSegment:
    """``x`` lies in a gap of the last cube of ``chain``.

    ``level`` is the dimension of the lowest face of that cube holding ``x``
    and ``gap_axes`` the number of coordinates lying in gaps (1 for a
    segment between two sub-cubes, more when the segment ends are
    themselves gap points).
    """

    segment: SegmentL
    level: int
    chain: tuple[CubeAddress, ...]
    gap_axes: int


@dataclass(frozen=True)
class DepthExhausted:
    chain: tuple[CubeAddress, ...]


def locate(wm: WhitneyMap, x: Sequence, depth: int | None = None):
    """Classify ``x`` as a vertex of the shrunken hierarchy, a segment point or unresolved.

    Descends ``n`` shrunken levels per step while every coordinate stays in
    a sub-interval.  When coordinates fall into gaps the segment runs along
    the smallest such axis, between the two ends of its gap.
    """
    m, n = wm.m, wm.n
    x = tuple(to_fraction(v) for v in x)
    if len(x) != m:
        raise ShapeError(f"expected {m} coordinates")
    if any(not 0 <= v <= 1 for v in x):
        raise DomainError("point outside [0, 1]^m")
    cap = wm.depth if depth is None else depth
    idx = [0] * m
    d = 0
    chain = [CubeAddress(m)]
    for j in range(cap + 1):
        side = shrunken_side(d + 1)
        lo = [_corner_of_index(i, d) for i in idx]
        corner = []
        for v, l in zip(x, lo):
            corner.append(0 if v == l else 1 if v == l + side else None)
        if None not in corner:
            return InB0Chain(tuple(chain), tuple(corner))
        if j == cap:
            break
        gaps = {}
        new_idx = []
        for a in range(m):
            i, la = idx[a], lo[a]
            for k in range(n):
                s_cur, s_child = shrunken_side(d + k + 1), shrunken_side(d + k + 2)
                if x[a] <= la + s_child:
                    i = 2 * i
                elif x[a] >= la + s_cur - s_child:
                    i, la = 2 * i + 1, la + s_cur - s_child
                else:
                    gaps[a] = (la + s_child, la + s_cur - s_child)
                    break
            new_idx.append(i)
        if gaps:
            a0 = min(gaps)
            g_lo, g_hi = gaps[a0]
            start = x[:a0] + (g_lo,) + x[a0 + 1:]
            end = x[:a0] + (g_hi,) + x[a0 + 1:]
            level = sum(c is None for c in corner)
            if len(gaps) > 1:
                log.debug("point %s: candidate segment axes %s, taking axis %d", x, sorted(gaps), a0)
            return OnSegment(SegmentL(start, end, a0), level, tuple(chain), len(gaps))
        idx = new_idx
        d += n
        chain.append(CubeAddress.from_index(m, idx, d))
    return DepthExhausted(tuple(chain))


def eval_p(wm: WhitneyMap, x: Sequence, depth: int | None = None) -> tuple[tuple, float]:
    """``p(x)`` with an error bound.

    Values are exact Fractions on ``B_0`` and on segments with equal end
    values, mpmath floats elsewhere.  The bound is non-zero only when the
    depth cap was reached before ``x`` was resolved.
    """
    cap = wm.depth if depth is None else depth
    return _eval_p(wm, tuple(to_fraction(v) for v in x), cap)


@lru_cache(maxsize=1 << 16)
def _eval_p(wm: WhitneyMap, x: tuple, cap: int):
    res = locate(wm, x, cap)
    if isinstance(res, InB0Chain):
        return vertex_value(wm, res.chain[-1], res.corner), 0.0
    if isinstance(res, DepthExhausted):
        img = cube_image(wm, res.chain[-1])
        half = img.side / 2
        return tuple(c + half for c in img.corner), math.sqrt(wm.n) * 2.0 ** (-wm.m * cap)
    seg = res.segment
    y0, e0 = _eval_p(wm, seg.start, cap)
    y1, e1 = _eval_p(wm, seg.end, cap)
    seg = replace(seg, value_start=y0, value_end=y1)
    return segment_eval(seg, x, wm.precision), max(e0, e1)


# -- the arc set E ------------------------------------------------------------------------------


@dataclass
class EGraph:
    """Finite-depth skeleton of ``E``.

    ``segments[s]`` holds the joining segments between curve-consecutive
    shrunken cubes of depth ``s``; ``skeleton`` lists the deepest cubes.
    """

    wm: WhitneyMap
    depth: int
    segments: dict[int, list[SegmentL]]
    skeleton: list[ShrunkenCube]
    connected: dict[int, bool] = field(default_factory=dict)

    def all_segments(self) -> list[SegmentL]:
        return [seg for s in sorted(self.segments) for seg in self.segments[s]]


def _vertex_coords(index: Sequence[int], depth: int, bits: Sequence[int]) -> tuple[Fraction, ...]:
    side = shrunken_side(depth + 1)
    return tuple(_corner_of_index(int(i), depth) + b * side for i, b in zip(index, bits))


def _joining_segments(wm: WhitneyMap, s: int) -> list[SegmentL]:
    m = wm.m
    cm = wm.curve_m
    tm = cm.t
    total = 1 << (m * s)
    idx, states = cm.index_array(np.arange(total, dtype=np.int64), s)
    idx, states = idx.tolist(), states.tolist()
    out = []
    scale = 1 << (m * s)
    for k in range(total - 1):
        qa, qb = states[k], states[k + 1]
        ca, cb = tm.bits(tm.exit(qa)), tm.bits(tm.entry(qb))
        shared_a = [i + c for i, c in zip(idx[k], ca)]
        shared_b = [i + c for i, c in zip(idx[k + 1], cb)]
        if shared_a != shared_b:
            raise AssertionError(f"cubes {k}, {k + 1} at depth {s} do not share the curve vertex")
        xa = _vertex_coords(idx[k], s, ca)
        xb = _vertex_coords(idx[k + 1], s, cb)
        moved = [a for a in range(m) if xa[a] != xb[a]]
        if len(moved) != 1:
            raise AssertionError(f"segment at depth {s}, rank {k} moves {len(moved)} coordinates")
        va = wm.curve_n.point((k + corner_tail(m, qa, ca)) / scale)
        vb = wm.curve_n.point((k + 1 + corner_tail(m, qb, cb)) / scale)
        if xa[moved[0]] > xb[moved[0]]:
            xa, xb, va, vb = xb, xa, vb, va
        out.append(SegmentL(xa, xb, moved[0], va, vb))
    return out


def _connected(m: int, level: int, segments: list[SegmentL]) -> bool:
    """Union-find over depth-``level`` cubes linked by segments whose ends they contain."""
    total = 1 << (m * level)
    parent = list(range(total))

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    def node(pt):
        cell = shrunken_cell(pt, level)
        if cell is None:
            raise AssertionError(f"segment end {pt} is not in a depth-{level} cube")
        k = 0
        for b in range(level - 1, -1, -1):
            for i in cell:
                k = (k << 1) | ((i >> b) & 1)
        return k

    comps = total
    for seg in segments:
        ra, rb = find(node(seg.start)), find(node(seg.end))
        if ra != rb:
            parent[ra] = rb
            comps -= 1
    return comps == 1


def build_E(wm: WhitneyMap, depth: int | None = None, budget: int | None = None) -> EGraph:
    """Joining segments of ``E`` for shrunken depths ``1 .. n * depth``.

    Every segment is checked to move exactly one coordinate and to carry
    equal values of ``p`` at both ends (computed from each end's own corner
    chain).  Connectivity is checked at every depth over all segments built
    so far.
    """
    D = wm.depth if depth is None else depth
    top = wm.n * D
    check_budget(1 << (wm.m * top), budget)
    segments: dict[int, list[SegmentL]] = {}
    connected = {}
    acc: list[SegmentL] = []
    for s in range(1, top + 1):
        segs = _joining_segments(wm, s)
        segments[s] = segs
        acc.extend(segs)
        connected[s] = _connected(wm.m, s, acc)
    skel = [
        shrunken_cube(CubeAddress.from_index(wm.m, row, top))
        for row in wm.curve_m.index_array(np.arange(1 << (wm.m * top), dtype=np.int64), top)[0].tolist()
    ]
    return EGraph(wm, D, segments, skel, connected)


# -- product lift ------------------------------------------------------------------------------


@dataclass(frozen=True)
class ProductMap:
    """``(t, x) -> (t, p'(x))`` with ``t`` in ``[0, 1]^r``; ``E = E' x [0, 1]^r``."""

    m: int
    n: int
    r: int
    inner: WhitneyMap

    def __call__(self, x, depth: int | None = None):
        x = tuple(to_fraction(v) for v in x)
        if len(x) != self.m:
            raise ShapeError(f"expected {self.m} coordinates")
        y, err = eval_p(self.inner, x[self.r:], depth)
        return x[: self.r] + tuple(y), err

    def e_descriptor(self) -> dict:
        return {"inner_m": self.inner.m, "inner_n": self.inner.n, "identity_axes": list(range(self.r))}

    def image_cover(self, s: int) -> list[tuple[int, ...]]:
        """Cubes of ``K^n_{(m-r)s}`` missed by identity intervals times paired images (empty = covered)."""
        inner = self.inner
        fine = inner.m * s
        cm, cn = inner.curve_m, inner.curve_n
        ranks = cm.rank_array(
            np.stack(
                np.meshgrid(*[np.arange(1 << (inner.n * s))] * inner.m, indexing="ij"), axis=-1
            ).reshape(-1, inner.m),
            inner.n * s,
        )
        images, _ = cn.index_array(ranks, fine)
        seen = {tuple(row) for row in images.tolist()}
        missing = []
        for row in np.ndindex(*([1 << fine] * self.n)):
            if row[self.r:] not in seen:
                missing.append(row)
        return missing


def theorem2_lift(m: int, n: int, r: int, inner: WhitneyMap | None = None) -> ProductMap | WhitneyMap:
    """Product of the identity on ``r`` axes with a Whitney map for ``(m - r, n - r)``."""
    if not m > n > r >= 0:
        raise DomainError(f"need m > n > r >= 0, got m={m}, n={n}, r={r}")
    if inner is None:
        inner = WhitneyMap(m - r, n - r)
    if (inner.m, inner.n) != (m - r, n - r):
        raise ShapeError("inner map has the wrong dimensions")
    if r == 0:
        return inner
    return ProductMap(m, n, r, inner)
