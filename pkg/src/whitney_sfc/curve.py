"""Cube-preserving space-filling curves ``f_n : [0, 1] -> [0, 1]^n``.

``f_1`` is the identity, ``f_2`` is the Hilbert curve and for ``n >= 3``
``f_n = (f_{n-1} o phi, psi)`` where ``S_n = (phi, psi)`` maps ``[0, 1]`` onto
the unit square whose first side ("fine" axis) is refined ``2^(n-1)``-fold
and second side ("coarse" axis) 2-fold per step.

Every traversal is described by the corner where it enters a cell and the
corner where it leaves it.  A Peano ("P") cell enters and leaves on the same
coarse side and snakes row by row along the fine axis; a Hilbert ("H") cell
enters and leaves at the same fine end, running down one column and back up
the other.  The corner at which a sub-cell is left is the unique corner that
lies on the edge shared with the next sub-cell and is edge-adjacent to the
corner where the sub-cell was entered; this reproduces the P/H letter
assignment of the construction and is checked by :func:`check_continuity`.

Ranks are the integer positions of parameter intervals: the depth-``s`` cube
of rank ``k`` is the image of ``[k / 2^(ns), (k + 1) / 2^(ns)]``.  Per-axis
cube positions use axis 0 as the most significant bit of a child index, the
same convention as :class:`~whitney_sfc.exact.CubeAddress`.
"""
from __future__ import annotations

import math
import os
from collections import namedtuple
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Sequence

import numpy as np

from .exact import (
    BudgetExceeded,
    CubeAddress,
    DomainError,
    ShapeError,
    axis_index,
    is_dyadic,
    point_cube,
    to_fraction,
)

__all__ = [
    "DEFAULT_BUDGET",
    "CellAddress",
    "SnState",
    "SnTable",
    "Transducer",
    "transducer",
    "fn_point_recursive",
    "fn_order_ranks",
    "Curve",
    "CurveOrderRank",
    "AdjacencyReport",
    "sn_table",
    "sn_cell",
    "sn_locate",
    "sn_preimage",
    "curve",
    "fn_cube",
    "fn_order",
    "fn_preimage",
    "fn_point",
    "encode_index",
    "decode_index",
    "adjacency_report",
    "measure_check",
    "refinement_check",
    "preimage_check",
    "check_continuity",
]

DEFAULT_BUDGET = int(os.environ.get("WHITNEY_SFC_BUDGET", 1 << 22))

CellAddress = namedtuple("CellAddress", ["fine", "coarse"])


def check_budget(count: int, budget: int | None):
    budget = DEFAULT_BUDGET if budget is None else budget
    if count > budget:
        raise BudgetExceeded(f"{count} cubes requested, budget is {budget}")


# -- corner chaining on a two-dimensional cell grid ---------------------------


def _chain(shape, cells, entry, exit_):
    """Entry/exit corner bits of every cell along ``cells``.

    ``shape`` gives the number of cells per axis, ``entry``/``exit_`` are the
    corner bits of the parent.  Raises ``ValueError`` when the traversal
    cannot be chained continuously.
    """
    pt = tuple(b * k for b, k in zip(entry, shape))
    out = []
    for k, cell in enumerate(cells):
        ent = tuple(p - c for p, c in zip(pt, cell))
        if any(b not in (0, 1) for b in ent):
            raise ValueError(f"cell {cell} does not touch the previous exit {pt}")
        if k + 1 < len(cells):
            nxt = cells[k + 1]
            moved = [a for a in range(len(shape)) if nxt[a] != cell[a]]
            if len(moved) != 1 or abs(nxt[moved[0]] - cell[moved[0]]) != 1:
                raise ValueError(f"cells {cell} and {nxt} are not edge-adjacent")
            a0 = moved[0]
            side = 1 if nxt[a0] > cell[a0] else 0
            cands = [
                e
                for e in _corners(len(shape))
                if e[a0] == side and sum(x != y for x, y in zip(e, ent)) == 1
            ]
            if len(cands) != 1:
                raise ValueError(f"ambiguous exit for cell {cell}")
            ex = cands[0]
        else:
            ex = tuple(b * k - c for b, k, c in zip(exit_, shape, cell))
            if any(b not in (0, 1) for b in ex) or sum(x != y for x, y in zip(ex, ent)) != 1:
                raise ValueError("last cell cannot reach the parent exit")
        out.append((ent, ex))
        pt = tuple(c + e for c, e in zip(cell, ex))
    return out


def _corners(dim):
    return [tuple((c >> (dim - 1 - a)) & 1 for a in range(dim)) for c in range(1 << dim)]


# -- the S_n transducer --------------------------------------------------------


@dataclass(frozen=True)
class SnState:
    """Transducer state of ``S_n``: entry and exit corners as (fine, coarse) bits.

    The entry bits double as the per-axis reflection flags of the pattern.
    """

    entry: tuple[int, int]
    exit: tuple[int, int]

    @property
    def method(self) -> str:
        if self.entry[1] == self.exit[1] and self.entry[0] != self.exit[0]:
            return "P"
        if self.entry[0] == self.exit[0] and self.entry[1] != self.exit[1]:
            return "H"
        raise ValueError(f"{self} is neither a P nor an H state")

    @property
    def orient(self) -> tuple[int, int]:
        return self.entry

    def cells(self, n: int) -> list[CellAddress]:
        """Traversal order of the ``2^(n-1) x 2`` grid of sub-cells."""
        rows = 1 << (n - 1)
        (fe, ce), (_, cx) = self.entry, self.exit
        rs = list(range(rows)) if fe == 0 else list(range(rows - 1, -1, -1))
        if self.method == "P":
            out, col = [], ce
            for r in rs:
                out += [CellAddress(r, col), CellAddress(r, 1 - col)]
                col = 1 - col
            return out
        return [CellAddress(r, ce) for r in rs] + [CellAddress(r, cx) for r in reversed(rs)]


SN_BASES = {
    "P": SnState((0, 0), (1, 0)),
    "H": SnState((1, 0), (1, 1)),
}


@dataclass
class SnTable:
    """Transition table of ``S_n`` reachable from one base state."""

    n: int
    states: list[SnState]
    cell: list[list[CellAddress]]
    next: list[list[int]]
    inverse: list[dict[CellAddress, int]] = field(repr=False)


@lru_cache(maxsize=None)
def sn_table(n: int, base: str = "P") -> SnTable:
    if n < 2:
        raise DomainError("S_n is defined for n >= 2")
    start = SN_BASES[base]
    states, index = [start], {start: 0}
    cell, nxt = [], []
    i = 0
    while i < len(states):
        st = states[i]
        order = st.cells(n)
        corners = _chain((1 << (n - 1), 2), order, st.entry, st.exit)
        row_next = []
        for ent, ex in corners:
            child = SnState(ent, ex)
            child.method  # validates the pattern
            if child not in index:
                index[child] = len(states)
                states.append(child)
            row_next.append(index[child])
        cell.append(order)
        nxt.append(row_next)
        i += 1
    inverse = [{c: d for d, c in enumerate(row)} for row in cell]
    return SnTable(n, states, cell, nxt, inverse)


def sn_cell(n: int, state: SnState, d: int) -> tuple[CellAddress, SnState]:
    """Sub-cell visited by input digit ``d`` (0-based) and the sub-cell's state."""
    if not 0 <= d < (1 << n):
        raise DomainError(f"digit {d} outside 0..{(1 << n) - 1}")
    order = state.cells(n)
    ent, ex = _chain((1 << (n - 1), 2), order, state.entry, state.exit)[d]
    return order[d], SnState(ent, ex)


def _interval_index(alpha: CubeAddress) -> int:
    if alpha.dim != 1:
        raise ShapeError("expected an interval of K^1")
    return alpha.index[0]


def sn_locate(n: int, alpha: CubeAddress, base: str = "P") -> tuple[CubeAddress, CubeAddress]:
    """Rectangle ``alpha' x alpha''`` with ``S_n(alpha)`` inside it."""
    depth = alpha.depth
    if depth % n:
        raise ShapeError(f"depth {depth} is not a multiple of {n}")
    s = depth // n
    tab = sn_table(n, base)
    k = _interval_index(alpha)
    st, fine, coarse = 0, 0, 0
    for j in range(s):
        d = (k >> (n * (s - 1 - j))) & ((1 << n) - 1)
        c = tab.cell[st][d]
        st = tab.next[st][d]
        fine = (fine << (n - 1)) | c.fine
        coarse = (coarse << 1) | c.coarse
    return (
        CubeAddress.from_index(1, [fine], (n - 1) * s),
        CubeAddress.from_index(1, [coarse], s),
    )


def sn_preimage(n: int, alpha1: CubeAddress, alpha2: CubeAddress, base: str = "P") -> CubeAddress:
    """Parameter interval whose image under ``S_n`` is ``alpha1 x alpha2``."""
    s = alpha2.depth
    if alpha1.depth != (n - 1) * s:
        raise ShapeError(f"depths {alpha1.depth} and {alpha2.depth} do not match for n={n}")
    tab = sn_table(n, base)
    fine, coarse = _interval_index(alpha1), _interval_index(alpha2)
    st, k = 0, 0
    mask = (1 << (n - 1)) - 1
    for j in range(s):
        c = CellAddress((fine >> ((n - 1) * (s - 1 - j))) & mask, (coarse >> (s - 1 - j)) & 1)
        d = tab.inverse[st][c]
        st = tab.next[st][d]
        k = (k << n) | d
    return CubeAddress.from_index(1, [k], n * s)


# -- flat transducers for f_n ------------------------------------------------------


@dataclass
class Transducer:
    """Synchronous automaton: one base-``2^dim`` digit in, one child cube out.

    ``child[q][d]`` is the spatial child index (axis 0 most significant) that
    digit ``d`` selects in state ``q``; ``nxt[q][d]`` is the child's state.
    State 0 is the root.
    """

    dim: int
    child: list[list[int]]
    nxt: list[list[int]]
    inverse: list[list[int]] = field(init=False, repr=False)

    def __post_init__(self):
        base = 1 << self.dim
        self.inverse = []
        for row in self.child:
            inv = [0] * base
            for d, c in enumerate(row):
                inv[c] = d
            self.inverse.append(inv)
        self.child_np = np.asarray(self.child, dtype=np.int64)
        self.next_np = np.asarray(self.nxt, dtype=np.int64)
        self.inverse_np = np.asarray(self.inverse, dtype=np.int64)

    @property
    def base(self) -> int:
        return 1 << self.dim

    @property
    def nstates(self) -> int:
        return len(self.child)

    def entry(self, q: int) -> int:
        return self.child[q][0]

    def exit(self, q: int) -> int:
        return self.child[q][-1]

    def bits(self, c: int) -> tuple[int, ...]:
        return tuple((c >> (self.dim - 1 - a)) & 1 for a in range(self.dim))


def _identity_transducer() -> Transducer:
    return Transducer(1, [[0, 1]], [[0, 0]])


def _hilbert_states():
    """Hilbert curve on the unit square entering at (0,0), leaving at (1,0)."""

    def cells(ent, ex):
        a = 0 if ent[0] != ex[0] else 1
        o = 1 - a
        flip = lambda c, ax: tuple(b ^ (i == ax) for i, b in enumerate(c))
        return [ent, flip(ent, o), flip(flip(ent, o), a), flip(ent, a)]

    start = ((0, 0), (1, 0))
    states, index = [start], {start: 0}
    child, nxt = [], []
    i = 0
    while i < len(states):
        ent, ex = states[i]
        order = cells(ent, ex)
        row_c, row_n = [], []
        for cell, st in zip(order, _chain((2, 2), order, ent, ex)):
            if st not in index:
                index[st] = len(states)
                states.append(st)
            row_c.append(2 * cell[0] + cell[1])
            row_n.append(index[st])
        child.append(row_c)
        nxt.append(row_n)
        i += 1
    return Transducer(2, child, nxt)


def _compose(n: int, inner: Transducer, base: str = "P") -> Transducer:
    """Transducer of ``(inner o phi, psi)`` for ``S_n = (phi, psi)``."""
    tab = sn_table(n, base)
    start = (0, 0)
    states, index = [start], {start: 0}
    child, nxt = [], []
    i = 0
    while i < len(states):
        a, b = states[i]
        row_c, row_n = [], []
        for d in range(1 << n):
            c = tab.cell[a][d]
            a2 = tab.next[a][d]
            c_in = inner.child[b][c.fine]
            b2 = inner.nxt[b][c.fine]
            key = (a2, b2)
            if key not in index:
                index[key] = len(states)
                states.append(key)
            row_c.append((c_in << 1) | c.coarse)
            row_n.append(index[key])
        child.append(row_c)
        nxt.append(row_n)
        i += 1
    return Transducer(n, child, nxt)


@lru_cache(maxsize=None)
def transducer(n: int) -> Transducer:
    if n < 1:
        raise DomainError("dimension must be positive")
    if n == 1:
        return _identity_transducer()
    if n == 2:
        return _hilbert_states()
    return _compose(n, transducer(n - 1))


def check_continuity(t: Transducer) -> list[str]:
    """Violations of the continuity contract of a transducer (empty when valid).

    For every state: consecutive children are face-adjacent, the exit corner
    of each child is the entry corner of the next, the first child enters at
    the parent's entry corner and the last leaves at the parent's exit.
    """
    problems = []
    for q in range(t.nstates):
        pts = []
        for d in range(t.base):
            pos = t.bits(t.child[q][d])
            qc = t.nxt[q][d]
            ent = tuple(p + e for p, e in zip(pos, t.bits(t.entry(qc))))
            ex = tuple(p + e for p, e in zip(pos, t.bits(t.exit(qc))))
            pts.append((pos, ent, ex))
        if pts[0][1] != tuple(2 * b for b in t.bits(t.entry(q))):
            problems.append(f"state {q}: first child does not enter at the parent entry")
        if pts[-1][2] != tuple(2 * b for b in t.bits(t.exit(q))):
            problems.append(f"state {q}: last child does not leave at the parent exit")
        if sorted(t.child[q]) != list(range(t.base)):
            problems.append(f"state {q}: children are not a permutation")
        for d in range(t.base - 1):
            (p0, _, x0), (p1, e1, _) = pts[d], pts[d + 1]
            if sum(abs(u - v) for u, v in zip(p0, p1)) != 1:
                problems.append(f"state {q}: children {d},{d + 1} are not face-adjacent")
            if x0 != e1:
                problems.append(f"state {q}: child {d} exit != child {d + 1} entry")
    return problems


# -- the curve ----------------------------------------------------------------------------


def _bits_value(bits: Sequence[int], cycle: Sequence[int]) -> Fraction:
    """Value of the binary expansion ``0.bits(cycle)(cycle)...``."""
    pre = 0
    for b in bits:
        pre = 2 * pre + b
    val = Fraction(pre, 1 << len(bits))
    if cycle:
        cyc = 0
        for b in cycle:
            cyc = 2 * cyc + b
        val += Fraction(cyc, ((1 << len(cycle)) - 1) << len(bits))
    return val


class Curve:
    """The curve ``f_n`` backed by its flat transducer."""

    def __init__(self, n: int):
        self.n = n
        self.t = transducer(n)

    def __repr__(self):
        return f"Curve(n={self.n}, states={self.t.nstates})"

    # scalar, arbitrary depth
    def walk(self, rank: int, depth: int, state: int = 0) -> tuple[tuple[int, ...], int]:
        """Per-axis position of the depth-``depth`` cube of ``rank`` and its state."""
        n, t = self.n, self.t
        if not 0 <= rank < (1 << (n * depth)):
            raise DomainError(f"rank {rank} outside 0..2^{n * depth}-1")
        idx = [0] * n
        q = state
        for j in range(depth):
            d = (rank >> (n * (depth - 1 - j))) & (t.base - 1)
            c = t.child[q][d]
            q = t.nxt[q][d]
            for a in range(n):
                idx[a] = (idx[a] << 1) | ((c >> (n - 1 - a)) & 1)
        return tuple(idx), q

    def rank(self, index: Sequence[int], depth: int) -> int:
        n, t = self.n, self.t
        q, k = 0, 0
        for j in range(depth):
            c = 0
            for a in range(n):
                c = (c << 1) | ((index[a] >> (depth - 1 - j)) & 1)
            d = t.inverse[q][c]
            q = t.nxt[q][d]
            k = (k << n) | d
        return k

    def cube(self, rank: int, depth: int) -> CubeAddress:
        return CubeAddress.from_index(self.n, self.walk(rank, depth)[0], depth)

    def vertex(self, k: int, depth: int) -> tuple[int, ...]:
        """Exact ``f_n(k / 2^(n*depth))`` in units of ``2^-depth``."""
        n, t = self.n, self.t
        if k == 1 << (n * depth):
            ex = t.bits(t.exit(0))
            return tuple(b << depth for b in ex)
        idx, q = self.walk(k, depth)
        return tuple(i + e for i, e in zip(idx, t.bits(t.entry(q))))

    def digits_point(self, state: int, prefix: Sequence[int], cycle: Sequence[int]):
        """Exact limit point of the digit stream ``prefix cycle cycle ...``.

        Coordinates are relative to the cube of ``state`` (unit cube).
        """
        n, t = self.n, self.t
        out = []
        q = state
        for d in prefix:
            out.append(t.child[q][d])
            q = t.nxt[q][d]
        if not cycle:
            cycle = [0]
        seen = {}
        step = 0
        loop_out = []
        while (step % len(cycle), q) not in seen:
            seen[(step % len(cycle), q)] = step
            d = cycle[step % len(cycle)]
            loop_out.append(t.child[q][d])
            q = t.nxt[q][d]
            step += 1
        start = seen[(step % len(cycle), q)]
        pre = out + loop_out[:start]
        cyc = loop_out[start:]
        return tuple(
            _bits_value([(c >> (n - 1 - a)) & 1 for c in pre], [(c >> (n - 1 - a)) & 1 for c in cyc])
            for a in range(n)
        )

    def point(self, t_param) -> tuple[Fraction, ...]:
        """Exact ``f_n(t)`` for rational ``t`` (eventually periodic digits)."""
        x = to_fraction(t_param)
        if not 0 <= x <= 1:
            raise DomainError(f"{x} is outside [0, 1]")
        n, tr = self.n, self.t
        base = tr.base
        if x == 1:
            return self.digits_point(0, [], [base - 1])
        r, den = x.numerator, x.denominator
        q = 0
        seen = {}
        outs = []
        while (r, q) not in seen:
            seen[(r, q)] = len(outs)
            d, r = divmod(r * base, den)
            outs.append(tr.child[q][d])
            q = tr.nxt[q][d]
        start = seen[(r, q)]
        pre, cyc = outs[:start], outs[start:]
        return tuple(
            _bits_value([(c >> (n - 1 - a)) & 1 for c in pre], [(c >> (n - 1 - a)) & 1 for c in cyc])
            for a in range(n)
        )

    # vectorised, depth * n <= 62
    def index_array(self, ranks, depth: int):
        n, t = self.n, self.t
        if n * depth > 62:
            raise BudgetExceeded("vectorised enumeration needs n * depth <= 62")
        ranks = np.asarray(ranks, dtype=np.int64)
        q = np.zeros(ranks.shape, dtype=np.int64)
        idx = np.zeros(ranks.shape + (n,), dtype=np.int64)
        for j in range(depth):
            d = (ranks >> (n * (depth - 1 - j))) & (t.base - 1)
            c = t.child_np[q, d]
            q = t.next_np[q, d]
            for a in range(n):
                idx[..., a] = (idx[..., a] << 1) | ((c >> (n - 1 - a)) & 1)
        return idx, q

    def rank_array(self, index, depth: int):
        n, t = self.n, self.t
        index = np.asarray(index, dtype=np.int64)
        q = np.zeros(index.shape[:-1], dtype=np.int64)
        k = np.zeros(index.shape[:-1], dtype=np.int64)
        for j in range(depth):
            c = np.zeros(index.shape[:-1], dtype=np.int64)
            for a in range(n):
                c = (c << 1) | ((index[..., a] >> (depth - 1 - j)) & 1)
            d = t.inverse_np[q, c]
            q = t.next_np[q, d]
            k = (k << n) | d
        return k

    def corner_bits_array(self, codes):
        codes = np.asarray(codes, dtype=np.int64)
        return np.stack([(codes >> (self.n - 1 - a)) & 1 for a in range(self.n)], axis=-1)

    def vertex_array(self, depth: int):
        """``f_n(k / 2^(n*depth))`` for ``k = 0 .. 2^(n*depth)`` in units of ``2^-depth``."""
        t = self.t
        total = 1 << (self.n * depth)
        idx, q = self.index_array(np.arange(total, dtype=np.int64), depth)
        entry = self.corner_bits_array(np.asarray([t.entry(s) for s in range(t.nstates)])[q])
        last = np.asarray([b << depth for b in t.bits(t.exit(0))], dtype=np.int64)
        return np.vstack([idx + entry, last[None, :]])


@lru_cache(maxsize=None)
def curve(n: int) -> Curve:
    return Curve(n)


# -- module-level operations --------------------------------------------------------------


@dataclass(frozen=True)
class CurveOrderRank:
    addr: CubeAddress
    rank: int


def fn_cube(n: int, alpha: CubeAddress) -> CubeAddress:
    """Cube of ``K^n_s`` containing ``f_n(alpha)`` for ``alpha`` in ``K^1_{ns}``.

    Follows the recursion ``fn_cube(n, alpha) = fn_cube(n-1, alpha') x alpha''``
    with ``(alpha', alpha'') = sn_locate(n, alpha)``.
    """
    if alpha.dim != 1:
        raise ShapeError("alpha must be an interval")
    if alpha.depth % n:
        raise ShapeError(f"depth {alpha.depth} is not a multiple of {n}")
    s = alpha.depth // n
    if n <= 2:
        return curve(n).cube(alpha.index[0], s)
    a1, a2 = sn_locate(n, alpha)
    inner = fn_cube(n - 1, a1)
    return CubeAddress.from_index(n, inner.index + a2.index, s)


def fn_order(n: int, s: int, budget: int | None = None) -> np.ndarray:
    """Positions of all cubes of ``K^n_s`` in curve order (row ``k`` = rank ``k``).

    Entries are integer corner positions in units of ``2^-s``.
    """
    check_budget(1 << (n * s), budget)
    idx, _ = curve(n).index_array(np.arange(1 << (n * s), dtype=np.int64), s)
    return idx


def fn_order_ranks(n: int, s: int, budget: int | None = None) -> list[CurveOrderRank]:
    order = fn_order(n, s, budget)
    return [CurveOrderRank(CubeAddress.from_index(n, row, s), k) for k, row in enumerate(order.tolist())]


def fn_preimage(n: int, delta: CubeAddress) -> CubeAddress:
    """The parameter interval of ``K^1_{ns}`` whose image is ``delta``."""
    if delta.dim != n:
        raise ShapeError(f"expected a cube of dimension {n}")
    k = curve(n).rank(delta.index, delta.depth)
    return CubeAddress.from_index(1, [k], n * delta.depth)


def fn_point(n: int, t, s: int):
    """Nested cube chain of ``t`` down to depth ``s`` and the point ``f_n(t)``.

    ``t`` is either a rational (the point is then exact and the error bound is
    0) or a sequence of base-``2^n`` digits ``0..2^n - 1`` of length at least
    ``s`` (the point is the minimal corner of the depth-``s`` cube, within
    ``sqrt(n) * 2^-s``).  Returns ``(chain, point, err)``.
    """
    c = curve(n)
    if isinstance(t, (list, tuple)):
        digits = [int(d) for d in t[:s]]
        if len(digits) < s:
            raise ShapeError("digit stream shorter than the requested depth")
        rank = 0
        chain = [CubeAddress(n)]
        for j, d in enumerate(digits):
            rank = (rank << n) | d
            chain.append(c.cube(rank, j + 1))
        return chain, chain[-1].corner, math.sqrt(n) * 2.0 ** (-s)
    x = to_fraction(t)
    if not 0 <= x <= 1:
        raise DomainError(f"{x} is outside [0, 1]")
    k = axis_index(x, n * s, "low")
    chain = [c.cube(k >> (n * (s - j)), j) for j in range(s + 1)]
    return chain, c.point(x), 0.0


def fn_point_recursive(n: int, t: Fraction) -> tuple[Fraction, ...]:
    """``f_n(t)`` for dyadic ``t`` straight from ``f_n = (f_{n-1} o phi, psi)``.

    Independent of the flat transducer; used as an oracle.
    """
    x = to_fraction(t)
    if not is_dyadic(x) or not 0 <= x <= 1:
        raise DomainError("the recursive evaluator needs a dyadic t in [0, 1]")
    if n == 1:
        return (x,)
    if n == 2:
        return curve(2).point(x)
    e = x.denominator.bit_length() - 1
    s = max(1, -(-e // n))
    k = x * (1 << (n * s))
    k = k.numerator
    tab = sn_table(n)
    if k == 1 << (n * s):
        ent = tab.states[0].exit
        phi, psi = Fraction(ent[0]), Fraction(ent[1])
    else:
        st, fine, coarse = 0, 0, 0
        for j in range(s):
            d = (k >> (n * (s - 1 - j))) & ((1 << n) - 1)
            cl = tab.cell[st][d]
            st = tab.next[st][d]
            fine = (fine << (n - 1)) | cl.fine
            coarse = (coarse << 1) | cl.coarse
        ef, ec = tab.states[st].entry
        phi = Fraction(fine + ef, 1 << ((n - 1) * s))
        psi = Fraction(coarse + ec, 1 << s)
    return fn_point_recursive(n - 1, phi) + (psi,)


def encode_index(n: int, point: Sequence, s: int, side: str = "low") -> int:
    """Rank of the depth-``s`` cube holding ``point``.

    Points on shared faces go to the lower cube (``side="low"``) or the
    upper one (``side="high"``).
    """
    pt = [to_fraction(x) for x in point]
    if len(pt) != n:
        raise ShapeError(f"expected {n} coordinates")
    return curve(n).rank(point_cube(pt, s, side).index, s)


def decode_index(n: int, rank: int, s: int) -> CubeAddress:
    if not 0 <= rank < (1 << (n * s)):
        raise DomainError(f"rank {rank} outside 0..2^{n * s}-1")
    return curve(n).cube(rank, s)


@dataclass
class AdjacencyReport:
    n: int
    s: int
    pairs: int
    violations: list[dict]

    @property
    def ok(self) -> bool:
        return not self.violations


def adjacency_report(n: int, s: int, budget: int | None = None, limit: int = 20) -> AdjacencyReport:
    """Check that consecutive depth-``s`` cubes share an (n-1)-face holding ``f_n(b)`` as a vertex."""
    check_budget(1 << (n * s), budget)
    c = curve(n)
    total = 1 << (n * s)
    idx, _ = c.index_array(np.arange(total, dtype=np.int64), s)
    verts = c.vertex_array(s)
    if total == 1:
        return AdjacencyReport(n, s, 0, [])
    a, b = idx[:-1], idx[1:]
    diff = b - a
    face = (np.abs(diff).sum(axis=1) == 1)
    v = verts[1:-1]
    # f_n(b) must be a vertex of both cubes ...
    off_a, off_b = v - a, v - b
    vert_a = ((off_a == 0) | (off_a == 1)).all(axis=1)
    vert_b = ((off_b == 0) | (off_b == 1)).all(axis=1)
    # ... and lie in the shared hyperplane
    axis = np.argmax(np.abs(diff), axis=1)
    rows = np.arange(total - 1)
    plane = np.maximum(a[rows, axis], b[rows, axis])
    on_plane = v[rows, axis] == plane
    bad = np.nonzero(~(face & vert_a & vert_b & on_plane))[0]
    violations = []
    for k in bad[:limit].tolist():
        violations.append(
            {
                "rank": k,
                "cube": a[k].tolist(),
                "next": b[k].tolist(),
                "vertex": v[k].tolist(),
                "face_adjacent": bool(face[k]),
            }
        )
    if len(bad) > limit:
        violations.append({"truncated": int(len(bad) - limit)})
    return AdjacencyReport(n, s, total - 1, violations)


def measure_check(n: int, s: int, budget: int | None = None) -> bool:
    """Every cube of ``K^n_s`` has a preimage interval of length exactly its volume."""
    check_budget(1 << (n * s), budget)
    c = curve(n)
    grid = np.stack(
        np.meshgrid(*[np.arange(1 << s, dtype=np.int64)] * n, indexing="ij"), axis=-1
    ).reshape(-1, n)
    ranks = c.rank_array(grid, s)
    if np.unique(ranks).size != grid.shape[0]:
        return False
    back, _ = c.index_array(ranks, s)
    if not np.array_equal(back, grid):
        return False
    length = Fraction(1, 1 << (n * s))
    return length == Fraction(1, 1 << s) ** n and length * grid.shape[0] == 1


def refinement_check(n: int, s: int, budget: int | None = None) -> list[dict]:
    """Children of every depth-``s`` parameter interval map into the parent's cube."""
    check_budget(1 << (n * (s + 1)), budget)
    c = curve(n)
    fine, _ = c.index_array(np.arange(1 << (n * (s + 1)), dtype=np.int64), s + 1)
    coarse, _ = c.index_array(np.arange(1 << (n * s), dtype=np.int64), s)
    parent_of = fine >> 1
    expect = np.repeat(coarse, 1 << n, axis=0)
    bad = np.nonzero((parent_of != expect).any(axis=1))[0]
    out = [{"rank": int(k), "child": fine[k].tolist(), "parent": expect[k].tolist()} for k in bad[:20]]
    # the 2^n children must fill the parent
    blocks = (fine & 1).reshape(-1, 1 << n, n)
    codes = np.zeros(blocks.shape[:2], dtype=np.int64)
    for a in range(n):
        codes = (codes << 1) | blocks[..., a]
    codes.sort(axis=1)
    full = (codes == np.arange(1 << n)).all(axis=1)
    for k in np.nonzero(~full)[0][:20].tolist():
        out.append({"parent_rank": int(k), "children_do_not_tile": True})
    return out


def preimage_check(n: int, s: int, extra: int = 1, budget: int | None = None) -> list[dict]:
    """Points of ``f_n`` on a finer dyadic grid never enter ``int(delta)`` from outside its interval.

    For every ``t = K / 2^(n(s+extra))`` whose image is interior to a
    depth-``s`` cube ``delta``, ``t`` must lie in the closed interval of
    ``delta``'s rank.
    """
    check_budget(1 << (n * (s + extra)), budget)
    c = curve(n)
    fine = s + extra
    verts = c.vertex_array(fine)
    step = 1 << extra
    interior = ((verts % step) != 0).all(axis=1)
    ks = np.nonzero(interior)[0]
    cubes = verts[ks] >> extra
    ranks = c.rank_array(cubes, s)
    span = 1 << (n * extra)
    ok = (ranks * span <= ks) & (ks <= (ranks + 1) * span)
    return [
        {"t_index": int(k), "point": verts[k].tolist(), "rank": int(r)}
        for k, r in zip(ks[~ok][:20].tolist(), ranks[~ok][:20].tolist())
    ]
