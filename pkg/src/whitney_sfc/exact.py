"""Exact rational/dyadic helpers and dyadic cube addresses.

Rationals are plain :class:`fractions.Fraction` values; a dyadic number is a
Fraction whose denominator is a power of two.  Cube addresses use *spatial*
digits: digit ``i`` (1-based) of a cube in ``[0, 1]^n`` encodes the child
position ``i - 1`` written with ``n`` bits, the first axis being the most
significant bit.  For ``n = 2`` the digits 1, 2, 3, 4 are the bottom-left,
top-left, bottom-right and top-right quadrants.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

__all__ = [
    "DomainError",
    "ShapeError",
    "BudgetExceeded",
    "is_dyadic",
    "dyadic_exponent",
    "to_fraction",
    "CubeAddress",
    "cube_geometry",
    "digits_of_point",
    "axis_index",
    "point_cube",
    "format_fraction",
]


class DomainError(ValueError):
    """An argument lies outside the domain of the operation."""


class ShapeError(ValueError):
    """Depths or dimensions of the arguments are inconsistent."""


class BudgetExceeded(RuntimeError):
    """An enumeration would exceed the configured cube budget."""


def is_dyadic(q: Fraction) -> bool:
    d = Fraction(q).denominator
    return d & (d - 1) == 0


def dyadic_exponent(q: Fraction) -> int:
    """Return ``e`` with ``q = a / 2**e`` in lowest terms."""
    q = Fraction(q)
    if not is_dyadic(q):
        raise DomainError(f"{q} is not dyadic")
    return q.denominator.bit_length() - 1


def to_fraction(value) -> Fraction:
    """Parse ``"3/8"``, ``"0.375"``, ints and Fractions exactly.

    Floats are accepted only because every finite binary float is an exact
    dyadic rational; strings are preferred.
    """
    if isinstance(value, Fraction):
        return value
    if isinstance(value, (int, float)):
        return Fraction(value)
    try:
        return Fraction(str(value).strip())
    except (ValueError, ZeroDivisionError) as exc:
        raise DomainError(f"cannot parse {value!r} as an exact rational") from exc


def format_fraction(q: Fraction) -> str:
    q = Fraction(q)
    return str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"


@dataclass(frozen=True)
class CubeAddress:
    """A dyadic cube ``Q^n_{1,i_1..i_s}`` given by its spatial digits."""

    dim: int
    digits: tuple[int, ...] = ()

    def __post_init__(self):
        if self.dim < 1:
            raise DomainError("dimension must be positive")
        object.__setattr__(self, "digits", tuple(int(d) for d in self.digits))
        top = 1 << self.dim
        for d in self.digits:
            if not 1 <= d <= top:
                raise DomainError(f"digit {d} outside 1..{top}")

    @property
    def depth(self) -> int:
        return len(self.digits)

    @property
    def index(self) -> tuple[int, ...]:
        """Per-axis integer position at this depth (corner = index / 2**depth)."""
        idx = [0] * self.dim
        for d in self.digits:
            c = d - 1
            for a in range(self.dim):
                idx[a] = 2 * idx[a] + ((c >> (self.dim - 1 - a)) & 1)
        return tuple(idx)

    @classmethod
    def from_index(cls, dim: int, index: Sequence[int], depth: int) -> "CubeAddress":
        index = [int(i) for i in index]
        if len(index) != dim:
            raise ShapeError("index length must equal dim")
        if any(not 0 <= i < (1 << depth) for i in index):
            raise DomainError("index outside the grid")
        digits = []
        for lvl in range(depth - 1, -1, -1):
            c = 0
            for i in index:
                c = 2 * c + ((i >> lvl) & 1)
            digits.append(c + 1)
        return cls(dim, tuple(digits))

    @property
    def corner(self) -> tuple[Fraction, ...]:
        return tuple(Fraction(i, 1 << self.depth) for i in self.index)

    @property
    def side(self) -> Fraction:
        return Fraction(1, 1 << self.depth)

    @property
    def parent(self) -> "CubeAddress":
        if not self.digits:
            raise DomainError("the root cube has no parent")
        return CubeAddress(self.dim, self.digits[:-1])

    def children(self) -> list["CubeAddress"]:
        return [CubeAddress(self.dim, self.digits + (d,)) for d in range(1, (1 << self.dim) + 1)]

    def contains(self, point: Sequence[Fraction]) -> bool:
        lo, side = self.corner, self.side
        return all(c <= Fraction(x) <= c + side for c, x in zip(lo, point))

    def __str__(self):
        return f"Q^{self.dim}_1" + "".join(str(d) for d in self.digits)


def cube_geometry(addr: CubeAddress) -> tuple[tuple[Fraction, ...], Fraction]:
    """Return the lexicographically minimal vertex and the side of ``addr``."""
    return addr.corner, addr.side


def axis_index(t: Fraction, depth: int, side: str = "low") -> int:
    """Index of the depth-``depth`` dyadic interval of [0, 1] holding ``t``.

    ``side="low"`` puts a shared endpoint into the lower interval (the
    lexicographically minimal address); ``side="high"`` uses half-open
    ``[a, b)`` intervals.  ``t = 1`` always lands in the last interval and
    ``t = 0`` in the first.
    """
    t = Fraction(t)
    if not 0 <= t <= 1:
        raise DomainError(f"{t} is outside [0, 1]")
    scaled = t * (1 << depth)
    fl = scaled.numerator // scaled.denominator
    if side == "low":
        idx = fl - 1 if scaled.denominator == 1 else fl
        idx = max(idx, 0)
    elif side == "high":
        idx = fl
    else:
        raise ValueError("side must be 'low' or 'high'")
    return min(idx, (1 << depth) - 1)


def digits_of_point(t: Fraction, base: int, depth: int, side: str = "low") -> list[int]:
    """Digits (1-based) of the nested base-``base`` intervals containing ``t``.

    ``base`` must be a power of two; the returned interval lies in
    ``K^1_{depth * log2(base)}``.
    """
    if base < 2 or base & (base - 1):
        raise DomainError("base must be a power of two")
    bits = base.bit_length() - 1
    idx = axis_index(t, bits * depth, side)
    return [((idx >> (bits * (depth - 1 - j))) & (base - 1)) + 1 for j in range(depth)]


def point_cube(point: Iterable, depth: int, side: str = "low") -> CubeAddress:
    """The depth-``depth`` dyadic cube containing ``point`` (boundary convention per axis)."""
    pt = [to_fraction(x) for x in point]
    return CubeAddress.from_index(len(pt), [axis_index(x, depth, side) for x in pt], depth)
