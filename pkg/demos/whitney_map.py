"""Build the arc set of the map from the square onto the interval and evaluate it.

Usage: python3 demos/whitney_map.py
"""
from fractions import Fraction as F

from whitney_sfc.analysis import surjectivity_check
from whitney_sfc.whitney import (
    OnSegment,
    WhitneyMap,
    build_E,
    eval_p,
    locate,
    shrunken_side,
)


def show(v) -> str:
    return str(v) if isinstance(v, F) else f"{float(v):.6f}"


def main() -> None:
    wm = WhitneyMap(2, 1, depth=20)
    print("Shrunken cube sides:", ", ".join(str(shrunken_side(s)) for s in range(1, 6)))

    E = build_E(wm, 3)
    for s, segs in E.segments.items():
        print(f"level {s}: {len(segs)} joining segments, connected so far: {E.connected[s]}")
    seg = E.segments[1][0]
    print(f"\nFirst segment {tuple(map(str, seg.start))} -> {tuple(map(str, seg.end))} along axis "
          f"{seg.axis}, value {seg.value_start[0]} at both ends")

    print("\nOn the left edge the map is constant across the first gap and varies elsewhere:")
    for y in [F(1, 8), F(1, 4), F(3, 8), F(1, 2), F(5, 8), F(3, 4), F(7, 8)]:
        val, err = eval_p(wm, (F(0), y))
        res = locate(wm, (F(0), y))
        kind = f"segment at level {res.level}" if isinstance(res, OnSegment) else f"vertex of a depth-{len(res.chain) - 1} cube"
        print(f"  p(0, {y}) = {show(val[0])}  [{kind}, error <= {err:.1e}]")

    print("\nAcross the centre the value blends two segment ends smoothly:")
    for x in [F(3, 8), F(7, 16), F(1, 2), F(9, 16), F(5, 8)]:
        val, _ = eval_p(wm, (x, F(1, 2)))
        print(f"  p({x}, 1/2) = {show(val[0])}")

    for s in range(4):
        ok, missing = surjectivity_check(wm, s)
        print(f"paired images at depth {s} cover the interval exactly once: {ok}")


if __name__ == "__main__":
    main()
