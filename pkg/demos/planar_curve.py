"""Walk through the planar curve: its order, point codec and the classical recursion check.

Usage: python3 demos/planar_curve.py
"""
from fractions import Fraction as F

from whitney_sfc.analysis import hilbert_compare, hilbert_isometry
from whitney_sfc.curve import adjacency_report, decode_index, encode_index, fn_order, fn_point

NAMES = {(0, 0): "bottom-left", (0, 1): "top-left", (1, 1): "top-right", (1, 0): "bottom-right"}


def main() -> None:
    print("Quadrants in curve order:")
    for rank, idx in enumerate(fn_order(2, 1).tolist()):
        print(f"  rank {rank}: {NAMES[tuple(idx)]}")

    print("\nSub-squares of the first quadrant:")
    for rank, idx in enumerate(fn_order(2, 2).tolist()[:4]):
        print(f"  rank {rank}: {NAMES[tuple(idx)]}")

    print("\nDepth-6 grid: every consecutive pair shares an edge?", adjacency_report(2, 6).ok)

    pt = (F(1, 10), F(9, 10))
    r = encode_index(2, pt, 3)
    cube = decode_index(2, r, 3)
    print(f"\nPoint {tuple(map(str, pt))} sits in the depth-3 cube of rank {r}: corner "
          f"{tuple(map(str, cube.corner))}, side {cube.side}")

    t = F(1, 3)
    _, image, err = fn_point(2, t, 8)
    print(f"Curve value at t = 1/3 (exact, periodic digits): {tuple(map(str, image))}, error {err}")

    print("\nClassical Hilbert recursion: symmetry (swap, flip x, flip y) =", hilbert_isometry())
    print("Disagreements up to depth 6:", hilbert_compare(6))


if __name__ == "__main__":
    main()
