"""Inspect the majorant sequence and the measured ratios it is meant to control.

Usage: python3 demos/bound_series.py
"""
from whitney_sfc.analysis import edge_segments, lemma21_crossover, lemma21_series, lemma22_probe
from whitney_sfc.whitney import WhitneyMap


def main() -> None:
    for m, n, k in [(2, 1, 1.5), (3, 2, 1.3), (3, 1, 2.5), (2, 1, 1.9)]:
        j0 = lemma21_crossover(m, n, k)
        vals = lemma21_series(m, n, k, range(j0, j0 + 31))
        print(f"(m, n, k) = ({m}, {n}, {k}): crossover j0 = {j0}, "
              f"term(j0) = {float(vals[0]):.3e}, term(j0 + 30) / term(j0) = {float(vals[30] / vals[0]):.3e}")

    wm = WhitneyMap(2, 1, depth=30)
    segs = [(j, s) for j in range(1, 5) for s in edge_segments(wm, j)]
    rep = lemma22_probe(wm, segs, 1.5)
    print("\nEdge segments of cubes at levels 1..4, k = 1.5:")
    for j, r in rep.trend["per_level"].items():
        print(f"  level {j}: largest ratio {r:.3f}")
    print("largest ratio over the majorant at the cube level:", round(rep.trend["max_ratio_over_series"], 4))
    print("largest ratio over the majorant built on the smallest crossed gap:",
          round(rep.trend["max_ratio_over_smallest_gap_bound"], 4))


if __name__ == "__main__":
    main()
