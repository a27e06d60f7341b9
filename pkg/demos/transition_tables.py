"""Write the derived rectangle-traversal tables and curve state counts as Markdown.

Usage: python3 demos/transition_tables.py [output.md]
"""
import sys

from whitney_sfc.curve import SN_BASES, sn_table, transducer


def table_markdown(n: int, base: str) -> str:
    tab = sn_table(n, base)
    lines = [
        f"### n = {n}, base state {base} {SN_BASES[base].entry} -> {SN_BASES[base].exit}",
        "",
        "| state | method | entry | exit | cells visited (fine, coarse) | next states |",
        "|---|---|---|---|---|---|",
    ]
    for i, (st, cells, nxt) in enumerate(zip(tab.states, tab.cell, tab.next)):
        visited = " ".join(f"({c.fine},{c.coarse})" for c in cells)
        lines.append(
            f"| {i} | {st.method} | {st.entry} | {st.exit} | {visited} | {' '.join(map(str, nxt))} |"
        )
    return "\n".join(lines) + "\n"


def document(max_n: int = 4) -> str:
    parts = [
        "# Rectangle traversal tables",
        "",
        "Generated by `python3 demos/transition_tables.py`.",
        "",
        "The unit rectangle is split into a grid of `2^(n-1)` fine rows by 2 coarse",
        "columns.  A state is fixed by the corner where the traversal enters and the",
        "corner where it leaves, each written as `(fine, coarse)` bits.  Method P",
        "keeps the coarse bit between entry and exit and snakes row by row; method H",
        "keeps the fine bit, walks one full column and returns along the other.",
        "Children's entry and exit corners are derived by chaining: each sub-cell",
        "leaves through the corner it shares with the next sub-cell and the last one",
        "leaves through the parent's exit.  Every table below is closed under this",
        "rule and passes the continuity check of `check_continuity`.",
        "",
    ]
    for n in range(2, max_n + 1):
        for base in ("P", "H"):
            parts.append(table_markdown(n, base))
    parts += [
        "## States of the composed curve transducer",
        "",
        "| n | states |",
        "|---|---|",
    ]
    for n in range(1, 6):
        parts.append(f"| {n} | {transducer(n).nstates} |")
    return "\n".join(parts) + "\n"


if __name__ == "__main__":
    text = document()
    if len(sys.argv) > 1:
        with open(sys.argv[1], "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
