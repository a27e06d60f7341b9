import csv
import io
import json
import subprocess
import sys
from fractions import Fraction as F

import pytest

from whitney_sfc.cli import main
from whitney_sfc.curve import Transducer, adjacency_report, curve, transducer


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_order_csv_depth1(capsys):
    code, out, _ = run(capsys, "curve", "order", "--n", "2", "--depth", "1", "--format", "csv")
    assert code == 0
    rows = list(csv.DictReader(io.StringIO(out)))
    # bottom-left, top-left, top-right, bottom-right quadrants
    assert [(r["x0"], r["x1"]) for r in rows] == [("0", "0"), ("0", "1/2"), ("1/2", "1/2"), ("1/2", "0")]
    for r in rows:
        digit = 1 + 2 * int(F(r["x0"]) * 2) + int(F(r["x1"]) * 2)
        assert r["digits"] == str(digit) and r["side"] == "1/2"
    assert [r["rank"] for r in rows] == ["0", "1", "2", "3"]


def test_order_unit_interval(capsys):
    code, out, _ = run(capsys, "curve", "order", "--n", "1", "--depth", "3")
    rows = list(csv.DictReader(io.StringIO(out)))
    assert code == 0 and [r["x0"] for r in rows] == [str(F(i, 8)) for i in range(8)]


@pytest.mark.parametrize("s,count", [(2, 64), (3, 512)])
def test_order_json_n3(capsys, s, count):
    code, out, _ = run(capsys, "curve", "order", "--n", "3", "--depth", str(s), "--format", "json")
    rows = json.loads(out)
    assert code == 0 and len(rows) == count == 2 ** (3 * s)
    corners = [[F(c) for c in r["corner"]] for r in rows]
    for a, b in zip(corners, corners[1:]):
        steps = [abs(u - v) for u, v in zip(a, b)]
        assert sorted(steps) == [0, 0, F(1, 1 << s)]
    assert adjacency_report(3, s).ok


def test_order_svg(capsys):
    code, out, _ = run(capsys, "curve", "order", "--n", "2", "--depth", "2", "--format", "svg")
    assert code == 0 and out.startswith("<svg") and out.count(",") == 16
    assert run(capsys, "curve", "order", "--n", "3", "--depth", "1", "--format", "svg")[0] == 2


@pytest.mark.parametrize("n,s", [(2, 6), (5, 2)])
def test_curve_verify_passes(capsys, n, s):
    code, out, _ = run(capsys, "curve", "verify", "--n", str(n), "--depth", str(s))
    doc = json.loads(out)
    assert code == 0
    assert doc["command"] == "curve verify" and doc["artifacts"] == []
    assert all(c["status"] == "pass" for c in doc["checks"])
    assert {"name", "paper_ref", "status", "detail"} <= set(doc["checks"][0])


def test_curve_verify_tampered_table(capsys, monkeypatch):
    t = transducer(2)
    child = [list(r) for r in t.child]
    child[0][1], child[0][2] = child[0][2], child[0][1]
    monkeypatch.setattr(curve(2), "t", Transducer(2, child, [list(r) for r in t.nxt]))
    code, out, _ = run(capsys, "curve", "verify", "--n", "2", "--depth", "2")
    doc = json.loads(out)
    assert code == 1
    adj = next(c for c in doc["checks"] if c["name"] == "adjacency")
    first = adjacency_report(2, 2).violations[0]
    assert adj["status"] == "fail" and adj["detail"]["violations"][0] == json.loads(json.dumps(first))


def test_encode_decode(capsys):
    assert run(capsys, "curve", "encode", "--n", "2", "--depth", "1", "0.1,0.9")[:2] == (0, "1\n")
    code, out, _ = run(capsys, "curve", "decode", "--n", "2", "--depth", "1", "3")
    assert code == 0 and out.splitlines()[-1] == "1/2,0"


def test_encode_decode_sweep(capsys):
    for r in range(64):
        _, out, _ = run(capsys, "curve", "decode", "--n", "2", "--depth", "3", str(r))
        corner = out.splitlines()[-1]
        lo = [F(v) for v in corner.split(",")]
        centre = ",".join(str(v + F(1, 16)) for v in lo)
        assert run(capsys, "curve", "encode", "--n", "2", "--depth", "3", centre)[1] == f"{r}\n"


def test_encode_rejects_bad_point(capsys):
    code, _, err = run(capsys, "curve", "encode", "--n", "2", "--depth", "1", "half,1")
    assert code == 2 and "error" in err
    assert run(capsys, "curve", "encode", "--n", "2", "--depth", "1", "0.5")[0] == 2


@pytest.mark.parametrize("m,n,d", [(2, 1, 3), (3, 2, 1)])
def test_whitney_verify_passes(capsys, m, n, d):
    code, out, _ = run(capsys, "whitney", "verify", "--m", str(m), "--n", str(n), "--depth", str(d))
    doc = json.loads(out)
    assert code == 0 and all(c["status"] == "pass" for c in doc["checks"])
    names = {c["name"] for c in doc["checks"]}
    assert {"connectivity", "segment_constancy"} <= names or len(names) >= 4


def test_whitney_equal_dimensions_rejected(capsys):
    code, _, err = run(capsys, "whitney", "verify", "--m", "2", "--n", "2", "--depth", "1")
    assert code == 2 and err


def test_whitney_build_json(capsys):
    code, out, _ = run(capsys, "whitney", "build", "--m", "2", "--n", "1", "--depth", "2")
    doc = json.loads(out)
    assert code == 0
    segs = [s for level in doc["segments"].values() for s in level]
    assert len(doc["segments"]["1"]) == 3 and len(doc["segments"]["2"]) == 15
    for s in segs:
        assert s["value_start"] == s["value_end"]
        moved = [a for a, (u, v) in enumerate(zip(s["start"], s["end"])) if F(u) != F(v)]
        assert moved == [s["axis"]]


def test_whitney_build_svg(capsys):
    code, out, _ = run(capsys, "whitney", "build", "--m", "2", "--n", "1", "--depth", "2", "--format", "svg")
    assert code == 0 and out.startswith("<svg")


def test_whitney_probe_report(capsys):
    code, out, _ = run(capsys, "whitney", "probe", "--m", "2", "--n", "1", "--depth", "2", "--points", "4", "--k", "1.5")
    doc = json.loads(out)
    assert code in (0, 1)
    probe = doc["checks"][0]
    assert probe["detail"]["precision_bits"] == 128 and probe["detail"]["decreasing"]
    assert doc["checks"][1]["detail"]["j0"] == 8
    assert run(capsys, "whitney", "probe", "--m", "2", "--n", "1", "--k", "2")[0] == 2


def test_budget_exceeded(capsys, monkeypatch):
    code, _, err = run(capsys, "curve", "order", "--n", "2", "--depth", "4", "--budget", "100")
    assert code == 2 and "budget" in err.lower()
    monkeypatch.setenv("WHITNEY_SFC_BUDGET", "100")
    assert run(capsys, "curve", "order", "--n", "2", "--depth", "4")[0] == 2
    monkeypatch.setenv("WHITNEY_SFC_BUDGET", "1000")
    assert run(capsys, "curve", "order", "--n", "2", "--depth", "4")[0] == 0


def test_missing_dimension_is_usage_error(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["curve", "order"])
    assert exc.value.code == 2


def test_output_file_and_determinism(tmp_path, capsys):
    paths = [tmp_path / "a.json", tmp_path / "b.json"]
    for p in paths:
        assert main(["whitney", "build", "--m", "3", "--n", "1", "--depth", "2", "--out", str(p)]) == 0
    assert paths[0].read_bytes() == paths[1].read_bytes()
    verify = [run(capsys, "curve", "verify", "--n", "3", "--depth", "2")[1] for _ in range(2)]
    assert verify[0] == verify[1]
    outs = [run(capsys, "whitney", "probe", "--m", "2", "--n", "1", "--depth", "2", "--points", "3")[1] for _ in range(2)]
    assert outs[0] == outs[1]


def test_module_entry_point():
    res = subprocess.run(
        [sys.executable, "-m", "whitney_sfc", "curve", "decode", "--n", "2", "--depth", "1", "3"],
        capture_output=True,
        text=True,
        check=False,
    )
    assert res.returncode == 0 and res.stdout.splitlines()[-1] == "1/2,0"
