from __future__ import annotations

import csv
import io
import json

import pytest

from ssratio.cli import REPORT_COLUMNS, main, parse_range
from ssratio.graphs import complete_graph, read_graph, write_graph


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_gen_cube_star(capsys):
    code, out, _ = run(capsys, "gen", "--family", "cube_star", "--d", "1")
    data = json.loads(out)
    assert code == 0 and data["n"] == 4 and len(data["edges"]) == 3


def test_gen_delta_is_six_cycle(tmp_path, capsys):
    p = tmp_path / "d1.json"
    assert run(capsys, "gen", "--family", "delta", "--d", "1", "--seed", "0", "--out", str(p))[0] == 0
    g = read_graph(p)
    assert g.n == 6 and all(deg == 2 for deg in g.degrees())


def test_gen_file_round_trip(tmp_path, capsys):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    run(capsys, "gen", "--family", "delta", "--d", "2", "--seed", "3", "--out", str(a))
    run(capsys, "gen", "--family", "file", "--file", str(a), "--out", str(b))
    assert a.read_bytes() == b.read_bytes()


def test_bound_lp(capsys):
    code, out, _ = run(capsys, "bound", "--family", "cube_star", "--d", "1", "--mode", "worst",
                       "--method", "lp")
    assert code == 0 and out.strip() == "3/2"


def test_bound_lp_too_large(capsys):
    code, _, err = run(capsys, "bound", "--family", "cube_star", "--d", "3", "--method", "lp")
    assert code == 2 and "--method certificate" in err


def test_bound_certificate(tmp_path, capsys):
    cert = tmp_path / "c.json"
    code, out, _ = run(capsys, "bound", "--family", "cube_star", "--d", "5", "--mode", "worst",
                       "--method", "certificate", "--cert-out", str(cert), "--format", "json")
    rec = json.loads(out)
    assert code == 0 and rec["value"] == "7/2" and rec["verdict"] == "valid"
    code, out, _ = run(capsys, "cert", "--check", str(cert))
    assert code == 0 and out.strip() == "valid"


def test_bound_delta_average(capsys):
    code, out, _ = run(capsys, "bound", "--family", "delta", "--d", "3", "--seed", "7",
                       "--mode", "average", "--method", "certificate")
    assert code == 0 and out.splitlines()[0] == "5/2"


def test_bound_csv(capsys):
    code, out, _ = run(capsys, "bound", "--family", "delta", "--d", "1", "--mode", "average",
                       "--method", "lp", "--format", "csv")
    rows = list(csv.DictReader(io.StringIO(out)))
    assert code == 0 and rows[0]["value"] == "3/2"


def test_bound_without_builder(capsys):
    code, _, err = run(capsys, "bound", "--family", "cube_star", "--d", "2", "--mode", "average",
                       "--method", "certificate")
    assert code == 2 and "no constructive certificate" in err


def test_cert_lp_dual(tmp_path, capsys):
    p = tmp_path / "dual.json"
    code, _, err = run(capsys, "cert", "--family", "cube_star", "--d", "1", "--method", "lp",
                       "--out", str(p))
    assert code == 0 and "valid" in err
    code, out, _ = run(capsys, "cert", "--check", str(p), "--format", "json")
    assert code == 0 and json.loads(out)["implied"] == "3/2"


def test_cert_tampered_fails(tmp_path, capsys):
    p = tmp_path / "l.json"
    run(capsys, "cert", "--family", "cube_star", "--d", "2", "--lemma", "1", "--out", str(p))
    data = json.loads(p.read_text())
    data["target"]["bound"] = "5"
    p.write_text(json.dumps(data))
    code, out, _ = run(capsys, "cert", "--check", str(p))
    assert code == 1 and out.startswith("invalid")


def test_scheme_cube_star(tmp_path, capsys):
    p = tmp_path / "s.json"
    code, out, _ = run(capsys, "scheme", "--family", "cube_star", "--d", "2", "--q", "11",
                       "--out", str(p), "--format", "json")
    rep = json.loads(out)
    assert code == 0 and rep["max_ratio"] == "2" and rep["verification"]["perfect"]
    assert json.loads(p.read_text())["modulus"] == 11


def test_scheme_delta(capsys):
    code, out, _ = run(capsys, "scheme", "--family", "delta", "--d", "1", "--q", "7")
    assert code == 0 and "average ratio: 3/2" in out


def test_scheme_file(tmp_path, capsys):
    p = tmp_path / "k2.json"
    write_graph(complete_graph(2), p)
    code, out, _ = run(capsys, "scheme", "--family", "file", "--file", str(p), "--q", "3")
    assert code == 0 and "max ratio: 1" in out


def test_scheme_rejects_small_field(capsys):
    code, _, err = run(capsys, "scheme", "--family", "cube_star", "--d", "2", "--q", "5")
    assert code == 2
    code, _, err = run(capsys, "scheme", "--family", "cube_star", "--d", "1", "--q", "9")
    assert code == 2 and "prime" in err


def _report(capsys, *argv):
    code, out, _ = run(capsys, "report", *argv)
    return code, list(csv.DictReader(io.StringIO(out))), out


def test_report_cube_star(capsys):
    code, rows, _ = _report(capsys, "--family", "cube_star", "--d", "1-4")
    assert code == 0 and len(rows) == 4
    for r in rows:
        d = int(r["d"])
        want = str((d + 2) // 2) if d % 2 == 0 else f"{d + 2}/2"
        assert r["lower"] == r["upper"] == want and r["match"] == "true"


def test_report_delta_seeds(capsys, monkeypatch):
    monkeypatch.setenv("SSRATIO_WORKERS", "2")
    code, rows, _ = _report(capsys, "--family", "delta", "--d", "1-3", "--seed", "0,1,2")
    assert code == 0 and len(rows) == 9
    assert [(r["d"], r["seed"]) for r in rows] == [(str(d), str(s)) for d in (1, 2, 3) for s in (0, 1, 2)]
    assert all(r["match"] == "true" for r in rows)


def test_report_lp_rows(capsys):
    code, rows, _ = _report(capsys, "--family", "delta", "--d", "1", "--method", "lp")
    assert code == 0 and rows[0]["lower_method"] == "lp" and rows[0]["lower"] == "3/2"


def test_report_empty_range(capsys):
    code, rows, out = _report(capsys, "--d", "1-0")
    assert code == 0 and rows == [] and out.strip() == ",".join(REPORT_COLUMNS)


def test_parse_range():
    assert parse_range("3") == [3]
    assert parse_range("1-4") == [1, 2, 3, 4]
    assert parse_range("2..3") == [2, 3]
    assert parse_range("") == []
