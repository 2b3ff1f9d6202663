import subprocess
import sys
from pathlib import Path

import pytest

import mapfc
from mapfc.cli import EXIT_CAP, EXIT_FORMAT, EXIT_MISMATCH, EXIT_OK, main
from mapfc.cnf import parse_dimacs

DATA = Path(__file__).parent / "data"


def test_solve_writes_solution(tmp_path):
    out = tmp_path / "p3.sol"
    code = main(["solve", "--map", str(DATA / "p3.map"), "--scen", str(DATA / "p3.scen"),
                 "--backend", "smt-cbs", "--out", str(out)])
    assert code == EXIT_OK
    assert out.read_text() == "agent 0: v1 v2 v3\nsoc=2 makespan=2\n"


@pytest.mark.parametrize("backend", ["eager-sat", "smt-cbs", "mip-bnp", "oracle"])
def test_solve_graph_all_backends(backend, capsys):
    assert main(["solve", "--map", str(DATA / "star.graph"), "--backend", backend]) == EXIT_OK
    assert capsys.readouterr().out.endswith("soc=7 makespan=4\n")


def test_solve_cap_and_unsolvable(tmp_path, capsys):
    assert main(["solve", "--map", str(DATA / "star.graph"), "--soc-cap", "6"]) == EXIT_CAP
    assert capsys.readouterr().out == "cap\n"
    swap = tmp_path / "swap.graph"
    swap.write_text("v a\nv b\nv c\ne a b\ne b c\na a c\na c a\n")
    assert main(["solve", "--map", str(swap)]) == EXIT_OK
    assert capsys.readouterr().out == "unsolvable\n"


def test_format_errors(tmp_path, capsys):
    bad = tmp_path / "bad.map"
    bad.write_text("type octile\nheight 2\nwidth 2\nmap\n..\n")
    assert main(["solve", "--map", str(bad)]) == EXIT_FORMAT
    assert "line" in capsys.readouterr().err
    assert main(["solve", "--map", str(tmp_path / "missing.map")]) == EXIT_FORMAT
    scen = tmp_path / "bad.scen"
    scen.write_text("version 1\n0\tp3.map\t3\t1\t0\t0\t9\t0\t9\n")
    assert main(["solve", "--map", str(DATA / "p3.map"), "--scen", str(scen)]) == EXIT_FORMAT


def test_single_agent_length_warning(tmp_path, capsys):
    scen = tmp_path / "p3.scen"
    scen.write_text("version 1\n0\tp3.map\t3\t1\t0\t0\t2\t0\t2.5\n")
    assert main(["solve", "--map", str(DATA / "p3.map"), "--scen", str(scen)]) == EXIT_OK
    assert "warning" in capsys.readouterr().err
    main(["solve", "--map", str(DATA / "p3.map"), "--scen", str(DATA / "p3.scen")])
    assert "warning" not in capsys.readouterr().err


def test_encode_header(tmp_path, capsys):
    out = tmp_path / "p3.cnf"
    assert main(["encode", "--map", str(DATA / "p3.map"), "--scen", str(DATA / "p3.scen"),
                 "--soc", "2", "--dimacs", str(out)]) == EXIT_OK
    err = capsys.readouterr().err
    counts = dict(part.split("=") for part in err.split())
    nv, clauses = parse_dimacs(out.read_text())
    assert nv == int(counts["vars"]) == int(counts["x"]) + int(counts["e"]) + int(counts["aux"])
    assert len(clauses) == int(counts["clauses"])
    assert main(["encode", "--map", str(DATA / "p3.map"), "--scen", str(DATA / "p3.scen"),
                 "--soc", "1", "--dimacs", str(out)]) == EXIT_CAP


def test_bench_dir(tmp_path):
    csv = tmp_path / "out.csv"
    code = main(["bench", "--dir", str(DATA), "--backends", "eager-sat,smt-cbs,oracle", "--csv", str(csv)])
    assert code == EXIT_OK
    rows = csv.read_text().splitlines()
    assert rows[0] == (DATA / "bench_header.csv").read_text().strip()
    names = {r.split(",")[0] for r in rows[1:]}
    assert names == {"p3", "small", "star"}


def test_bench_random_corpus(capsys):
    assert main(["bench", "--seed", "3", "--count", "3", "--backends", "eager-sat,smt-cbs"]) == EXIT_OK
    cap = capsys.readouterr()
    assert len(cap.out.splitlines()) == 1 + 3 * 2
    assert "mean laziness ratio" in cap.err


def test_bench_mismatch_exit(monkeypatch, capsys):
    real = mapfc.solve

    def lying(inst, backend, *a, **kw):
        r = real(inst, backend, *a, **kw)
        if backend == "oracle" and r.soc is not None:
            r.soc += 1
        return r

    monkeypatch.setattr(mapfc, "solve", lying)
    assert main(["bench", "--count", "2", "--backends", "eager-sat,oracle"]) == EXIT_MISMATCH
    assert "mismatch: seed0" in capsys.readouterr().err


def test_module_entry_points(tmp_path):
    r = subprocess.run([sys.executable, "-m", "mapfc", "solve", "--map", str(DATA / "star.graph")],
                       capture_output=True, text=True)
    assert r.returncode == 0 and "soc=7" in r.stdout
    cnf = tmp_path / "f.cnf"
    cnf.write_text("p cnf 2 2\n1 0\n-1 0\n")
    r = subprocess.run([sys.executable, "-m", "mapfc.sat", str(cnf)], capture_output=True, text=True)
    assert r.returncode == 20 and r.stdout == "s UNSATISFIABLE\n"
    cnf.write_text("p cnf 2 1\n1 2 0\n")
    r = subprocess.run([sys.executable, "-m", "mapfc.sat", str(cnf)], capture_output=True, text=True)
    assert r.returncode == 10 and r.stdout.startswith("s SATISFIABLE\nv ")
