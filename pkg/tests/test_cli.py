import json
import subprocess
import sys

import pytest

from qgkit.cli import main
from qgkit.corpus import corpus_entry
from qgkit.identities import holds
from qgkit.search import SearchProblem, search
from qgkit.spectrum import spectrum_report
from qgkit.table import parse_table, read_table, serialize_table, write_table


@pytest.fixture
def table1(tmp_path):
    p = tmp_path / "table1.txt"
    write_table(corpus_entry("table1_order8").table, p)
    return str(p)


@pytest.fixture
def z2(tmp_path):
    p = tmp_path / "z2.txt"
    p.write_text("2\n0 1\n1 0\n")
    return str(p)


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


class TestCheck:
    def test_table1_holds(self, capsys, table1):
        code, out, _ = run(capsys, "check", table1, "--identity", "genassoc_q")
        assert code == 0 and "genassoc_q: holds" in out
        assert "is_quasigroup" in out

    def test_counterexample(self, capsys, z2):
        code, out, _ = run(capsys, "check", z2, "--identity", "idempotent")
        assert code == 1 and "x=1" in out

    def test_missing_file(self, capsys, tmp_path):
        code, out, err = run(capsys, "check", str(tmp_path / "missing.txt"), "--identity", "idempotent")
        assert code == 2 and not out and "cannot read" in err

    def test_parse_error(self, capsys, tmp_path):
        p = tmp_path / "bad.txt"
        p.write_text("2\n0 2\n1 0\n")
        code, _, err = run(capsys, "check", str(p), "--identity", "idempotent")
        assert code == 2 and "out of range" in err

    def test_bad_identity(self, capsys, z2):
        code, _, err = run(capsys, "check", z2, "--identity", "x*y = q")
        assert code == 2 and "unknown symbol" in err

    def test_inline_identity(self, capsys, z2):
        code, out, _ = run(capsys, "check", z2, "-i", "x*y = y*x", "--no-props")
        assert code == 0 and out.strip() == "x*y = y*x: holds"

    def test_records(self, capsys, z2):
        code, out, _ = run(capsys, "--format", "records", "check", z2, "-i", "idempotent", "-i", "medial")
        recs = [json.loads(line) for line in out.splitlines()]
        assert recs[0] == {"identity": "idempotent", "holds": False, "counterexample": {"x": 1}}
        assert recs[1]["holds"] is True
        assert recs[2]["is_loop"] is True


def test_props(capsys, table1):
    code, out, _ = run(capsys, "props", table1)
    assert code == 0 and "is_loop" in out and "false" in out


class TestConstruct:
    def test_tq_verify(self, capsys):
        code, out, err = run(capsys, "construct", "tq", "--group", "zn:15", "--phi", "8", "--psi", "13", "--a", "0",
                             "--verify", "belousov_xyyx")
        assert code == 0 and "belousov_xyyx: holds" in err
        assert holds(parse_table(out), "belousov_xyyx")

    def test_gf2r(self, capsys, tmp_path):
        dest = tmp_path / "gf4.txt"
        code, out, _ = run(capsys, "construct", "gf2r", "--r", "2", "--a", "2", "--verify", "schroeder2", "--out", str(dest))
        assert code == 0 and "schroeder2: holds" in out
        assert read_table(dest).order == 4

    def test_non_unit(self, capsys):
        code, out, err = run(capsys, "construct", "tq", "--group", "zn:6", "--phi", "2", "--psi", "1")
        assert code == 2 and not out and "not an automorphism" in err

    def test_verify_failure(self, capsys):
        code, _, err = run(capsys, "construct", "tq", "--group", "zn:15", "--phi", "8", "--psi", "13",
                           "--verify", "genassoc_q")
        assert code == 1 and "fails" in err

    def test_matrix_group(self, capsys):
        code, out, _ = run(capsys, "construct", "tq", "--group", "ea:2^3", "--phi", "010;111;011", "--psi", "110;101;010",
                           "--verify", "genassoc_q")
        assert code == 0

    def test_missing_args(self, capsys):
        assert run(capsys, "construct", "tq", "--phi", "2")[0] == 2
        assert run(capsys, "construct", "gf2r", "--r", "2")[0] == 2

    def test_gf2r_bad_a(self, capsys):
        code, _, err = run(capsys, "construct", "gf2r", "--r", "2", "--a", "1")
        assert code == 2 and "a+1 = 0" in err


def test_product_commands(capsys, tmp_path):
    a, b = tmp_path / "a.txt", tmp_path / "b.txt"
    write_table(corpus_entry("stein3_order4").table, a)
    write_table(corpus_entry("stein3_order5").table, b)
    code, out, _ = run(capsys, "product", str(a), str(b), "--verify", "stein3")
    assert code == 0 and parse_table(out).order == 20
    code2, out2, _ = run(capsys, "construct", "product", str(a), str(b))
    assert code2 == 0 and out2 == out


class TestSearch:
    def test_schroeder_order5(self, capsys):
        code, out, _ = run(capsys, "search", "--order", "5", "--identity", "schroeder2", "--mode", "count")
        assert code == 1 and out.strip() == "0 models (exhaustive)"

    def test_first_model(self, capsys):
        code, out, _ = run(capsys, "search", "--order", "3", "--identity", "belousov_xyyx", "--mode", "first")
        assert code == 0
        t = parse_table(out.split("\n\n")[0].rsplit("model found", 1)[0])
        assert t.order == 3 and holds(t, "belousov_xyyx")

    def test_order1(self, capsys):
        code, out, _ = run(capsys, "search", "--order", "1", "--mode", "count")
        assert code == 0 and out.startswith("1 ")

    def test_inconclusive(self, capsys):
        code, out, _ = run(capsys, "search", "--order", "5", "--mode", "count", "--budget", "10")
        assert code == 1 and "inconclusive" in out

    def test_records_equal_library(self, capsys):
        code, out, _ = run(capsys, "--format", "records", "search", "--order", "4", "-i", "stein3", "--mode", "enumerate")
        lib = search(SearchProblem(4, ("stein3",), mode="enumerate"))
        rec = json.loads(out)
        assert rec["count"] == lib.count and rec["models"] == [[list(r) for r in m.rows] for m in lib.models]

    def test_jobs_identical_output(self, capsys):
        argv = ["search", "--order", "4", "-i", "belousov_xyyx", "--mode", "enumerate"]
        _, one, _ = run(capsys, *argv)
        _, three, _ = run(capsys, "--jobs", "3", *argv)
        assert one == three

    def test_problem_file(self, capsys, tmp_path):
        p = tmp_path / "p.txt"
        p.write_text("order 4\nidentity genassoc_q\nconstraint left_identity_at_0\nmode count\n")
        code, out, _ = run(capsys, "search", "--problem", str(p))
        assert code == 0 and out.strip() == "1 model (exhaustive)"

    def test_fixed_cells(self, capsys):
        code, out, _ = run(capsys, "search", "--order", "3", "--fix", "0,0,2", "--mode", "count")
        assert code == 0 and out.startswith("4 models")

    def test_inconsistent(self, capsys):
        code, _, err = run(capsys, "search", "--order", "3", "--fix", "0,0,2", "--fix", "0,1,2")
        assert code == 2 and "twice" in err

    def test_usage_error(self, capsys):
        with pytest.raises(SystemExit) as exc:
            main(["search", "--mode", "everything"])
        assert exc.value.code == 2


class TestSpectrum:
    def test_schroeder(self, capsys):
        code, out, _ = run(capsys, "spectrum", "--identity", "schroeder2", "--max", "5")
        assert code == 0
        line5 = [l for l in out.splitlines() if l.split()[0] == "5"][0]
        assert "none_by_search" in line5

    def test_idempotent(self, capsys):
        code, out, _ = run(capsys, "spectrum", "--identity", "idempotent", "--max", "3")
        assert code == 0 and "exists" in out.splitlines()[-1]

    def test_records_equal_library(self, capsys, tmp_path):
        dest = tmp_path / "spec.jsonl"
        code, out, _ = run(capsys, "--format", "records", "spectrum", "-i", "belousov_xyyx", "--max", "6",
                           "--budget", "500", "--out", str(dest))
        assert code == 0
        lib = spectrum_report("belousov_xyyx", 6, budget=500).to_records()
        assert out.strip() == lib == dest.read_text().strip()

    def test_too_large(self, capsys):
        assert run(capsys, "spectrum", "-i", "stein3", "--max", "100")[0] == 2


def test_console_script(tmp_path):
    p = tmp_path / "z2.txt"
    p.write_text(serialize_table(corpus_entry("belousov_xyyx_order3").table))
    res = subprocess.run([sys.executable, "-m", "qgkit.cli", "check", str(p), "-i", "belousov_xyyx"],
                         capture_output=True, text=True)
    assert res.returncode == 0 and "holds" in res.stdout
