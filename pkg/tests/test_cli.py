import csv
import io
import json
import subprocess
import sys

import pytest

from sidolab.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr().out
    return code, out


def rows(out):
    return [json.loads(line) for line in out.splitlines() if line.strip()]


def test_construct(capsys):
    code, out = run(capsys, "construct", "cycle:4")
    assert code == 0
    assert rows(out)[0]["edges"] == [[0, 1], [0, 3], [1, 2], [2, 3]]


def test_count_and_sidorenko(capsys):
    code, out = run(capsys, "count", "--H", "cycle:4", "--G", "complete:3")
    assert code == 0 and rows(out)[0]["hom"] == 18
    code, out = run(capsys, "check-sidorenko", "--H", "cycle:4", "--G", "complete:3", "--method", "matrix")
    row = rows(out)[0]
    assert code == 0 and (row["lhs"], row["rhs"], row["ratio"]) == ("18", "16/1", "9/8")


def test_sidorenko_failure_exits_one(capsys):
    # K_3 into the 4-cycle has no homomorphism, while the density bound is positive
    code, out = run(capsys, "check-sidorenko", "--H", "complete:3", "--G", "cycle:4")
    assert code == 1 and rows(out)[0]["verdict"] == "fails"


def test_decompose_and_validate(capsys, tmp_path):
    code, out = run(capsys, "decompose", "--H", "cycle:4")
    row = rows(out)[0]
    assert code == 0 and row["decomposition"]["bags"] == [[0, 1, 2], [0, 2, 3]]
    f = tmp_path / "d.json"
    f.write_text(json.dumps(row["decomposition"]))
    code, _ = run(capsys, "validate-decomp", "--H", "cycle:4", "--decomp", str(f))
    assert code == 0
    f.write_text(json.dumps({"bags": [[0, 1, 2, 3]], "tree_edges": []}))
    code, _ = run(capsys, "validate-decomp", "--H", "cycle:4", "--decomp", str(f))
    assert code == 1
    code, out = run(capsys, "decompose", "--H", "complete:3")
    assert code == 1 and rows(out)[0]["decomposition"] is None


def test_brw_commands(capsys):
    code, out = run(capsys, "brw", "dist", "--T", "path:3", "--G", "complete:3")
    assert code == 0 and len(rows(out)) == 12 and {r["prob"] for r in rows(out)} == {"1/12"}
    code, out = run(capsys, "brw", "sample", "--T", "path:3", "--G", "complete:3", "--samples", "3", "--seed", "5")
    assert code == 0 and [r["index"] for r in rows(out)] == [0, 1, 2]
    code, out = run(capsys, "--seed", "3", "--samples", "3000", "brw", "audit", "--T", "complete:2", "--G", "path:4")
    assert code == 0


def test_seeded_output_is_byte_identical(capsys):
    args = ["--seed", "42", "--samples", "20", "brw", "sample", "--T", "star:3", "--G", "cycle:5"]
    _, a = run(capsys, *args)
    _, b = run(capsys, *args)
    assert a == b
    _, c = run(capsys, *args[:1], "43", *args[2:])
    assert c != a


def test_entropy_commands(capsys):
    code, out = run(capsys, "entropy", "tree", "--T", "path:3", "--G", "complete:3")
    assert code == 0 and rows(out)[0]["holds"]
    code, out = run(capsys, "entropy", "chain", "--H", "cycle:4", "--G", "complete:3")
    assert code == 0 and rows(out)[0]["slack"] > 0


def test_density_commands(capsys):
    code, out = run(capsys, "density", "local", "--G", "complete:5", "--rho", "1/2", "--d", "1/2")
    assert code == 0 and rows(out)[0]["dense"]
    code, out = run(capsys, "density", "local", "--G", "cycle:5", "--rho", "1/2", "--d", "1/2")
    assert code == 1 and rows(out)[0]["witness"]
    code, out = run(capsys, "density", "mindeg", "--G", "cycle:8")
    assert code == 0 and rows(out)[0]["removed"] == []
    code, out = run(capsys, "density", "codegree", "--G", "complete:4", "--U", "0,1,2,3")
    row = rows(out)[0]
    assert code == 0 and (row["lhs"], row["rhs"]) == (12, "27/8")


def test_audit_commands(capsys):
    code, out = run(capsys, "audit", "subdivision", "--H", "complete:2", "--G", "complete:3")
    assert code == 0 and rows(out)[0]["lhs"] == 12
    code, out = run(capsys, "audit", "replacement", "--H", "complete:2", "--G", "complete:3", "--t", "2")
    assert code == 0 and rows(out)[0]["rhs"] == 18
    code, _ = run(capsys, "audit", "holder", "--G", "cycle:4", "--r", "1", "--s", "2", "--t", "3")
    assert code == 0
    code, out = run(capsys, "audit", "cartesian", "--H", "complete:2", "--G", "complete:3", "--k", "2")
    row = rows(out)[0]
    assert code == 0 and row["alpha"] == "9/8" and row["values"]["hom_product"] == 114


def test_csv_and_text_formats(capsys):
    code, out = run(capsys, "--format", "csv", "brw", "dist", "--T", "complete:2", "--G", "complete:3")
    table = list(csv.DictReader(io.StringIO(out)))
    assert code == 0 and len(table) == 6 and table[0] == {"image": "[0, 1]", "prob": "1/6"}
    code, out = run(capsys, "--format", "text", "check-sidorenko", "--H", "cycle:4", "--G", "complete:3")
    assert "lhs=18" in out and "ratio=9/8" in out


def test_out_file(capsys, tmp_path):
    f = tmp_path / "r.json"
    code, out = run(capsys, "--out", str(f), "count", "--H", "cycle:4", "--G", "complete:3")
    assert code == 0 and out == ""
    assert json.loads(f.read_text())["hom"] == 18


@pytest.mark.parametrize(
    "argv",
    [
        ["construct", "bogus:3"],
        ["count", "--H", "cycle:2", "--G", "complete:3"],
        ["count", "--H", "cycle:4"],
        ["validate-decomp", "--H", "cycle:4", "--decomp", "/nonexistent/d.json"],
        ["density", "local", "--G", "cycle:5", "--rho", "0", "--d", "1/2"],
        ["--s", "1", "construct", "cycle:4"],
    ],
)
def test_usage_errors_exit_two(capsys, argv):
    assert main(argv) == 2


def test_budget_exit_three(capsys):
    code = main(["--max-hom", "10", "audit", "cartesian", "--H", "complete:2", "--G", "complete:4", "--k", "3"])
    assert code == 3


def test_max_n_cap(capsys):
    assert main(["--max-n", "3", "count", "--H", "cycle:4", "--G", "complete:3"]) == 3


def test_console_entry_point():
    proc = subprocess.run([sys.executable, "-m", "sidolab", "count", "--H", "complete:2", "--G", "cycle:5"],
                          capture_output=True, text=True, check=False)
    assert proc.returncode == 0 and json.loads(proc.stdout)["hom"] == 10
