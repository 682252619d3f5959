import json
import subprocess
import sys

import pytest

from polyinv.cli import run
from polyinv.constructible import matrix_space
from polyinv.idealkit import Ideal
from polyinv.polycore import VarSpace

from conftest import LOOP_PROGRAM

STE = {"dim": 2, "matrices": [[["0", "-1"], ["1", "0"]], [["1", "1"], ["0", "1"]], [["1", "0"], ["0", "0"]]]}
DET = "x_1_1*x_2_2 - x_1_2*x_2_1"


@pytest.fixture
def files(tmp_path):
    ste = tmp_path / "ste.json"
    ste.write_text(json.dumps(STE))
    loop = tmp_path / "loop.ap"
    loop.write_text(LOOP_PROGRAM)
    return tmp_path, ste, loop


def run_json(argv, out):
    code = run(argv + ["--output", str(out)])
    return code, json.loads(out.read_text())


def test_closure_command(files):
    tmp, ste, _ = files
    code, doc = run_json(["closure", "--input", str(ste)], tmp / "out.json")
    assert code == 0 and doc["status"] == "exact"
    space = matrix_space(2)
    assert Ideal.parse(space, doc["combined_ideal"]) == Ideal.parse(space, [f"({DET})^2 - ({DET})"])
    for piece in doc["pieces"]:
        Ideal.parse(space, piece["ideal"])
    assert doc["provenance"]["seed"] == 0 and "seconds" not in doc["provenance"]


def test_closure_output_is_deterministic(files):
    tmp, ste, _ = files
    run(["closure", "--input", str(ste), "--seed", "4", "--output", str(tmp / "a.json")])
    run(["closure", "--input", str(ste), "--seed", "4", "--output", str(tmp / "b.json")])
    assert (tmp / "a.json").read_bytes() == (tmp / "b.json").read_bytes()


def test_certify_accepts_exact_closure(files):
    tmp, ste, _ = files
    run(["closure", "--input", str(ste), "--output", str(tmp / "c.json")])
    code, doc = run_json(["certify", "--input", str(ste), "--closure", str(tmp / "c.json")], tmp / "v.json")
    assert code == 0 and doc["certified"] is True


def test_certify_rejects_foreign_generator(files):
    tmp, _, _ = files
    one = tmp / "one.json"
    one.write_text(json.dumps({"dim": 1, "matrices": [[["1"]]]}))
    two = tmp / "two.json"
    two.write_text(json.dumps({"dim": 1, "matrices": [[["2"]]]}))
    run(["closure", "--input", str(one), "--output", str(tmp / "c.json")])
    code, doc = run_json(["certify", "--input", str(two), "--closure", str(tmp / "c.json")], tmp / "v.json")
    assert code == 2 and doc["certified"] is False and doc["status"] == "inconclusive"


def test_invariants_command(files):
    tmp, _, loop = files
    code, doc = run_json(["invariants", "--program", str(loop)], tmp / "inv.json")
    assert code == 0
    xy = VarSpace(doc["variables"])
    locs = {entry["name"]: entry for entry in doc["locations"]}
    assert Ideal.parse(xy, locs["q1"]["ideal"]) == Ideal.parse(xy, ["x", "y"])
    assert Ideal.parse(xy, locs["q2"]["ideal"]) == Ideal.parse(xy, ["x - 9*x^2 - y + 24*x*y - 16*y^2"])


def test_real_and_complex_fields_agree(files):
    tmp, _, loop = files
    _, real = run_json(["invariants", "--program", str(loop), "--field", "real"], tmp / "r.json")
    _, cplx = run_json(["invariants", "--program", str(loop), "--field", "complex"], tmp / "c.json")
    assert real["locations"] == cplx["locations"]
    assert real["provenance"]["field"] == "real" and cplx["provenance"]["field"] == "complex"


def test_oracle_command(files):
    tmp, _, loop = files
    code, doc = run_json(["oracle", "--program", str(loop), "--degree", "1"], tmp / "o.json")
    assert code == 0
    locs = {entry["name"]: entry["relations"] for entry in doc["locations"]}
    assert locs["q2"] == []
    assert len(locs["q1"]) == 2


def test_finite_command(files):
    tmp, _, _ = files
    swap = tmp / "swap.json"
    swap.write_text(json.dumps({"dim": 2, "matrices": [[["0", "1"], ["1", "0"]]]}))
    code, doc = run_json(["finite", "--input", str(swap)], tmp / "f.json")
    assert code == 0 and doc["finite"] is True and doc["count_bound"] == 2


def test_exit_codes(files, tmp_path):
    bad_json = tmp_path / "bad.json"
    bad_json.write_text('{"dim": 2, "matrices": [[[0.5, 1], [1, 0]]]}')
    assert run(["closure", "--input", str(bad_json)]) == 1
    bad_prog = tmp_path / "bad.ap"
    bad_prog.write_text("vars x; locations q; init q;\nedge q -> q { x := x*x };\n")
    assert run(["invariants", "--program", str(bad_prog)]) == 1
    assert run(["closure"]) == 1
    golden = tmp_path / "golden.json"
    golden.write_text(json.dumps({"dim": 2, "matrices": [[["1", "1"], ["1", "0"]]]}))
    assert run(["closure", "--input", str(golden)]) == 3


def test_module_entry_point(files):
    tmp, ste, _ = files
    proc = subprocess.run([sys.executable, "-m", "polyinv", "finite", "--input", str(ste)], capture_output=True, text=True)
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["finite"] is False
