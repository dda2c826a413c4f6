import json
import subprocess
import sys

import pytest

from dgdeform.artin import dual_numbers
from dgdeform.cli import run
from dgdeform.dgla import mc_lift, obstructed_dgla, tensor_with_ideal
from dgdeform.models import builtin_elliptic_model
from dgdeform.period import period_tangent


@pytest.fixture
def demo_file(tmp_path):
    code, text = run(["demo", "workspace"])
    assert code == 0
    path = tmp_path / "ws.json"
    path.write_text(text)
    return str(path)


def result(argv):
    code, text = run(argv)
    return code, json.loads(text)


def test_demo_elliptic():
    code, rep = result(["demo", "elliptic"])
    assert code == 0 and rep["ok"]
    assert rep["results"]["period_tangent"]["summary"] == "isomorphism, rank 1"
    assert rep["results"]["flag"]["equal"]


def test_output_is_deterministic(demo_file):
    for argv in (["demo", "elliptic"], ["check", demo_file], ["dk", "--roundtrip", "--random", "3", "--seed", "7"],
                 ["period", "--tangent", "--square"]):
        assert run(argv) == run(argv)


def test_check_workspace(demo_file):
    code, rep = result(["check", demo_file])
    assert code == 0 and rep["results"]["summary"] == "8 objects"
    assert all(c["ok"] for c in rep["results"]["checks"].values())


def test_period_tangent_agrees_with_library():
    code, rep = result(["period", "--tangent"])
    pt = period_tangent(builtin_elliptic_model())
    assert code == 0
    assert rep["results"]["tangent"]["rank"] == pt.rank
    assert rep["results"]["tangent"]["matrix"] == [[int(x) for x in r] for r in pt.matrix.rows]


def test_period_of_xi():
    code, rep = result(["period", "--xi", "[0, 1]"])
    assert code == 0 and not rep["results"]["period"]["zero"]
    code, rep = result(["period", "--xi", "[0, 0]"])
    assert code == 0 and rep["results"]["period"]["zero"]
    code, rep = result(["period", "--xi", "[1, 0]"])
    assert code == 1 and rep["error"]["kind"] == "math"


def test_mc_solve_matches_library(demo_file):
    code, rep = result(["mc", "solve", demo_file, "--dgla", "obstructed", "--ring", "dual"])
    fam = mc_lift(obstructed_dgla(), dual_numbers()).families[0]
    assert code == 0 and rep["results"]["families"][0]["dim"] == fam.dim
    code, rep = result(["mc", "solve", demo_file, "--dgla", "obstructed", "--ring", "t3"])
    assert code == 1
    assert rep["results"]["obstructions"][0]["class"] == ["1/2"]


def test_mc_orbit_with_gauge(demo_file):
    T = tensor_with_ideal(obstructed_dgla(), dual_numbers())
    x0 = json.dumps([0] * T.dim)
    code, rep = result(["mc", "orbit", demo_file, "--dgla", "obstructed", "--x0", x0, "--gauge", x0])
    assert code == 0 and rep["results"]["equivalent"]


def test_tangent_grass_flag(demo_file):
    code, rep = result(["tangent", demo_file, "--dgla", "obstructed"])
    assert code == 0 and all(v["agree"] for v in rep["results"].values())
    code, rep = result(["grass", "--model", "weight-two", "--random", "5", "--seed", "3"])
    assert code == 0 and rep["results"]["random"]["equal"] == 5
    code, rep = result(["flag", "--model", "elliptic"])
    assert code == 0 and rep["results"]["elliptic"]["equal"]


def test_dk_commands():
    code, rep = result(["dk", "--roundtrip", "--dims", "1,2,1"])
    assert code == 0 and rep["results"]["results"]["dims"]["roundtrip"]
    code, rep = result(["dk", "--ez-aw", "--dims", "1,1,1", "--pq", "2,1"])
    assert code == 0 and rep["results"]["ez_aw"]["aw_ez"]["matrix"] == [[1]]


def test_math_failure_has_witness(tmp_path):
    doc = {"kind": "dgla", "name": "bad", "degrees": [0, 0, 0], "complete": True,
           "bracket": [[0, 1, {"1": 1}], [0, 2, {"2": 1}], [1, 2, {"0": 1}]]}
    path = tmp_path / "bad.json"
    path.write_text(json.dumps(doc))
    code, rep = result(["check", str(path)])
    assert code == 1
    assert rep["results"]["checks"]["bad"]["witness"] == [0, 1, 2]


def test_input_errors_exit_two(tmp_path):
    code, rep = result(["check", str(tmp_path / "missing.json")])
    assert code == 2 and rep["error"]["kind"] == "input"
    bad = tmp_path / "bad.json"
    bad.write_text('{"kind": "complex", "name": "V", "dims": [1, 1], "d": {"0": [[1, 2]]}}')
    code, rep = result(["check", str(bad)])
    assert code == 2 and rep["error"]["path"].startswith("$")


def test_pretty_output():
    code, text = run(["period", "--tangent", "--pretty"])
    assert code == 0 and "results.tangent.summary" in text and "isomorphism, rank 1" in text


def test_console_entry_point():
    proc = subprocess.run([sys.executable, "-m", "dgdeform.cli", "demo", "elliptic"],
                          capture_output=True, text=True, check=False)
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["ok"]


def test_dk_rejects_corrupted_face(tmp_path):
    from dgdeform.linalg import Matrix
    from dgdeform.serialize import encode_simplicial
    from dgdeform.simplicial import ChainComplexNN, denormalize
    doc = encode_simplicial(denormalize(ChainComplexNN([1, 1], {1: Matrix([[1]])}), 2), "K")
    doc["faces"]["1"][0] = [[5, 0]]
    path = tmp_path / "k.json"
    path.write_text(json.dumps(doc))
    code, rep = result(["dk", "--roundtrip", str(path)])
    assert code == 1
    ids = rep["results"]["results"]["K"]["simplicial_identities"]
    assert not ids["ok"] and ids["witness"]


def test_mc_abelian_family_is_cocycles(tmp_path):
    doc = {"kind": "dgla", "name": "ab", "degrees": [0, 1, 1, 2],
           "d": [[0, 0, 0, 0], [1, 0, 0, 0], [0, 0, 0, 0], [0, 0, 1, 0]]}
    path = tmp_path / "ab.json"
    path.write_text(json.dumps(doc))
    code, rep = result(["mc", "solve", str(path), "--dgla", "ab"])
    fam = rep["results"]["families"][0]
    # Z¹ = span(x1): x2 has d x2 = x3
    assert code == 0 and fam["dim"] == 1
