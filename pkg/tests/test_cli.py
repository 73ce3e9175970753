import json
import subprocess
import sys

import pytest

from affmod.cli import execute, main


def run(tmp_path, command, job, *extra, name="job.json"):
    path = tmp_path / name
    path.write_text(json.dumps(job))
    out = tmp_path / (name + ".report")
    code = main([command, "--job", str(path), "--out", str(out), *extra])
    return code, json.loads(out.read_text()), out.read_bytes()


def test_gallery_russell(tmp_path):
    code, rep, _ = run(tmp_path, "gallery", {"name": "russell"})
    assert code == 0 and rep["status"] == "ok"
    out = rep["outputs"]
    assert out["golden"] == ["x^2*y + t^3 + z^2 + x"]
    assert out["matches"] is True and out["unit"] == "-1"


def test_gallery_unknown(tmp_path):
    code, rep, _ = run(tmp_path, "gallery", {"name": "nope"})
    assert code == 2 and rep["error"]["type"] == "JobError"


def test_transitivity_single_point(tmp_path):
    job = {"p": "x", "k": 2, "sources": [[0, 0, 0, 1]], "targets": [[1, 1, 1, 1]]}
    code, rep, _ = run(tmp_path, "transitivity", job)
    assert code == 0 and rep["outputs"]["verified"] is True
    word = rep["outputs"]["plan"]["word"]

    vjob = {"kind": "transitivity", "p": "x", "k": 2, "sources": [[0, 0, 0, 1]], "targets": [[1, 1, 1, 1]],
            "word_file": "plan.txt"}
    (tmp_path / "plan.txt").write_text(word)
    code, rep, _ = run(tmp_path, "verify", vjob, name="verify.json")
    assert code == 0 and rep["outputs"]["verified"] is True

    vjob["targets"] = [[2, 0, 1, 2]]
    code, rep, _ = run(tmp_path, "verify", vjob, name="tampered.json")
    assert code == 1 and rep["status"] == "verify-failed"

    vjob["word_file"] = "missing.txt"
    code, rep, _ = run(tmp_path, "verify", vjob, name="missing.json")
    assert code == 2 and rep["status"] == "input-error"


def test_tampered_word_text(tmp_path):
    job = {"p": "x + x^2*y", "k": 2, "sources": [[1, 1, 2, 1]], "targets": [[2, 0, 1, 2]]}
    code, rep, _ = run(tmp_path, "transitivity", job)
    assert code == 0
    lines = rep["outputs"]["plan"]["word"].splitlines()
    tampered = "\n".join(lines[:1] + lines[2:]) + "\n"
    vjob = dict(job, kind="transitivity", word=tampered)
    code, _, _ = run(tmp_path, "verify", vjob, name="v.json")
    assert code == 1


def test_point_off_surface(tmp_path):
    job = {"p": "x", "k": 2, "sources": [[1, 0, 0, 0]], "targets": [[1, 1, 1, 1]]}
    code, rep, _ = run(tmp_path, "transitivity", job)
    assert code == 2


def test_malformed_polynomial_position(tmp_path):
    code, rep, _ = run(tmp_path, "count", {"q": 3, "vars": ["x"], "eqs": ["x+"]})
    assert code == 2
    assert rep["error"]["type"] == "PolySyntaxError" and rep["error"]["position"] == 2


def test_reports_are_byte_identical(tmp_path):
    job = {"p": "x*y + x^3", "k": 2, "sources": [[1, 1, 2, 1], [0, 0, 0, 3]], "targets": [[1, 0, 1, 1], [0, 5, 0, 0]]}
    a = run(tmp_path, "transitivity", job, "--seed", "4", name="a.json")[2]
    b = run(tmp_path, "transitivity", job, "--seed", "4", name="a.json")[2]
    assert a == b


def test_timing_flag(tmp_path):
    _, rep, _ = run(tmp_path, "gallery", {"name": "russell"}, "--timing")
    assert rep["seconds"] >= 0
    _, rep, _ = run(tmp_path, "gallery", {"name": "russell"})
    assert "seconds" not in rep


def test_modify(tmp_path):
    job = {"vars": ["x", "y"], "f": "x", "center": ["y"]}
    code, rep, _ = run(tmp_path, "modify", job)
    assert code == 0
    pres = rep["outputs"]["presentation"]
    assert pres["certificate"] == "coprime" and pres["equations"] == ["x*z - y"]


def test_modify_uncertified(tmp_path):
    job = {"vars": ["x", "y"], "f": "x", "center": ["x", "y"]}
    code, rep, _ = run(tmp_path, "modify", job)
    assert code == 2 and rep["error"]["type"] == "CertificationError"


def test_modify_invalid_triple(tmp_path):
    code, _, _ = run(tmp_path, "modify", {"vars": ["x", "y"], "f": "0", "center": ["y"]})
    assert code == 2


def test_strict_transform(tmp_path):
    job = {"vars": ["x", "y"], "chart_vars": ["x", "z"], "blowdown": {"y": "x*z"}, "exceptional_var": "x",
           "g": "y^2 - x^3"}
    code, rep, _ = run(tmp_path, "strict-transform", job)
    assert code == 0
    assert rep["outputs"] == {"multiplicity": 2, "strict_transform": "z^2 - x"}


def test_lift(tmp_path):
    job = {"vars": ["x", "y"], "f": "x", "center": ["x", "y"], "derivation": {"y": "x"}}
    code, rep, _ = run(tmp_path, "lift", job)
    assert code == 0 and rep["outputs"]["intertwines"] is True


def test_flow(tmp_path):
    code, rep, _ = run(tmp_path, "flow", {"vars": ["x", "y"], "derivation": {"y": "x"}, "t": "s"})
    assert code == 0
    assert rep["outputs"]["flow"]["x"] == "x"
    assert rep["outputs"]["flow"]["y"] == "x*s + y"
    assert rep["outputs"]["nilpotency_orders"] == {"x": 1, "y": 2}


def test_flow_not_nilpotent(tmp_path):
    code, rep, _ = run(tmp_path, "flow", {"vars": ["x"], "derivation": {"x": "x"}, "max_iter": 5})
    assert code == 3 and rep["status"] == "incomplete"


def test_rectify_modes(tmp_path):
    code, rep, _ = run(tmp_path, "rectify", {"p": "x^2 - x", "g": "y - x"})
    assert code == 0 and rep["outputs"]["verified"] is True
    word = rep["outputs"]["word"]
    code, rep, _ = run(tmp_path, "verify", {"kind": "rectify", "p": "x^2 - x", "g": "y - x", "word": word}, name="v.json")
    assert code == 0
    code, rep, _ = run(tmp_path, "verify", {"kind": "rectify", "p": "x^2 - x", "g": "y - 2*x", "word": word}, name="w.json")
    assert code == 1

    code, rep, _ = run(tmp_path, "rectify", {"mode": "smoothness", "f": "x^2", "g": "y^2"}, name="s.json")
    assert code == 0 and rep["outputs"]["result"] == "singular"

    code, rep, _ = run(tmp_path, "rectify", {"mode": "pair", "f": "(x + y^2)^3", "g": "y"}, name="p.json")
    assert code == 0 and rep["outputs"]["p"] == "t^3"

    code, rep, _ = run(tmp_path, "rectify", {"p": "x^2", "g": "x + y^2"}, name="n.json")
    assert code == 2 and rep["error"]["type"] == "TransversalityViolated"

    code, rep, _ = run(tmp_path, "rectify", {"p": "x^2 + 1", "g": "y"}, name="r.json")
    assert code == 3


def test_count(tmp_path, monkeypatch):
    code, rep, _ = run(tmp_path, "count", {"q": 5, "vars": ["x", "y"], "eqs": ["x^2 + y^2 - 1"]})
    assert code == 0 and rep["outputs"]["count"] == 4
    code, rep, _ = run(tmp_path, "count", {"q": 3, "mode": "uv", "p": "x^2", "k": 1}, name="uv.json")
    assert rep["outputs"]["report"] == {"q": 3, "k": 1, "N_X": 9, "N_0": 1, "predicted": 9, "match": True}
    monkeypatch.setenv("AFFMOD_MAX_CELLS", "10")
    code, rep, _ = run(tmp_path, "count", {"q": 5, "vars": ["x", "y"], "eqs": ["x"]}, name="b.json")
    assert code == 3 and rep["error"]["type"] == "BudgetExceeded"


def test_affine_word_verify(tmp_path):
    word = "VARS x y\nSHEAR d=y h=x^2 t=1\n"
    job = {"kind": "affine-word", "word": word, "sources": [[2, 0]], "targets": [[2, 4]]}
    assert run(tmp_path, "verify", job)[0] == 0
    job["targets"] = [[2, 5]]
    assert run(tmp_path, "verify", job, name="bad.json")[0] == 1


@pytest.mark.parametrize(
    "content",
    ["not json", "[1, 2]", json.dumps({"command": "count", "q": 3, "vars": ["x"], "eqs": ["x"]})],
)
def test_bad_job_files(tmp_path, content):
    path = tmp_path / "job.json"
    path.write_text(content)
    code, rep = execute("gallery", str(path))
    assert code == 2 and rep["status"] == "input-error"


def test_missing_job_file(tmp_path):
    code, rep = execute("gallery", str(tmp_path / "nope.json"))
    assert code == 2


def test_console_script_entry(tmp_path):
    path = tmp_path / "job.json"
    path.write_text(json.dumps({"name": "russell"}))
    proc = subprocess.run([sys.executable, "-m", "affmod.cli", "gallery", "--job", str(path)],
                          capture_output=True, text=True)
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["outputs"]["matches"] is True
