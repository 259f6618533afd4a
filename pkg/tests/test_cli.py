import json
import subprocess
import sys
from pathlib import Path

import pytest

from cotrans.cli import COMMANDS, EXIT_FAIL, EXIT_OK, EXIT_SCHEMA, gallery_spec, main, run
from cotrans.gallery import NAMES

SPECS = Path(__file__).parent / "specs"


def invoke(tmp_path, command, spec, *extra):
    out = tmp_path / f"{command}.json"
    code = main([command, "--spec", str(spec), "--out", str(out), *extra])
    return code, json.loads(out.read_text()) if out.exists() else None


def write_spec(tmp_path, data, name="spec.json"):
    p = tmp_path / name
    p.write_text(json.dumps(data))
    return p


def test_gallery_then_verify(tmp_path, capsys):
    assert main(["gallery", "c3_affine", "--out", str(tmp_path / "c3.json")]) == EXIT_OK
    code, payload = invoke(tmp_path, "verify-cotranslation", tmp_path / "c3.json")
    assert code == EXIT_OK and payload["passed"]
    assert "cocycle" in capsys.readouterr().out


def test_gallery_listing(capsys):
    assert main(["gallery"]) == EXIT_OK
    assert json.loads(capsys.readouterr().out)["examples"] == list(NAMES)
    assert main(["gallery", "nope"]) == EXIT_SCHEMA


@pytest.mark.parametrize("name", NAMES)
def test_every_gallery_spec_verifies(name):
    radius = 2 if name in ("f2_binary_tree", "fn_tree") else 3
    code, payload = run("check-relations", {**gallery_spec(name), "radius": radius})
    assert code == EXIT_OK, payload


def test_check_relations_failure_witness(tmp_path):
    code, payload = invoke(tmp_path, "check-relations", SPECS / "c3_check_relations_fail.json")
    assert code == EXIT_FAIL
    w = payload["report"]["checks"][0]["witness"]
    assert w["relator"] == "a^3" and w["base"] == "e" and w["residual"] > 0


def test_evaluate_coefficients(tmp_path, capsys):
    code, payload = invoke(tmp_path, "evaluate", SPECS / "c3_evaluate.json")
    assert code == EXIT_OK
    assert payload["coefficients"] == ["2", "2"]
    main(["evaluate", "--spec", str(SPECS / "c3_evaluate.json")])
    assert "('2', '2')" in capsys.readouterr().err


def test_missing_seed_is_schema_error(tmp_path, capsys):
    assert main(["verify-cotranslation", "--spec", str(SPECS / "c3_no_seed.json")]) == EXIT_SCHEMA
    assert "seed" in capsys.readouterr().err


def test_malformed_specs(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert main(["verify-cotranslation", "--spec", str(bad)]) == EXIT_SCHEMA
    assert main(["verify-cotranslation"]) == EXIT_SCHEMA
    p = write_spec(tmp_path, {"example": "no_such_example", "seed": 0})
    assert main(["verify-cotranslation", "--spec", str(p)]) == EXIT_SCHEMA
    p = write_spec(tmp_path, {"sequence": {"bogus": 1}, "seed": 0})
    assert main(["difference", "--spec", str(p)]) == EXIT_SCHEMA


@pytest.mark.parametrize(
    "command,spec",
    [
        ("difference", "difference_random.json"),
        ("evolve", "evolve_rotation.json"),
        ("derivative-identities", "identities_sin_cos.json"),
        ("partial-verify", "partial_c6.json"),
        ("complete", "partial_c6.json"),
        ("factorize", "partial_c6.json"),
        ("skew-verify", "c3_evaluate.json"),
        ("verify-groupoid", "c3_evaluate.json"),
    ],
)
def test_passing_golden_specs(tmp_path, command, spec):
    code, payload = invoke(tmp_path, command, SPECS / spec)
    assert code == EXIT_OK, payload
    assert payload["command"] == command and payload["passed"]


def test_non_orthogonal_partial_fails(tmp_path):
    code, payload = invoke(tmp_path, "partial-verify", SPECS / "partial_not_orthogonal.json")
    assert code == EXIT_FAIL
    assert payload["report"]["checks"][0]["witness"] is not None


def test_rejected_construction_reports_witness(tmp_path):
    spec = {"example": "cyclic_multirotational", "params": {"planes": [[0, 1], [1, 2]]}, "seed": 0}
    code, payload = run("verify-cotranslation", spec)
    assert code == EXIT_FAIL and payload["witness"] is not None


def test_deterministic_output(tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    for out in (a, b):
        main(["complete", "--spec", str(SPECS / "partial_c6.json"), "--out", str(out)])
    assert a.read_bytes() == b.read_bytes()


def test_overrides(tmp_path):
    _, p1 = invoke(tmp_path, "difference", SPECS / "difference_random.json", "--seed", "5")
    assert p1["seed"] == 5
    code, _ = invoke(tmp_path, "difference", SPECS / "difference_random.json", "--tol", "1e-30")
    assert code == EXIT_FAIL
    # finite groups are sampled exhaustively, so the radius is exercised on the integers
    _, p2 = invoke(tmp_path, "partial-verify", SPECS / "partial_not_orthogonal.json", "--radius", "1")
    assert p2["report"]["checks"][0]["samples"] == 3**3


def test_commands_cover_interface():
    assert set(COMMANDS) == {
        "verify-groupoid", "verify-cotranslation", "check-relations", "skew-verify", "evaluate",
        "difference", "evolve", "derivative-identities", "partial-verify", "complete", "factorize", "gallery",
    }


def test_module_entry_point():
    proc = subprocess.run(
        [sys.executable, "-m", "cotrans", "evaluate", "--spec", str(SPECS / "c3_evaluate.json")],
        capture_output=True, text=True, check=False,
    )
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["coefficients"] == ["2", "2"]
