"""Tests for the batch command-line frontend.

Every operation prints one canonical-JSON report to stdout and a
one-line summary to stderr.  Exit codes: 0 success, 2 validation or
parse error, 3 a chain failed to stabilize within the cap, 4 internal
invariant violation (with a reproduction bundle written to the working
directory)."""

import glob
import json
import shutil
import subprocess
import sys
from pathlib import Path

import pytest

from cartier_lab import cli
from cartier_lab.cli import main
from cartier_lab.errors import InvariantViolation

EXAMPLES = Path(__file__).resolve().parents[1] / "docs" / "examples"
JORDAN2 = str(EXAMPLES / "jordan2.json")
OMEGA_LINE = str(EXAMPLES / "omega_line.json")
OMEGA_TWIST = str(EXAMPLES / "omega_twist_x.json")
POINT_OMEGA = str(EXAMPLES / "point_omega.json")


def run_cli(capsys, argv):
    code = main(argv)
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def report(capsys, argv):
    code, out, err = run_cli(capsys, argv)
    return code, json.loads(out), err


def test_validate_module_report(capsys):
    code, rep, err = report(capsys, ["validate", OMEGA_LINE, "--no-timings"])
    assert code == 0
    assert rep["operation"] == "validate"
    assert rep["result"] == {
        "valid": True,
        "kind": "module",
        "rank": 1,
        "ring": {"p": 2, "e": 1, "vars": ["x"]},
    }
    assert "valid module of rank 1" in err


def test_report_records_input_digest(capsys):
    code, rep, _ = report(capsys, ["validate", OMEGA_LINE, "--no-timings"])
    assert code == 0
    digest = rep["inputs_digest"]
    assert len(digest) == 64 and int(digest, 16) >= 0


def test_kappa_apply_top_form(capsys):
    code, rep, err = report(
        capsys,
        ["kappa-apply", OMEGA_LINE, "--elem", "x^3*dx", "--no-timings"],
    )
    assert code == 0
    assert rep["result"] == {"input": "x^3*dx", "output": "x*dx"}
    assert "x*dx" in err


def test_nilpotency_jordan_block(capsys):
    code, rep, err = report(capsys, ["nilpotency", JORDAN2, "--no-timings"])
    assert code == 0
    assert rep["result"] == {"nilpotent": True, "order": 2}
    assert "nilpotent=True order=2" in err


def test_nilpotency_point_not_nilpotent(capsys):
    code, rep, _ = report(capsys, ["nilpotency", POINT_OMEGA, "--no-timings"])
    assert code == 0
    assert rep["result"] == {"nilpotent": False, "order": None}


def test_stable_image_chain_shrinks_to_zero(capsys):
    code, rep, _ = report(capsys, ["stable-image", JORDAN2, "--no-timings"])
    assert code == 0
    assert rep["result"]["chain_lengths"] == [2, 1, 0]
    assert rep["result"]["generators"] == []
    assert rep["result"]["rank"] == 0


def test_hom_jordan_block_to_itself(capsys):
    code, rep, _ = report(capsys, ["hom", JORDAN2, JORDAN2, "--no-timings"])
    assert code == 0
    assert rep["result"]["dimension_fp"] == 2
    assert rep["result"]["partial"] is False
    assert len(rep["result"]["basis"]) == 2


def test_to_gamma_then_from_gamma_roundtrip(capsys, tmp_path):
    code, rep, _ = report(capsys, ["to-gamma", JORDAN2, "--no-timings"])
    assert code == 0
    sheaf_doc = rep["result"]
    assert sheaf_doc["gamma"] == [["0", "1"], ["0", "0"]]
    path = tmp_path / "sheaf.json"
    path.write_text(json.dumps(sheaf_doc), encoding="utf-8")

    code, rep, _ = report(capsys, ["from-gamma", str(path), "--no-timings"])
    assert code == 0
    recovered = rep["result"]
    original = json.loads(Path(JORDAN2).read_text(encoding="utf-8"))
    for key in ("generators", "relations", "ring", "kappa"):
        assert recovered[key] == original[key]


def test_unit_root_of_point_form(capsys):
    code, rep, _ = report(capsys, ["unit-root", POINT_OMEGA, "--no-timings"])
    assert code == 0
    assert rep["result"]["e_star"] == 0
    assert rep["result"]["root"]["gamma"] == [["1"]]
    assert rep["result"]["injective_verified"] is True
    assert rep["certificates"]["stabilized_at"] == 0


def test_koszul_pullback_cuts_out_origin(capsys):
    code, rep, _ = report(
        capsys,
        ["koszul-pullback", OMEGA_LINE, "--seq", "x", "--no-timings"],
    )
    assert code == 0
    assert rep["result"]["ideal"] == ["x"]
    assert rep["result"]["kappa"] == {"0,0": ["1"], "1,0": ["0"]}


def test_seq_change_identity_sequence(capsys):
    code, rep, _ = report(
        capsys,
        ["seq-change", OMEGA_LINE, "--seq", "x", "--seq2", "x", "--no-timings"],
    )
    assert code == 0
    assert rep["result"] == {
        "matrix": [["1"]],
        "determinant": "1",
        "relation_verified": True,
    }


def test_localize_torsion_free_module(capsys):
    code, rep, _ = report(
        capsys,
        ["localize", OMEGA_TWIST, "--g", "x", "--no-timings"],
    )
    assert code == 0
    assert rep["result"]["torsion_generators"] == []
    assert rep["result"]["quotient"]["generators"] == 1


def test_gamma_z_of_torsion_free_module_is_zero(capsys):
    code, rep, _ = report(
        capsys,
        ["gamma-z", OMEGA_LINE, "--g", "x", "--no-timings"],
    )
    assert code == 0
    assert rep["result"]["generators"] == []
    assert rep["result"]["module"]["generators"] == 0


def test_sol_dimensions_of_point_form(capsys):
    code, rep, _ = report(capsys, ["sol", POINT_OMEGA, "--no-timings"])
    assert code == 0
    assert rep["result"] == {"dims": [1, 1, 1, 1]}


def test_sol_respects_max_m(capsys):
    code, rep, _ = report(
        capsys, ["sol", POINT_OMEGA, "--max-m", "2", "--no-timings"]
    )
    assert code == 0
    assert rep["result"] == {"dims": [1, 1]}


def test_ie_twisted_form_lattice_display(capsys):
    code, rep, err = report(
        capsys, ["ie", OMEGA_TWIST, "--g", "x", "--no-timings"]
    )
    assert code == 0
    cert = rep["result"]
    assert cert["lattice"]["generator_display"] == ["x*dx"]
    assert cert["indices"] == {"e_star": 1, "k_star": 1}
    assert all(cert["checks"].values())
    assert "x*dx" in err


def test_oracle_confirms_minimality(capsys):
    code, rep, _ = report(
        capsys, ["oracle", OMEGA_TWIST, "--g", "x", "--no-timings"]
    )
    assert code == 0
    assert rep["result"] == {"skipped": False, "minimal": True}
    assert rep["certificates"]["indices"] == {"e_star": 1, "k_star": 1}


@pytest.mark.parametrize(
    "argv_tail",
    [
        ["--g", "x -"],
        ["--g", "x + ?"],
    ],
)
def test_bad_polynomial_is_validation_error(capsys, argv_tail):
    code, rep, _ = report(
        capsys, ["gamma-z", OMEGA_LINE, "--no-timings"] + argv_tail
    )
    assert code == 2
    assert rep["error"]["type"] == "validation"
    assert "--g" in rep["error"]["message"]


def test_malformed_json_is_validation_error(capsys, tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json", encoding="utf-8")
    code, rep, _ = report(capsys, ["validate", str(bad), "--no-timings"])
    assert code == 2
    assert rep["error"]["type"] == "validation"


def test_missing_file_is_validation_error(capsys, tmp_path):
    code, rep, _ = report(
        capsys, ["validate", str(tmp_path / "absent.json"), "--no-timings"]
    )
    assert code == 2
    assert rep["error"]["type"] == "validation"


def test_missing_required_flag_is_validation_error(capsys):
    code, rep, _ = report(capsys, ["gamma-z", OMEGA_LINE, "--no-timings"])
    assert code == 2
    assert rep["error"]["type"] == "validation"
    assert "--g" in rep["error"]["message"]


def test_unknown_operation_is_validation_error(capsys):
    code = main(["frobnicate", OMEGA_LINE])
    capsys.readouterr()
    assert code == 2


def test_tiny_iteration_cap_reports_non_stabilized(capsys):
    code, rep, _ = report(
        capsys,
        ["ie", OMEGA_TWIST, "--g", "x", "--max-iter", "1", "--no-timings"],
    )
    assert code == 3
    assert rep["error"]["type"] == "non_stabilized"
    assert rep["error"]["cap"] == 1


def test_invariant_violation_writes_reproduction_bundle(
    capsys, tmp_path, monkeypatch
):
    def boom(args):
        raise InvariantViolation("synthetic failure for bundle test")

    monkeypatch.setitem(cli.OPERATIONS, "nilpotency", (boom, 1))
    monkeypatch.chdir(tmp_path)
    code, rep, err = report(capsys, ["nilpotency", JORDAN2, "--no-timings"])
    assert code == 4
    assert rep["error"]["type"] == "invariant_violation"
    assert "invariant violation" in err

    bundles = glob.glob(str(tmp_path / "cartier-lab-repro-*.json"))
    assert len(bundles) == 1
    assert rep["error"]["reproduction_bundle"] == Path(bundles[0]).name
    bundle = json.loads(Path(bundles[0]).read_text(encoding="utf-8"))
    assert bundle["argv"] == ["nilpotency", JORDAN2, "--no-timings"]
    assert bundle["error"]["type"] == "InvariantViolation"
    assert JORDAN2 in bundle["inputs"]


@pytest.mark.parametrize(
    "argv",
    [
        ["nilpotency", JORDAN2],
        ["ie", OMEGA_TWIST, "--g", "x"],
        ["sol", POINT_OMEGA],
        ["hom", JORDAN2, JORDAN2],
    ],
)
def test_reports_byte_identical_across_runs(capsys, argv):
    full = argv + ["--seed", "7", "--no-timings"]
    code_a, out_a, _ = run_cli(capsys, full)
    code_b, out_b, _ = run_cli(capsys, full)
    assert code_a == code_b == 0
    assert out_a == out_b
    assert out_a.endswith("\n")


def test_timings_present_unless_suppressed(capsys):
    _, rep_with, _ = report(capsys, ["validate", OMEGA_LINE])
    _, rep_without, _ = report(capsys, ["validate", OMEGA_LINE, "--no-timings"])
    assert rep_with["timings"]["total_s"] >= 0
    assert "timings" not in rep_without


def test_module_invocation_in_subprocess():
    proc = subprocess.run(
        [sys.executable, "-m", "cartier_lab.cli", "nilpotency", JORDAN2,
         "--no-timings"],
        capture_output=True,
        text=True,
    )
    assert proc.returncode == 0
    rep = json.loads(proc.stdout)
    assert rep["result"] == {"nilpotent": True, "order": 2}
    assert "nilpotent=True" in proc.stderr


@pytest.mark.skipif(
    shutil.which("cartier-lab") is None,
    reason="console script not on PATH",
)
def test_console_script_entry_point():
    proc = subprocess.run(
        ["cartier-lab", "sol", POINT_OMEGA, "--no-timings"],
        capture_output=True,
        text=True,
    )
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["result"] == {"dims": [1, 1, 1, 1]}
