import json
import subprocess
import sys

import pytest

from varigap.cli import main
from varigap.trajectory import AnalyticTrajectory, discretize


@pytest.fixture
def inputs(tmp_path):
    paths = {}
    paths["rho1"] = tmp_path / "rho1.json"
    paths["rho1"].write_text(json.dumps({"minus": "-1", "plus": "1"}))
    paths["rho8"] = tmp_path / "rho8.json"
    paths["rho8"].write_text(json.dumps({"minus": "-8", "plus": "8"}))
    paths["rho_bad"] = tmp_path / "rho_bad.json"
    paths["rho_bad"].write_text(json.dumps({"minus": "-1", "plus": "1 + * 2"}))
    y23 = discretize(AnalyticTrajectory("power", (2 / 3,)), 64, 3.0)
    paths["y23"] = tmp_path / "y23.json"
    paths["y23"].write_text(json.dumps(y23.to_json()))
    lip = tmp_path / "lip.json"
    lip.write_text(json.dumps({"type": "pl", "nodes": [[0, 0], [0.5, 1], [1, 1]]}))
    paths["lip"] = lip
    paths["line"] = tmp_path / "line.json"
    paths["line"].write_text(json.dumps({"type": "pl", "nodes": [[0, 0], [1, 1]]}))
    paths["tmp"] = tmp_path
    return paths


def run_cli(capsys, argv):
    code = main([str(a) for a in argv])
    out = capsys.readouterr()
    return code, out.out, out.err


# ---------------------------------------------------------------------------
# evaluate
# ---------------------------------------------------------------------------


def test_evaluate_minimizer(capsys):
    code, out, _ = run_cli(
        capsys, ["evaluate", "--lagrangian", "builtin:gap_example", "--trajectory", "builtin:sqrt"]
    )
    assert code == 0
    doc = json.loads(out)
    assert doc["status"] == "converged"
    assert abs(doc["value"]) <= 1e-10


def test_evaluate_zero_trajectory(capsys):
    code, out, _ = run_cli(
        capsys, ["evaluate", "--lagrangian", "builtin:gap_example", "--trajectory", "builtin:zero"]
    )
    assert code == 0
    assert json.loads(out)["value"] == 1.0


def test_evaluate_divergent_interpolant(capsys, inputs):
    code, out, _ = run_cli(
        capsys,
        [
            "evaluate",
            "--lagrangian",
            "builtin:gap_example",
            "--trajectory",
            "builtin:sqrt",
            "--discretize",
            "16",
        ],
    )
    assert code == 4
    assert json.loads(out)["value"] == "inf"


def test_evaluate_parse_error_exit_2(capsys, inputs):
    bad = inputs["tmp"] / "badL.json"
    bad.write_text(json.dumps({"expr": "1 + * 2"}))
    code, out, err = run_cli(
        capsys, ["evaluate", "--lagrangian", bad, "--trajectory", "builtin:zero"]
    )
    assert code == 2
    assert "position 5" in err


# ---------------------------------------------------------------------------
# repair
# ---------------------------------------------------------------------------


def test_repair_sweep_csv(capsys, inputs):
    code, out, _ = run_cli(
        capsys,
        [
            "repair",
            "--lagrangian",
            "builtin:quadratic",
            "--trajectory",
            inputs["y23"],
            "--rho",
            inputs["rho1"],
            "--sweep",
            "2,4,8",
            "--out",
            "csv",
        ],
    )
    assert code == 0
    lines = out.strip().split("\n")
    assert lines[0] == "M,bad_measure,T,m,dist_W1p,F_y,F_w,Q2,Q3"
    assert len(lines) == 4
    dists = [float(line.split(",")[4]) for line in lines[1:]]
    assert dists[2] < dists[1] < dists[0]


def test_repair_already_lipschitz_single_row(capsys, inputs):
    code, out, _ = run_cli(
        capsys,
        [
            "repair",
            "--lagrangian",
            "builtin:quadratic",
            "--trajectory",
            inputs["lip"],
            "--rho",
            inputs["rho8"],
            "--threshold",
            "3",
        ],
    )
    assert code == 0
    doc = json.loads(out)
    assert doc["dist_W1p"] == 0.0
    assert doc["bad_measure"] == 0.0


def test_repair_rho_rejected_exit_3(capsys, inputs):
    code, out, _ = run_cli(
        capsys,
        [
            "repair",
            "--lagrangian",
            "builtin:gap_example",
            "--trajectory",
            "builtin:sqrt",
            "--discretize",
            "16",
            "--rho",
            inputs["rho1"],
            "--threshold",
            "4",
        ],
    )
    assert code == 3
    doc = json.loads(out)
    assert doc["status"] == "violation"
    assert abs(doc["witness"]["point"][0]) < 0.01


def test_repair_bad_sweep_rejected(capsys, inputs):
    code, _, err = run_cli(
        capsys,
        [
            "repair",
            "--lagrangian",
            "builtin:quadratic",
            "--trajectory",
            inputs["y23"],
            "--rho",
            inputs["rho1"],
            "--sweep",
            "4,2",
        ],
    )
    assert code == 2
    assert "increasing" in err


def test_repair_figure_written(capsys, inputs):
    fig = inputs["tmp"] / "sweep.png"
    code, _, _ = run_cli(
        capsys,
        [
            "repair",
            "--lagrangian",
            "builtin:quadratic",
            "--trajectory",
            inputs["y23"],
            "--rho",
            inputs["rho1"],
            "--sweep",
            "2,4",
            "--figure",
            fig,
        ],
    )
    assert code == 0
    assert fig.exists() and fig.stat().st_size > 1000


# ---------------------------------------------------------------------------
# gap-demo
# ---------------------------------------------------------------------------


def test_gap_demo_sqrt_interpolant(capsys):
    code, out, _ = run_cli(
        capsys, ["gap-demo", "--trajectory", "builtin:sqrt", "--discretize", "16"]
    )
    assert code == 0
    doc = json.loads(out)
    assert doc["verdict"] == "divergent"
    assert len(doc["bounds"]) == 30


def test_gap_demo_identity_line(capsys, inputs):
    code, out, _ = run_cli(capsys, ["gap-demo", "--trajectory", inputs["line"]])
    assert code == 0
    assert json.loads(out)["verdict"] == "divergent"


def test_gap_demo_zero_rejected(capsys):
    code, _, err = run_cli(
        capsys, ["gap-demo", "--trajectory", "builtin:zero", "--discretize", "4"]
    )
    assert code == 2
    assert "zero" in err


def test_gap_demo_svg_and_figure(capsys, inputs):
    fig = inputs["tmp"] / "bounds.png"
    code, out, _ = run_cli(
        capsys,
        [
            "gap-demo",
            "--trajectory",
            "builtin:sqrt",
            "--discretize",
            "16",
            "--out",
            "svg",
            "--figure",
            fig,
        ],
    )
    assert code == 0
    assert out.startswith("<svg ") and out.rstrip().endswith("</svg>")
    assert "polyline" in out
    assert fig.exists() and fig.stat().st_size > 1000


# ---------------------------------------------------------------------------
# check
# ---------------------------------------------------------------------------


def test_check_R_pass(capsys, inputs):
    code, out, _ = run_cli(
        capsys,
        [
            "check",
            "--lagrangian",
            "builtin:quadratic",
            "--condition",
            "R",
            "--rho",
            inputs["rho1"],
            "--interval=-10,10",
            "--samples",
            "512",
        ],
    )
    assert code == 0
    assert json.loads(out)["sup_estimate"] == 1.0


def test_check_R_violation(capsys, inputs):
    code, out, _ = run_cli(
        capsys,
        [
            "check",
            "--lagrangian",
            "builtin:gap_example",
            "--condition",
            "R",
            "--rho",
            inputs["rho1"],
            "--interval=-1,1",
        ],
    )
    assert code == 3
    assert json.loads(out)["status"] == "violation"


def test_check_malformed_rho_exit_2(capsys, inputs):
    code, _, err = run_cli(
        capsys,
        [
            "check",
            "--lagrangian",
            "builtin:quadratic",
            "--condition",
            "R",
            "--rho",
            inputs["rho_bad"],
            "--interval=-1,1",
        ],
    )
    assert code == 2
    assert "position" in err


def test_check_B_and_zero_speed(capsys, inputs):
    code, out, _ = run_cli(
        capsys,
        ["check", "--lagrangian", "builtin:gap_example", "--condition", "B", "--box", "1,1"],
    )
    assert code == 3
    code, out, _ = run_cli(
        capsys,
        [
            "check",
            "--lagrangian",
            "builtin:gap_example",
            "--condition",
            "zero-speed",
            "--interval",
            "0,1",
        ],
    )
    assert code == 0
    assert json.loads(out)["sup_estimate"] == 1.0


def test_check_Ry_via_cli(capsys, inputs):
    code, out, _ = run_cli(
        capsys,
        [
            "check",
            "--lagrangian",
            "builtin:quadratic",
            "--condition",
            "Ry",
            "--rho",
            inputs["rho1"],
            "--trajectory",
            inputs["y23"],
            "--samples",
            "256",
        ],
    )
    assert code == 0


# ---------------------------------------------------------------------------
# cap override
# ---------------------------------------------------------------------------


def test_env_cap_override(capsys, inputs, monkeypatch):
    # an absurdly low cap makes even the smooth quadratic energy "capped"
    monkeypatch.setenv("VARIGAP_CAP", "1.0000001")
    code, out, _ = run_cli(
        capsys,
        ["evaluate", "--lagrangian", "builtin:quadratic", "--trajectory", inputs["y23"]],
    )
    assert code == 4
    assert json.loads(out)["status"] == "capped"
    monkeypatch.setenv("VARIGAP_CAP", "not-a-number")
    code, _, err = run_cli(
        capsys,
        ["evaluate", "--lagrangian", "builtin:quadratic", "--trajectory", inputs["y23"]],
    )
    assert code == 2


def test_output_file_matches_stdout(capsys, inputs):
    target = inputs["tmp"] / "energy.json"
    code, out, _ = run_cli(
        capsys,
        [
            "evaluate",
            "--lagrangian",
            "builtin:quadratic",
            "--trajectory",
            inputs["lip"],
            "--output",
            target,
        ],
    )
    assert code == 0
    assert target.read_text() == out


# ---------------------------------------------------------------------------
# determinism (subprocess level, byte-for-byte)
# ---------------------------------------------------------------------------


def _run_subprocess(argv):
    return subprocess.run(
        [sys.executable, "-m", "varigap.cli", *argv],
        capture_output=True,
        check=False,
    )


def test_subprocess_outputs_are_byte_identical(inputs):
    commands = [
        ["evaluate", "--lagrangian", "builtin:gap_example", "--trajectory", "builtin:sqrt", "--seed", "7"],
        [
            "repair",
            "--lagrangian",
            "builtin:quadratic",
            "--trajectory",
            str(inputs["y23"]),
            "--rho",
            str(inputs["rho1"]),
            "--sweep",
            "2,4",
            "--out",
            "csv",
            "--seed",
            "7",
        ],
        ["gap-demo", "--trajectory", str(inputs["line"]), "--out", "svg", "--seed", "7"],
        [
            "check",
            "--lagrangian",
            "builtin:quadratic",
            "--condition",
            "R",
            "--rho",
            str(inputs["rho1"]),
            "--interval=-2,2",
            "--samples",
            "128",
            "--seed",
            "7",
        ],
    ]
    for argv in commands:
        first = _run_subprocess(argv)
        second = _run_subprocess(argv)
        assert first.stdout == second.stdout, argv
        assert first.returncode == second.returncode, argv
