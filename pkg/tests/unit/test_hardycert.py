# Copyright 2026 hardy-cert contributors
# See LICENSE file for licensing details.

"""Unit tests for the `hardycert` command-line front end."""

import csv
import math

import numpy as np
import pytest

import carleman
import hardycert
import wirtinger
from config import RunConfig, parse_config
from hardycert import EXIT_CONFIG, EXIT_FAILED, EXIT_OK, main, run


def rows_with(report, item):
    return [row for row in report.rows if row["item"] == item]


def test_norm_eigen_two_terms():
    report = run(parse_config("command: norm\nmethod: eigen\nN: 2\n"))

    (row,) = report.rows
    assert row["value"] ** 2 == pytest.approx((3 + math.sqrt(5)) / 4, rel=1e-12)
    assert row["verdict"] == "converged"
    assert report.ok


def test_norm_over_a_p_grid():
    report = run(parse_config("command: norm\nweights: power:0.5\np: [1.5, 3]\nN: 50\n"))

    assert [row["p"] for row in report.rows] == [1.5, 3.0]
    assert all(1 <= row["value"] <= 3 for row in report.rows)
    assert report.ok


def test_certify_cesaro():
    assert main(["certify", "--p", "2", "--L", "1", "--N", "1000", "--method", "eigen"]) == EXIT_OK


def test_certify_rows():
    report = run(parse_config("command: certify\nL: 1\nN: 1000\nmethod: eigen\n"))

    (norm,) = rows_with(report, "norm-eigen")
    (gao,) = rows_with(report, "gao_beta")
    assert norm["value"] <= 2
    assert norm["verdict"] == "within-bound"
    assert gao["margin"] >= 0
    assert rows_with(report, "thm13")[0]["verdict"] == "holds-on-prefix"


def test_certify_derives_L_when_missing():  # noqa: N802
    report = run(parse_config("command: certify\nN: 200\nmethod: eigen\n"))

    assert report.ok
    assert any("smallest admissible L" in f for f in report.findings)
    (norm,) = rows_with(report, "norm-eigen")
    # the binding index is n = N, where L = 1 - 1/(4N) suffices
    assert 0.99 < norm["L"] < 1
    assert norm["verdict"] == "within-bound"


def test_certify_reports_infeasible_prefix():
    report = run(parse_config("command: certify\nweights: list:1,1e-15\nN: 1\nmethod: eigen\n"))

    assert not report.ok


def test_certify_eigen_needs_p_two():
    config = parse_config("command: certify\nL: 1\np: 3\nN: 10\nmethod: eigen\n")

    with pytest.raises(ValueError):
        run(config)


def test_conditions_violation_exits_one():
    assert main(["conditions", "--condition", "thm13", "--L", "0.5", "--N", "50"]) == EXIT_FAILED


def test_conditions_per_index_rows():
    report = run(parse_config("command: conditions\ncondition: cor14\nL: 1\nN: 20\n"))

    per_n = [row for row in report.rows if row["n"] is not None]
    assert len(per_n) == 20
    assert per_n[0]["margin"] == pytest.approx(0.25)
    assert report.rows[-1]["verdict"] == "holds-on-prefix"


def test_conditions_report_constant_values():
    report = run(parse_config("command: conditions\ncondition: bennett_E\nN: 10\n"))

    assert report.rows[0]["value"] == pytest.approx(2.0)
    assert report.rows[0]["margin"] is None


def test_conditions_need_L_for_explicit_weights():  # noqa: N802
    config = parse_config("command: conditions\ncondition: thm13\nweights: list:1,2,3\nN: 2\n")

    with pytest.raises(ValueError, match="L is required"):
        run(config)


def test_counterexample_is_a_finding():
    report = run(parse_config("command: counterexample\np: 0.6\n"))

    assert report.ok
    assert rows_with(report, "unit-vector")[0]["verdict"] == "fails"
    assert any("lhs=1 < rhs" in f for f in report.findings)
    assert main(["counterexample", "--p", "0.6"]) == EXIT_OK


def test_power_sweep_cor14_holds():
    config = parse_config(
        "command: sweep\nalpha: [0, 0.25, 0.5, 0.75, 1]\np: [2, 3]\ncondition: cor14\nN: 2000\n"
    )

    report = run(config)

    summaries = rows_with(report, "cor14")
    assert len(summaries) == 10
    assert all(row["verdict"] == "holds-on-prefix" for row in summaries)
    assert [row["L"] for row in summaries[:2]] == [1.0, 1.0]
    assert len(rows_with(report, "bennett_constant")) == 10
    assert report.ok


def test_sweep_rows_follow_grid_order():
    config = parse_config("command: sweep\nalpha: [1, 0]\np: [3, 2]\nN: 100\n")

    report = run(config)

    cells = [(row["alpha"], row["p"]) for row in rows_with(report, "bennett_constant")]
    assert cells == [(1.0, 3.0), (1.0, 2.0), (0.0, 3.0), (0.0, 2.0)]


def test_carleman_small_prefix():
    report = run(parse_config("command: carleman\nN: 30\nrestarts: 1\n"))

    (lower,) = rows_with(report, "lower_bound_E")
    assert 1 < lower["value"] < math.e
    assert all(row["margin"] >= 0 for row in report.rows[1:])


def test_carleman_ordering_failure_exits_one(monkeypatch):
    def inverted(*args, **kwargs):
        raise carleman.BoundOrderingError("lower bound 3 exceeds e^M")

    monkeypatch.setattr(carleman, "bound_comparison", inverted)

    assert main(["carleman", "--N", "5"]) == EXIT_FAILED


def test_wirtinger_command():
    report = run(parse_config("command: wirtinger\na: 2\nb: 0.5\nN: 16\nsamples: 50\n"))

    assert len(rows_with(report, "eigenvalue")) == 16
    assert rows_with(report, "lossers_lower")[0]["verdict"] == "holds"
    assert rows_with(report, "lossers_lower")[0]["margin"] == pytest.approx(0.0, abs=1e-9)
    assert rows_with(report, "redheffer+")[0]["residual"] <= wirtinger.IDENTITY_TOL
    assert report.ok


def test_wirtinger_large_prefix_exits_zero():
    assert main(["wirtinger", "--N", "1000", "--samples", "10"]) == EXIT_OK


def test_wirtinger_single_coordinate_skips_telescoping():
    report = run(parse_config("command: wirtinger\nN: 1\nsamples: 3\n"))

    assert not rows_with(report, "redheffer+")


def test_spectrum_mismatch_exits_one(monkeypatch):
    def mismatch(*args):
        raise wirtinger.SpectrumMismatchError("closed form disagrees")

    monkeypatch.setattr(wirtinger, "tridiag_spectrum", mismatch)

    assert main(["wirtinger", "--N", "4"]) == EXIT_FAILED


@pytest.mark.parametrize(
    "argv",
    [
        ["norm", "--p", "0.5"],
        ["norm", "--weights", "power:-2"],
        ["conditions", "--condition", "thm13", "--weights", "list:1,2,3", "--N", "2"],
    ],
)
def test_invalid_runs_exit_two(argv, caplog):
    assert main(argv) == EXIT_CONFIG
    assert "Invalid configuration" in caplog.text or "Run aborted" in caplog.text


def test_missing_config_file_exits_two(tmp_path):
    assert main(["norm", "--config", str(tmp_path / "absent.yaml")]) == EXIT_CONFIG


def test_config_file_and_overrides(tmp_path):
    path = tmp_path / "run.yaml"
    path.write_text("weights: power:1\np: 3\nN: 40\nformat: csv\n")
    out = tmp_path / "norm.csv"

    assert main(["norm", "--config", str(path), "--p", "2", "--out", str(out)]) == EXIT_OK

    rows = list(csv.DictReader(out.open()))
    assert len(rows) == 1
    assert rows[0]["p"] == "2"
    assert rows[0]["N"] == "40"


def test_wirtinger_dumps_the_spectrum(tmp_path):
    path = tmp_path / "spectrum.txt"

    assert main(["wirtinger", "--N", "12", "--samples", "5", "--dump", str(path)]) == EXIT_OK

    data = np.loadtxt(path)
    assert data.shape == (12, 3)
    np.testing.assert_allclose(data[:, 1], data[:, 2], atol=1e-9)


def test_certify_dumps_one_trace_per_cell(tmp_path):
    path = tmp_path / "gao.txt"
    config = parse_config(f"command: certify\nL: [1, 1.5]\nN: 50\nmethod: eigen\ndump: {path}\n")

    report = run(config)

    assert report.ok
    assert not path.exists()
    for cell in (0, 1):
        text = (tmp_path / f"gao.{cell}.txt").read_text()
        assert text.startswith("# kind=gao_beta")
        assert np.loadtxt(tmp_path / f"gao.{cell}.txt").shape[0] == 50


def test_norm_dumps_the_eta_trace(tmp_path):
    path = tmp_path / "eta.txt"

    assert main(["norm", "--method", "eta-bisection", "--N", "30", "--dump", str(path)]) == EXIT_OK

    assert path.read_text().startswith("# kind=eta p=2.0")
    assert np.loadtxt(path).shape == (30, 3)


def test_dump_is_rejected_where_nothing_is_traced(tmp_path):
    argv = ["conditions", "--condition", "cor14", "--L", "1", "--dump", str(tmp_path / "x")]

    assert main(argv) == EXIT_CONFIG
    assert not (tmp_path / "x").exists()


def test_dump_config(capsys):
    assert main(["sweep", "--alpha", "0,1", "--p", "2", "--dump-config"]) == EXIT_OK

    dumped = capsys.readouterr().out
    config = parse_config(dumped)
    assert config.alpha == [0.0, 1.0]
    assert config.command.value == "sweep"


def test_phases_are_logged(caplog):
    caplog.set_level("INFO")

    main(["counterexample", "--p", "0.25"])

    assert "Run 1/3 Validating configuration" in caplog.text
    assert "Run 3/3 Writing report" in caplog.text


def test_every_command_has_a_runner():
    assert set(hardycert.COMMANDS) == set(hardycert.Command)


def test_every_config_key_has_a_flag():
    assert set(hardycert.OVERRIDE_KEYS) == set(RunConfig.model_fields)
