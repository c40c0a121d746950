"""Batch CLI: output formats, exit codes, config handling, determinism."""
import json
import math

import pytest

from pfmass.cli import CSV_COLUMNS, main

A1_LN2 = 8.0 / (3.0 * math.pi) * math.log(2.0)
CSV_HEADER = ",".join(CSV_COLUMNS)


def run(capsys, *argv):
    rc = main(list(argv))
    cap = capsys.readouterr()
    return rc, cap.out, cap.err


class TestA1:
    def test_twelve_significant_digits(self, capsys):
        rc, out, _ = run(capsys, "a1", "--lambda", "2", "--kappa", "0")
        assert rc == 0
        assert out == f"{A1_LN2:.11e}\n"

    def test_quadrature_method_agrees(self, capsys):
        _, closed, _ = run(capsys, "a1", "--lambda", "9", "--kappa", "0.5")
        rc, quad, _ = run(capsys, "a1", "--lambda", "9", "--kappa", "0.5",
                          "--method", "quad")
        assert rc == 0
        assert float(quad) == pytest.approx(float(closed), rel=1e-10)

    def test_missing_parameter_named(self, capsys):
        rc, _, err = run(capsys, "a1", "--kappa", "0")
        assert rc == 1
        assert "--lambda" in err


class TestBterm:
    def test_b4_closed_form(self, capsys):
        rc, out, _ = run(capsys, "bterm", "--j", "4", "--lambda", "10",
                         "--kappa", "0", "--out", "json")
        assert rc == 0
        payload = json.loads(out)
        oracle = -(32.0 * math.pi / 3.0) * math.log(6.0) ** 2
        assert payload["value"] == pytest.approx(oracle, rel=1e-8)
        assert payload["converged"] is True

    def test_bad_term_index(self, capsys):
        rc, _, err = run(capsys, "bterm", "--j", "9", "--lambda", "10",
                         "--kappa", "0")
        assert rc == 1
        assert "--j" in err or "1..6" in err

    def test_forced_non_convergence_exits_2_with_output(self, capsys):
        rc, out, _ = run(capsys, "bterm", "--j", "1", "--lambda", "100",
                         "--kappa", "0", "--max-subdivisions", "1",
                         "--rel-tol", "1e-12", "--out", "json")
        assert rc == 2
        payload = json.loads(out)  # results still emitted
        assert payload["converged"] is False
        assert math.isfinite(payload["value"])


class TestA2:
    def test_terms_and_sum(self, capsys):
        rc, out, _ = run(capsys, "a2", "--lambda", "5", "--kappa", "1",
                         "--out", "json")
        assert rc == 0
        payload = json.loads(out)
        total = sum(payload["terms"][f"b{j}"]["value"] for j in range(1, 7))
        pref = (4.0 * math.pi) ** 2 / (2.0 * math.pi) ** 6 * (2.0 / 3.0)
        assert payload["a2"]["value"] == pytest.approx(pref * total, rel=1e-12)


class TestSweepCsv:
    def test_header_and_row_count(self, capsys):
        rc, out, _ = run(capsys, "sweep", "--lambda-grid", "10:40:geometric:3",
                         "--kappa", "1")
        assert rc == 0
        lines = out.strip().split("\n")
        assert lines[0] == CSV_HEADER
        assert len(lines) == 4

    def test_explicit_exponent_notation(self, capsys):
        _, out, _ = run(capsys, "sweep", "--lambda-grid", "10:40:geometric:3",
                        "--kappa", "1")
        rows = out.strip().split("\n")[1:]
        for row in rows:
            for field in row.split(",")[:15]:
                assert field == "nan" or "e+" in field or "e-" in field, field

    def test_threads_do_not_change_bytes(self, capsys):
        argv = ["sweep", "--lambda-grid", "12:50:geometric:4", "--kappa", "0.5"]
        _, serial, _ = run(capsys, *argv, "--threads", "1")
        _, parallel, _ = run(capsys, *argv, "--threads", "3")
        assert serial == parallel

    def test_json_round_trip_byte_identical(self, capsys):
        rc, out, _ = run(capsys, "sweep", "--lambda-grid",
                         "10:30:geometric:2", "--kappa", "1", "--out", "json")
        assert rc == 0
        assert json.dumps(json.loads(out), indent=2, sort_keys=True) + "\n" == out

    def test_bad_grid_named(self, capsys):
        rc, _, err = run(capsys, "sweep", "--lambda-grid", "10:40:linear:3",
                         "--kappa", "0")
        assert rc == 1
        assert "--lambda-grid" in err

    def test_out_file(self, capsys, tmp_path):
        target = tmp_path / "sweep.csv"
        rc, out, _ = run(capsys, "sweep", "--lambda-grid", "10:20:geometric:2",
                         "--kappa", "1", "--out-file", str(target))
        assert rc == 0
        assert out == ""
        assert target.read_text().startswith(CSV_HEADER)

    def test_unwritable_out_file(self, capsys):
        rc, _, err = run(capsys, "sweep", "--lambda-grid", "10:20:geometric:2",
                         "--kappa", "1", "--out-file", "/nonexistent/dir/x.csv")
        assert rc == 1
        assert "/nonexistent/dir/x.csv" in err


class TestScaling:
    def test_from_csv_file(self, capsys, tmp_path):
        target = tmp_path / "table.csv"
        rc, _, _ = run(capsys, "sweep", "--lambda-grid", "1e2:1e4:geometric:5",
                       "--kappa", "0", "--out-file", str(target))
        assert rc == 0
        rc, out, _ = run(capsys, "scaling", "--in", str(target), "--out", "json")
        assert rc == 0
        payload = json.loads(out)
        assert payload["fit"]["column"] == "b2"
        assert math.isfinite(payload["fit"]["exponent"])
        assert payload["extrapolation"]["c_estimate"] is not None

    def test_requires_input_or_grid(self, capsys):
        rc, _, err = run(capsys, "scaling")
        assert rc == 1
        assert "--in" in err or "--lambda-grid" in err


class TestBounds:
    def test_reports_all_checks(self, capsys):
        rc, out, _ = run(capsys, "bounds", "--lambda", "1e3", "--kappa", "0",
                         "--out", "json")
        assert rc == 0
        payload = json.loads(out)
        assert payload["bL_at_1_minus_1_over_lambda"] == pytest.approx(-1.5, abs=0.05)
        assert payload["K_min_on_y_grid"] > 0.0
        assert payload["arctan_bracket_min"] > 0.0
        assert payload["derivative_integrand_nonnegative"] is True
        assert payload["sqrt_lambda_db2"] > 0.0
        assert payload["bL_concave"] is True


class TestCrosscheck:
    def test_structure_at_low_samples(self, capsys):
        rc, out, _ = run(capsys, "crosscheck", "--windows", "5:1,10:1",
                         "--qmc-samples", "2048", "--out", "json")
        assert rc in (0, 2)
        payload = json.loads(out)
        assert len(payload["windows"]) == 2
        for entry in payload["windows"]:
            assert entry["ratio"] == pytest.approx(
                entry["a2_cartesian_qmc"]["value"] / entry["a2_polar"]["value"],
                rel=1e-12)
        assert math.isfinite(payload["ratio_over_2pi"])


class TestMeff:
    def test_reports_expansion(self, capsys):
        rc, out, _ = run(capsys, "meff", "--alpha", "0.001", "--lambda", "10",
                         "--kappa", "1", "--out", "json")
        assert rc == 0
        payload = json.loads(out)
        assert payload["meff_over_m"] >= 1.0
        assert payload["m_over_meff"] == pytest.approx(
            1.0 - 0.001 * payload["a1"] - 0.001 ** 2 * payload["a2"], rel=1e-12)

    def test_negative_alpha_rejected(self, capsys):
        rc, _, err = run(capsys, "meff", "--alpha", "-1", "--lambda", "10",
                         "--kappa", "1")
        assert rc == 1
        assert "alpha" in err


class TestFlow:
    def test_reference_point(self, capsys):
        rc, out, _ = run(capsys, "flow", "--gamma", "0.5", "--b0", "1",
                         "--m-star", "1", "--lambda", "1e4", "--out", "json")
        assert rc == 0
        payload = json.loads(out)
        assert payload["bare_mass"] == pytest.approx(1e-4, rel=1e-12)
        assert payload["composition_check"] == pytest.approx(1.0, rel=1e-12)

    def test_gamma_validation(self, capsys):
        rc, _, err = run(capsys, "flow", "--gamma", "1.5", "--b0", "1",
                         "--m-star", "1", "--lambda", "1e4")
        assert rc == 1
        assert "renormalizable" in err


class TestConfig:
    def test_config_supplies_required_args(self, capsys, tmp_path):
        cfg = tmp_path / "run.cfg"
        cfg.write_text("# window\nlambda = 2\nkappa = 0\n")
        rc, out, _ = run(capsys, "a1", "--config", str(cfg))
        assert rc == 0
        assert out == f"{A1_LN2:.11e}\n"

    def test_flags_override_config(self, capsys, tmp_path):
        cfg = tmp_path / "run.cfg"
        cfg.write_text("lambda = 2\nkappa = 0\n")
        rc, out, _ = run(capsys, "a1", "--config", str(cfg), "--lambda", "6")
        assert rc == 0
        expected = 8.0 / (3.0 * math.pi) * math.log(4.0)
        assert float(out) == pytest.approx(expected, rel=1e-11)

    def test_unknown_key_named(self, capsys, tmp_path):
        cfg = tmp_path / "run.cfg"
        cfg.write_text("lambda = 2\nbogus = 7\n")
        rc, _, err = run(capsys, "a1", "--config", str(cfg))
        assert rc == 1
        assert "bogus" in err

    def test_malformed_line_reports_location(self, capsys, tmp_path):
        cfg = tmp_path / "run.cfg"
        cfg.write_text("lambda = 2\nnonsense line\n")
        rc, _, err = run(capsys, "a1", "--config", str(cfg))
        assert rc == 1
        assert "run.cfg" in err and "2" in err

    def test_missing_file(self, capsys):
        rc, _, err = run(capsys, "a1", "--config", "/no/such/file.cfg")
        assert rc == 1
        assert "file.cfg" in err


class TestUsage:
    def test_no_command(self, capsys):
        rc, _, err = run(capsys)
        assert rc == 1
        assert "command" in err

    def test_unknown_flag(self, capsys):
        rc, _, err = run(capsys, "a1", "--lambda", "2", "--kappa", "0",
                         "--frobnicate")
        assert rc == 1
        assert "frobnicate" in err

    def test_env_thread_count_validated(self, capsys, monkeypatch):
        monkeypatch.setenv("PFMASS_WORKERS", "zero")
        rc, _, err = run(capsys, "sweep", "--lambda-grid",
                         "10:20:geometric:2", "--kappa", "1")
        assert rc == 1
        assert "PFMASS_WORKERS" in err
