import json

import numpy as np
import pytest
from numpy.testing import assert_allclose

from qconstrain.cli import main as cli_main
from qconstrain.errors import InvalidInput, SingularConstraintMatrix
from qconstrain.gridfield import canonical_json, grid_axes, sample_field_grid
from qconstrain.models import REGISTRY
from qconstrain.runconfig import (
    result_csv,
    result_json_dict,
    run_simulation,
    trajectory_from_json,
    validate_config,
)


class TestGridSampling:
    def test_axes_skirt_poles(self):
        thetas, phis = grid_axes(24, 24)
        assert thetas[0] == pytest.approx(np.pi / 36)
        assert thetas[-1] == pytest.approx(np.pi - np.pi / 36)
        assert phis[0] == 0.0
        assert phis[-1] < 2 * np.pi

    def test_example1_grid_matches_formula(self):
        # partner on the equator at phi = pi/2 with rates (1,2,3):
        # theta1' = sin(phi1 - pi/2) * 1 * [(-1) cos(theta1) - 1]
        entry = REGISTRY["example1-ode"]
        grid = sample_field_grid(entry, None, 24, 24, partner=(np.pi / 2, np.pi / 2))
        assert len(grid["samples"]) == 24 * 24
        assert grid["singular_mask"] == []
        for node in grid["samples"][::37]:
            th, ph = node["theta"], node["phi"]
            expected = np.sin(ph - np.pi / 2) * (-np.cos(th) - 1.0)
            assert node["theta_dot"] == pytest.approx(expected, abs=1e-12)

    def test_example2_grid_equator_rows_zero(self):
        entry = REGISTRY["example2-ode"]
        grid = sample_field_grid(entry, None, 25, 24)
        equator = [s for s in grid["samples"] if abs(s["theta"] - np.pi / 2) < 1e-12]
        # the row has 24 nodes; phi = 0 and phi = pi sit on the singular set
        # where the conserved x-expectation is +-1 and are masked
        assert len(equator) == 22
        for node in equator:
            assert abs(node["theta_dot"]) <= 1e-14
            assert abs(node["phi_dot"]) <= 1e-14

    def test_singular_node_masked_not_nan(self):
        # theta grid with odd count contains pi/2 exactly; (pi/2, 0) is singular
        entry = REGISTRY["example2-ode"]
        grid = sample_field_grid(entry, None, 25, 24)
        assert [12, 0] in grid["singular_mask"]
        assert len(grid["samples"]) == 25 * 24 - len(grid["singular_mask"])
        text = canonical_json(grid)
        assert "NaN" not in text and "Infinity" not in text

    def test_theta_major_ordering_deterministic(self):
        entry = REGISTRY["example2-ode"]
        a = canonical_json(sample_field_grid(entry, None, 10, 10))
        b = canonical_json(sample_field_grid(entry, None, 10, 10))
        assert a == b
        thetas = [s["theta"] for s in json.loads(a)["samples"]]
        assert thetas == sorted(thetas)


class TestRunConfigValidation:
    def test_unknown_model(self):
        with pytest.raises(InvalidInput):
            validate_config({"model": "nope", "initial": [1, 1]}, REGISTRY)

    def test_unknown_keys(self):
        with pytest.raises(InvalidInput):
            validate_config({"model": "free-spin", "initial": [1, 1], "bogus": 1}, REGISTRY)

    def test_symplectic_on_single_constraint_model_rejected(self):
        with pytest.raises(SingularConstraintMatrix):
            validate_config(
                {"model": "example2-operator", "engine": "symplectic",
                 "initial": [0.4, 0.2]},
                REGISTRY,
            )

    def test_closed_form_for_operator_model_rejected(self):
        with pytest.raises(InvalidInput):
            validate_config(
                {"model": "example2-operator", "engine": "closed-form",
                 "initial": [0.4, 0.2]},
                REGISTRY,
            )

    def test_coordinate_count_checked(self):
        with pytest.raises(InvalidInput):
            validate_config({"model": "example2-ode", "initial": [0.4]}, REGISTRY)

    def test_defaults_applied(self):
        config = validate_config({"model": "example2-ode", "initial": [0.3, 0.2]}, REGISTRY)
        assert config.engine == "closed-form"
        assert config.t_end == 10.0
        assert config.rel_tol == 1e-9


class TestSimulationRuns:
    def test_example2_ode_conserves_sx(self):
        config = validate_config(
            {"model": "example2-ode", "initial": [0.3, 0.2], "t_end": 20.0,
             "rel_tol": 1e-9, "abs_tol": 1e-11},
            REGISTRY,
        )
        result = run_simulation(config, REGISTRY)
        sx0 = np.sin(0.3) * np.cos(0.2)
        assert sx0 == pytest.approx(0.2896, abs=5e-4)
        assert np.max(np.abs(result.diagnostics["sx"] - sx0)) <= 1e-6

    def test_zero_duration_single_row(self):
        config = validate_config(
            {"model": "example2-ode", "initial": [0.3, 0.2], "t_end": 0.0},
            REGISTRY,
        )
        result = run_simulation(config, REGISTRY)
        assert len(result.times) == 1
        assert_allclose(result.coords[0], [0.3, 0.2], atol=1e-15)

    def test_free_spin_phase_advance(self):
        config = validate_config(
            {"model": "free-spin", "initial": [np.pi / 2, 0.5],
             "t_end": np.pi / 2, "rel_tol": 1e-10},
            REGISTRY,
        )
        result = run_simulation(config, REGISTRY)
        assert result.coords[-1][1] == pytest.approx(0.5 + np.pi, abs=1e-8)

    def test_example1_ode_four_coordinate_run(self):
        config = validate_config(
            {"model": "example1-ode", "initial": [1.0, 0.5, 2.0, 1.5],
             "t_end": 5.0},
            REGISTRY,
        )
        result = run_simulation(config, REGISTRY)
        assert result.coords.shape[1] == 4
        assert np.all(np.isfinite(result.coords))
        assert result.partial is False
        text = result_csv(result, REGISTRY)
        assert text.startswith("t,theta1,phi1,theta2,phi2")

    def test_operator_engine_run(self):
        config = validate_config(
            {"model": "example2-operator", "engine": "metric",
             "initial": [0.8, 1.9], "t_end": 5.0},
            REGISTRY,
        )
        result = run_simulation(config, REGISTRY)
        assert "sx" in result.diagnostics and "energy" in result.diagnostics
        assert np.max(np.abs(result.diagnostics["sx"]
                             - result.diagnostics["sx"][0])) <= 1e-6


class TestExport:
    def _result(self):
        config = validate_config(
            {"model": "example2-ode", "initial": [0.3, 0.2], "t_end": 2.0},
            REGISTRY,
        )
        return run_simulation(config, REGISTRY)

    def test_csv_has_17_digit_columns(self):
        result = self._result()
        text = result_csv(result, REGISTRY)
        lines = text.strip().split("\n")
        assert lines[0] == "t,theta,phi,sx,energy"
        # round-trip: parsing a data cell back gives the identical float
        cell = lines[1].split(",")[1]
        assert float(format(float(cell), ".17g")) == float(cell)

    def test_csv_deterministic(self):
        a = result_csv(self._result(), REGISTRY)
        b = result_csv(self._result(), REGISTRY)
        assert a == b

    def test_csv_and_json_carry_identical_floats(self):
        result = self._result()
        csv_lines = result_csv(result, REGISTRY).strip().split("\n")[1:]
        doc = result_json_dict(result, REGISTRY)
        for row, t, point in zip(csv_lines, doc["times"], doc["points"]):
            cells = [float(c) for c in row.split(",")]
            assert cells[0] == t
            assert cells[1] == point[0] and cells[2] == point[1]
            assert cells[3] == doc["diagnostics"]["sx"][doc["times"].index(t)]

    def test_json_round_trip_bit_exact(self):
        result = self._result()
        doc = result_json_dict(result, REGISTRY, created_at="2024-01-01T00:00:00Z")
        text = canonical_json(doc)
        back = trajectory_from_json(text)
        assert back.times.tolist() == result.times.tolist()
        assert back.points.tolist() == result.coords.tolist()
        for name, series in result.diagnostics.items():
            assert back.monitors[name].tolist() == list(map(float, series))


class TestCli:
    def test_simulate_writes_files(self, tmp_path):
        out = tmp_path / "run"
        code = cli_main([
            "simulate", "--model", "example2-ode", "--initial", "0.3,0.2",
            "--t-end", "1.0", "--out", str(out), "--format", "both",
        ])
        assert code == 0
        csv_text = (tmp_path / "run.csv").read_text()
        assert csv_text.startswith("t,theta,phi,sx,energy")
        doc = json.loads((tmp_path / "run.json").read_text())
        assert doc["schema_version"] == 1
        assert doc["metadata"]["partial"] is False

    def test_simulate_determinism(self, tmp_path):
        args = ["simulate", "--model", "example2-ode", "--initial", "0.3,0.2",
                "--t-end", "1.0", "--format", "csv"]
        cli_main(args + ["--out", str(tmp_path / "a")])
        cli_main(args + ["--out", str(tmp_path / "b")])
        assert (tmp_path / "a.csv").read_bytes() == (tmp_path / "b.csv").read_bytes()

    def test_validation_exit_code(self, capsys):
        code = cli_main(["simulate", "--model", "not-a-model", "--initial", "0,0"])
        assert code == 2
        assert "error" in capsys.readouterr().err

    def test_even_constraint_gate_exit_code(self):
        code = cli_main([
            "simulate", "--model", "example2-operator", "--engine", "symplectic",
            "--initial", "0.4,0.2",
        ])
        assert code == 2

    def test_runtime_failure_exit_code_with_partial_output(self, tmp_path, capsys):
        # starting essentially on the singular set: the field evaluation
        # fails immediately, the single recorded row is exported, exit 3
        out = tmp_path / "partial"
        code = cli_main([
            "simulate", "--model", "example2-ode",
            "--initial", f"{np.pi / 2},1e-9", "--t-end", "5.0",
            "--out", str(out), "--format", "json",
        ])
        assert code == 3
        assert "partial" in capsys.readouterr().err
        doc = json.loads((tmp_path / "partial.json").read_text())
        assert doc["metadata"]["partial"] is True
        assert "FieldError" in doc["metadata"]["failure"]

    def test_field_to_file(self, tmp_path):
        out = tmp_path / "grid.json"
        code = cli_main([
            "field", "--model", "example1-ode", "--partner", "1.5707963267948966,1.5707963267948966",
            "--theta-count", "8", "--phi-count", "8", "--out", str(out),
        ])
        assert code == 0
        doc = json.loads(out.read_text())
        assert doc["model"] == "example1-ode"
        assert len(doc["samples"]) == 64

    def test_field_missing_partner(self):
        assert cli_main(["field", "--model", "example1-ode"]) == 2

    def test_config_file_with_flag_override(self, tmp_path):
        cfgfile = tmp_path / "cfg.json"
        cfgfile.write_text(json.dumps({
            "model": "example2-ode", "initial": [0.3, 0.2], "t_end": 99.0,
            "format": "csv",
        }))
        out = tmp_path / "run"
        code = cli_main([
            "simulate", "--config", str(cfgfile), "--t-end", "0.5",
            "--out", str(out),
        ])
        assert code == 0
        text = (tmp_path / "run.csv").read_text()
        last_t = float(text.strip().split("\n")[-1].split(",")[0])
        assert last_t == pytest.approx(0.5, abs=1e-12)

    def test_fixed_points_free_spin(self, tmp_path):
        out = tmp_path / "fp.json"
        code = cli_main([
            "fixed-points", "--model", "free-spin", "--seed-count", "12",
            "--residual-tol", "1e-8", "--out", str(out),
        ])
        assert code == 0
        doc = json.loads(out.read_text())
        assert len(doc["fixed_points"]) == 2
        zs = sorted(np.cos(p["coords"][0]) for p in doc["fixed_points"])
        assert zs[0] == pytest.approx(-1.0, abs=1e-6)
        assert zs[1] == pytest.approx(1.0, abs=1e-6)
