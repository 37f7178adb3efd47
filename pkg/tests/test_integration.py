"""End-to-end runs of the ``aerodg`` command line on small meshes."""

import json

import pandas as pd
import pytest
from click.testing import CliRunner

from aerodg import __version__
from aerodg.driver.cli import cli


@pytest.fixture
def runner():
    return CliRunner()


@pytest.fixture
def airfoil_config(write_config, naca_tiny, fast_entries):
    return write_config(naca_tiny, fast_entries)


def invoke(runner, *args):
    return runner.invoke(cli, ["--log-level", "WARNING", *map(str, args)], catch_exceptions=False)


def test_version(runner):
    result = runner.invoke(cli, ["--version"])
    assert result.exit_code == 0
    assert __version__ in result.output


class TestValidate:
    def test_valid_case(self, runner, airfoil_config, tmp_path):
        result = invoke(runner, "validate", airfoil_config)
        assert result.exit_code == 0, result.output
        assert (tmp_path / "out" / "validation.csv").is_file()

    def test_invalid_scheme_exits_2(self, runner, write_config, channel):
        result = invoke(runner, "validate", write_config(channel, {"scheme": "DGp3"}))
        assert result.exit_code == 2
        assert "config_invalid" in result.output

    def test_parameterization_outside_the_mesh(self, runner, write_config, channel, fast_entries, tmp_path):
        path = write_config(channel, {**fast_entries, "parameterization.kind": "hicks_henne"})
        result = invoke(runner, "validate", path)
        assert result.exit_code == 2
        payload = json.loads((tmp_path / "out" / "error.json").read_text())
        assert payload["command"] == "validate"
        assert payload["details"]["key"] == "parameterization"


class TestSolve:
    def test_channel(self, runner, write_config, channel, fast_entries, tmp_path):
        path = write_config(channel, {**fast_entries, "freestream.aoa": 0.0})
        result = invoke(runner, "solve", path)
        assert result.exit_code == 0, result.output
        assert "converged=True" in result.output
        out = tmp_path / "out"
        for name in ("fields.csv", "surface_cp.csv", "convergence.csv", "forces.csv"):
            assert (out / name).is_file()
        assert list(pd.read_csv(out / "convergence.csv").columns) == ["step", "CFL", "residual_L2", "Cl", "Cd"]

    def test_scheme_and_output_overrides(self, runner, write_config, channel, fast_entries, tmp_path):
        path = write_config(channel, {**fast_entries, "freestream.aoa": 0.0})
        result = invoke(runner, "solve", path, "--scheme", "DGp1", "-o", tmp_path / "dg")
        assert result.exit_code == 0, result.output
        fields = pd.read_csv(tmp_path / "dg" / "fields.csv")
        assert "rhoE_2" in fields.columns


class TestDeform:
    def test_default_fraction(self, runner, airfoil_config, tmp_path):
        result = invoke(runner, "deform", airfoil_config)
        assert result.exit_code == 0, result.output
        assert (tmp_path / "out" / "deformed.mesh").is_file()
        report = pd.read_csv(tmp_path / "out" / "deformation.csv")
        assert len(report) == 1

    def test_bad_values(self, runner, airfoil_config):
        result = runner.invoke(cli, ["deform", str(airfoil_config), "--values", "a b"])
        assert result.exit_code == 2


class TestOptimize:
    def test_zero_iterations_keeps_the_baseline(self, runner, write_config, naca_tiny, fast_entries, tmp_path):
        path = write_config(naca_tiny, {**fast_entries, "opt.max_iter": 0})
        result = invoke(runner, "optimize", path)
        assert result.exit_code == 0, result.output
        out = tmp_path / "out"
        report = pd.read_csv(out / "report.csv").set_index("quantity")
        assert report.loc["Cd", "delta"] == 0.0
        assert (out / "iter_0000" / "checkpoint.npz").is_file()
        assert (out / "final" / "final.mesh").is_file()
        summary = pd.read_csv(out / "summary.csv")
        assert summary["status"].iloc[0] == "max_iterations"

    @pytest.mark.slow
    def test_resume_continues_the_iteration_count(self, runner, write_config, naca_tiny, fast_entries, tmp_path):
        first = write_config(naca_tiny, {**fast_entries, "opt.max_iter": 1}, name="first.cfg")
        assert invoke(runner, "optimize", first).exit_code == 0
        second = write_config(naca_tiny, {**fast_entries, "opt.max_iter": 2}, name="second.cfg")
        result = invoke(runner, "optimize", second, "--resume", tmp_path / "out")
        assert result.exit_code == 0, result.output
        summary = pd.read_csv(tmp_path / "out" / "summary.csv")
        assert summary["iterations"].iloc[0] == 2
        assert (tmp_path / "out" / "iter_0002" / "checkpoint.npz").is_file()

    def test_resume_without_checkpoint(self, runner, airfoil_config, tmp_path):
        empty = tmp_path / "empty"
        empty.mkdir()
        result = invoke(runner, "optimize", airfoil_config, "--resume", empty)
        assert result.exit_code == 1
        assert "checkpoint_failed" in result.output


@pytest.mark.slow
class TestGradients:
    def test_adjoint_table(self, runner, airfoil_config, tmp_path):
        result = invoke(runner, "adjoint", airfoil_config)
        assert result.exit_code == 0, result.output
        table = pd.read_csv(tmp_path / "out" / "gradient.csv")
        assert list(table.columns) == ["i", "dJ_dD", "dCl_dD", "dA_dD"]
        assert len(table) == 8

    def test_zero_tolerance_grad_check_exits_4(self, runner, write_config, naca_tiny, fast_entries, tmp_path):
        path = write_config(
            naca_tiny,
            {**fast_entries, "gradcheck.tolerance": 0.0, "gradcheck.solve_tolerance": 1e-9, "solver.max_steps": 200},
        )
        result = invoke(runner, "grad-check", path)
        assert result.exit_code == 4
        assert (tmp_path / "out" / "gradcheck.csv").is_file()
        assert (tmp_path / "out" / "error.json").is_file()
