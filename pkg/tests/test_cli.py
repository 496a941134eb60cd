"""Unit tests for CLI commands."""

import pytest
from click.testing import CliRunner
from pydantic import ValidationError

from renyi_adapt.models.base import ExperimentKind
from renyi_adapt.models.config import ExperimentSpec
from renyi_adapt.services import harness
from renyi_adapt.services.storage import read_csv, write_csv
from renyi_adapt.utils.errors import (
    CapacityError,
    ConvergenceError,
    ParameterError,
    PartialFailureError,
    SingularityError,
    UnsupportedConfigurationError,
    exit_code_for,
)


class TestCLI:
    """Test cases for the top-level group."""

    def test_cli_help(self, cli_app):
        """Test CLI help command."""
        result = CliRunner().invoke(cli_app, ["--help"])
        assert result.exit_code == 0
        assert "Rényi-ADAPT CLI" in result.output
        for command in ("gen", "grad-scan", "loss-curves", "fit", "config"):
            assert command in result.output

    def test_cli_version(self, cli_app):
        """Test CLI version command."""
        result = CliRunner().invoke(cli_app, ["--version"])
        assert result.exit_code == 0
        assert "renyi-adapt version" in result.output

    def test_cli_verbose_flag(self, cli_app):
        """Test CLI verbose flag."""
        result = CliRunner().invoke(cli_app, ["--verbose", "--help"])
        assert result.exit_code == 0

    def test_cli_quiet_flag(self, cli_app):
        """Test CLI quiet flag."""
        result = CliRunner().invoke(cli_app, ["--quiet", "--help"])
        assert result.exit_code == 0

    def test_experiment_help(self, cli_app):
        """Test that experiment commands document their shared flags."""
        result = CliRunner().invoke(cli_app, ["grad-scan", "--help"])
        assert result.exit_code == 0
        assert "--expensive" in result.output
        assert "--threads" in result.output


class TestConfigCommands:
    """Test cases for config show and init."""

    def test_show_defaults(self, cli_app):
        """Test that show reports built-in defaults without a file."""
        result = CliRunner().invoke(cli_app, ["config", "show"])
        assert result.exit_code == 0
        assert "built-in defaults" in result.output
        assert "trials" in result.output

    def test_init_then_show(self, cli_app, config_path):
        """Test that init writes the file and show reads it back."""
        runner = CliRunner()
        result = runner.invoke(cli_app, ["--config", str(config_path), "config", "init"])
        assert result.exit_code == 0
        assert config_path.exists()
        result = runner.invoke(cli_app, ["--config", str(config_path), "config", "show"])
        assert result.exit_code == 0
        assert "built-in defaults" not in result.output

    def test_init_keeps_existing_file(self, cli_app, config_path):
        """Test that a second init without --force leaves the file alone."""
        runner = CliRunner()
        runner.invoke(cli_app, ["--config", str(config_path), "config", "init"])
        config_path.write_text('{"trials": 3}')
        result = runner.invoke(cli_app, ["--config", str(config_path), "config", "init"])
        assert result.exit_code == 0
        assert "already exists" in result.output
        assert config_path.read_text() == '{"trials": 3}'
        result = runner.invoke(cli_app, ["--config", str(config_path), "config", "init", "--force"])
        assert result.exit_code == 0
        assert '"trials": 20' in config_path.read_text()


class TestGenCommand:
    """Test cases for instance generation."""

    def test_writes_instance_files(self, cli_app, tmp_path):
        """Test one JSON file per (n, trial)."""
        result = CliRunner().invoke(cli_app, ["gen", "--n", "1-2", "--trials", "2", "--out", "out"])
        assert result.exit_code == 0, result.output
        for n in (1, 2):
            for trial in (0, 1):
                assert (tmp_path / "out" / "instances" / f"instance_n{n}_t{trial}.json").exists()

    def test_rejects_large_n(self, cli_app):
        """Test that n outside [1, 6] exits with code 2."""
        result = CliRunner().invoke(cli_app, ["gen", "--n", "9"])
        assert result.exit_code == 2


class TestExperimentCommands:
    """Test cases for the experiment subcommands."""

    def test_grad_scan(self, cli_app, tmp_path):
        """Test a small gradient scan end to end."""
        result = CliRunner().invoke(cli_app, ["grad-scan", "--n", "1-3", "--trials", "2", "--out", "out"])
        assert result.exit_code == 0, result.output
        assert len(read_csv(tmp_path / "out" / "grad-scan" / "grad_scan.csv")) == 18
        assert (tmp_path / "out" / "grad-scan" / "grad_scan_fits.csv").exists()

    def test_config_defaults_apply(self, cli_app, config_path, tmp_path):
        """Test that run defaults from the config file are used when flags are absent."""
        config_path.parent.mkdir(parents=True)
        config_path.write_text('{"trials": 1, "output_dir": "from-config"}')
        result = CliRunner().invoke(
            cli_app, ["--config", str(config_path), "fidelity-scan", "--n", "1", "--loss", "gibbs"]
        )
        assert result.exit_code == 0, result.output
        assert len(read_csv(tmp_path / "from-config" / "fidelity-scan" / "fidelity_scan.csv")) == 1

    def test_loss_curves_on_saved_instance(self, cli_app, tmp_path):
        """Test that --instance takes n from the file."""
        runner = CliRunner()
        runner.invoke(cli_app, ["gen", "--n", "1", "--out", "out"])
        instance = tmp_path / "out" / "instances" / "instance_n1_t0.json"
        result = runner.invoke(
            cli_app,
            ["loss-curves", "--instance", str(instance), "--loss", "gibbs", "--max-params", "2", "--out", "out"],
        )
        assert result.exit_code == 0, result.output
        assert (tmp_path / "out" / "loss-curves" / "n1" / "gibbs_adapt_trace.csv").exists()

    @pytest.mark.parametrize(
        "args",
        [
            ["grad-scan", "--n", "7"],
            ["grad-scan", "--n", "abc"],
            ["size-scan", "--n", "4"],
            ["grad-scan", "--n", "6"],
            ["completion", "--n", "1", "--loss", "kl"],
        ],
    )
    def test_parameter_errors_exit_2(self, cli_app, args):
        """Test that invalid sizes, gated cells and unknown losses exit with code 2."""
        result = CliRunner().invoke(cli_app, args)
        assert result.exit_code == 2

    def test_unknown_loss_is_named(self, cli_app):
        """Test that an unknown --loss value is reported with the supported names."""
        result = CliRunner().invoke(cli_app, ["grad-scan", "--n", "1", "--loss", "renyi", "--loss", "kl"])
        assert result.exit_code == 2
        assert "Unknown loss" in result.output
        assert "'kl'" in result.output

    def test_loss_names_ignore_case(self, cli_app, tmp_path):
        """Test that --loss accepts any capitalization."""
        result = CliRunner().invoke(
            cli_app, ["grad-scan", "--n", "1", "--trials", "1", "--loss", "RENYI", "--out", "out"]
        )
        assert result.exit_code == 0
        assert {row["loss"] for row in read_csv(tmp_path / "out" / "grad-scan" / "grad_scan.csv")} == {"renyi"}

    def test_partial_failure_exits_4(self, cli_app, monkeypatch):
        """Test that a failing trial gives exit code 4."""
        original = harness.gradient_task

        def flaky(task):
            if task.trial == 1:
                raise RuntimeError("boom")
            return original(task)

        monkeypatch.setattr(harness, "gradient_task", flaky)
        result = CliRunner().invoke(cli_app, ["grad-scan", "--n", "1", "--trials", "2", "--out", "out"])
        assert result.exit_code == 4
        assert "failed" in result.output


class TestFitCommand:
    """Test cases for the fit command."""

    def test_coefficients(self, cli_app):
        """Test failure prediction straight from a and b."""
        result = CliRunner().invoke(cli_app, ["fit", "--a", "1.676", "--b", "1.198", "--threshold", "1e-5"])
        assert result.exit_code == 0
        assert "67" in result.output

    def test_non_decaying_coefficients(self, cli_app):
        """Test that b <= 1 is reported as never failing."""
        result = CliRunner().invoke(cli_app, ["fit", "--a", "1.0", "--b", "0.9", "--threshold", "1e-5"])
        assert result.exit_code == 0
        assert "never" in result.output

    def test_csv(self, cli_app, tmp_path):
        """Test fitting a grad-scan CSV and writing the fits."""
        source = tmp_path / "grad_scan.csv"
        rows = [{"loss": "renyi", "n": n, "trial": 0, "g_inf": 2.0 * 2.0**-n} for n in (1, 2, 3, 4)]
        write_csv(source, harness.GRAD_SCAN_COLUMNS, rows)
        result = CliRunner().invoke(cli_app, ["fit", str(source), "--threshold", "1e-5", "--out", "fits.csv"])
        assert result.exit_code == 0, result.output
        fits = read_csv(tmp_path / "fits.csv")
        assert len(fits) == 1
        assert fits[0]["predicted_failure_n"] == "18"

    def test_csv_with_too_few_sizes(self, cli_app, tmp_path):
        """Test that a CSV with two sizes fits nothing."""
        source = tmp_path / "grad_scan.csv"
        write_csv(source, harness.GRAD_SCAN_COLUMNS, [{"loss": "gibbs", "n": n, "trial": 0, "g_inf": 0.1} for n in (1, 2)])
        result = CliRunner().invoke(cli_app, ["fit", str(source)])
        assert result.exit_code == 0
        assert "No losses" in result.output

    def test_wrong_csv(self, cli_app, tmp_path):
        """Test that a CSV without grad-scan columns exits with code 2."""
        source = tmp_path / "other.csv"
        write_csv(source, ["x"], [{"x": 1}])
        assert CliRunner().invoke(cli_app, ["fit", str(source)]).exit_code == 2

    @pytest.mark.parametrize(
        "args",
        [
            ["fit"],
            ["fit", "--a", "1.5"],
            ["fit", "--a", "1.5", "--b", "2.0", "--threshold", "2.0"],
            ["fit", "--a=-1.0", "--b", "2.0"],
        ],
    )
    def test_invalid_arguments(self, cli_app, args):
        """Test missing inputs, unpaired coefficients and bad thresholds."""
        assert CliRunner().invoke(cli_app, args).exit_code == 2


class TestExitCodes:
    """Test cases for exit_code_for."""

    def test_mapping(self):
        """Test the documented exit code per error family."""
        assert exit_code_for(ParameterError("x")) == 2
        assert exit_code_for(UnsupportedConfigurationError("x")) == 2
        assert exit_code_for(CapacityError("x")) == 2
        assert exit_code_for(SingularityError("x", eigenvalue=0.0)) == 3
        assert exit_code_for(ConvergenceError("x")) == 3
        assert exit_code_for(PartialFailureError("x", ["a"])) == 4
        assert exit_code_for(RuntimeError("x")) == 1

    def test_validation_error(self):
        """Test that pydantic validation failures count as parameter errors."""
        with pytest.raises(ValidationError) as exc_info:
            ExperimentSpec(experiment=ExperimentKind.GRAD_SCAN, n_range=[9])
        assert exit_code_for(exc_info.value) == 2
