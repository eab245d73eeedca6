import json

import pytest
import yaml

from cli.constants import (
    APPENDIX_REPORT,
    DARK_CURRENT_REPORT,
    DARK_CURRENT_SWEEP,
    ESTIMATOR_REPORT,
    EXIT_CONFIG,
    EXIT_OK,
    QE_REPORT,
    QE_RUNS,
    QE_SWEEP,
    QE_SWEEP_COLUMNS,
)
from cli.view import build_parser, exit_code_for
from core.exceptions import ConfigError, DomainError, SchemaVersionError, UsageError, ValidationFailure
from main import main
from storage.datasets import read_report, read_table

pytestmark = pytest.mark.usefixtures("restore_logging")


def write_config(path, **sections):
    data = {"schema_version": 1, "master_seed": 3}
    data.update(sections)
    path.write_text(yaml.safe_dump(data), encoding="utf-8")
    return str(path)


def test_qe_sweep_is_reproducible(tmp_path):
    first, second, parallel = tmp_path / "a", tmp_path / "b", tmp_path / "c"
    assert main(["qe-sweep", "--seed", "1", "--runs", "50", "--out", str(first)]) == EXIT_OK
    assert main(["qe-sweep", "--seed", "1", "--runs", "50", "--out", str(second)]) == EXIT_OK
    assert main(["qe-sweep", "--seed", "1", "--runs", "50", "--out", str(parallel), "--workers", "2"]) == EXIT_OK
    for name in (QE_RUNS, QE_SWEEP, QE_REPORT):
        assert (first / name).read_bytes() == (second / name).read_bytes()
        assert (first / name).read_bytes() == (parallel / name).read_bytes()

    rows, provenance = read_table(first / QE_SWEEP)
    assert list(rows[0]) == QE_SWEEP_COLUMNS
    assert len(rows) == 10
    assert provenance["master_seed"] == "1"
    assert provenance["command"] == "qe-sweep"
    report = read_report(first / QE_REPORT)
    assert report["reports"]["injected_eta_qj"] == 2.9e-3
    assert report["provenance"]["config_hash"] == provenance["config_hash"]


@pytest.mark.parametrize("command", ["characterize", "readout-noise", "dark-current", "validate-appendix", "validate-estimators"])
def test_every_command_is_reproducible(tmp_path, command):
    serial, parallel = tmp_path / "serial", tmp_path / "parallel"
    code = main([command, "--seed", "11", "--runs", "200", "--out", str(serial)])
    assert main([command, "--seed", "11", "--runs", "200", "--out", str(parallel), "--workers", "2"]) == code
    names = sorted(path.name for path in serial.iterdir())
    assert names == sorted(path.name for path in parallel.iterdir())
    assert names
    for name in names:
        assert (serial / name).read_bytes() == (parallel / name).read_bytes()


def test_seed_changes_results(tmp_path):
    main(["qe-sweep", "--seed", "1", "--runs", "50", "--out", str(tmp_path / "a")])
    main(["qe-sweep", "--seed", "2", "--runs", "50", "--out", str(tmp_path / "b")])
    assert (tmp_path / "a" / QE_RUNS).read_bytes() != (tmp_path / "b" / QE_RUNS).read_bytes()


def test_missing_seed_reports_config_error(tmp_path, capsys):
    assert main(["qe-sweep", "--out", str(tmp_path)]) == EXIT_CONFIG
    record = json.loads(capsys.readouterr().err.strip().splitlines()[-1])
    assert record["error"] == "ConfigError"
    assert record["exit_code"] == EXIT_CONFIG
    assert record["keys"] == ["master_seed"]
    assert not (tmp_path / QE_RUNS).exists()


def test_unknown_config_key_reports_path(tmp_path, capsys):
    config = write_config(tmp_path / "c.yaml", detector={"gain": 1.0})
    assert main(["characterize", "--config", config, "--out", str(tmp_path)]) == EXIT_CONFIG
    record = json.loads(capsys.readouterr().err.strip().splitlines()[-1])
    assert record["keys"] == ["detector.gain"]


def test_validate_appendix(tmp_path, capsys):
    assert main(["validate-appendix", "--seed", "0", "--out", str(tmp_path)]) == EXIT_OK
    report = read_report(tmp_path / APPENDIX_REPORT)["reports"]
    assert report["passed"] is True
    assert report["literal_anomaly"] is True
    assert "[validate-appendix]" in capsys.readouterr().out


def test_validate_appendix_single_variant(tmp_path):
    assert main(["validate-appendix", "--seed", "0", "--variant", "corrected", "--out", str(tmp_path)]) == EXIT_OK
    report = read_report(tmp_path / APPENDIX_REPORT)["reports"]
    assert list(report["max_abs_diff"]) == ["corrected"]


def test_dark_current_without_dark_rate(tmp_path):
    config = write_config(tmp_path / "c.yaml", exposure={"dark_rate_per_s": 0.0}, dark_current={"n_runs": 400})
    assert main(["dark-current", "--config", config, "--out", str(tmp_path)]) == EXIT_OK
    report = read_report(tmp_path / DARK_CURRENT_REPORT)["reports"]
    assert report["consistent_with_zero"] is True
    assert report["injected_dark_rate_per_s"] == 0.0
    rows, _ = read_table(tmp_path / DARK_CURRENT_SWEEP)
    assert [float(row["duration_s"]) for row in rows] == [0.5, 1.0, 2.0, 3.0]


def test_characterize_with_gaussian_model(tmp_path):
    assert main(["characterize", "--seed", "5", "--runs", "2000", "--model", "gaussian", "--out", str(tmp_path)]) == EXIT_OK
    report = read_report(tmp_path / "characterize_report.json")["reports"]
    assert report["f2_model"] == "gaussian_heuristic"
    assert report["runs_per_state"] == 2000
    assert report["poisson_fit_f1"]["estimate"] == pytest.approx(1.146, abs=0.15)
    assert report["reported_rule"] == {"threshold": 4, "fidelity": 0.72}


@pytest.mark.statistical
def test_validate_estimators(tmp_path):
    config = write_config(tmp_path / "c.yaml", estimators={"n_campaigns": 20000})
    assert main(["validate-estimators", "--config", config, "--out", str(tmp_path)]) == EXIT_OK
    report = read_report(tmp_path / ESTIMATOR_REPORT)["reports"]
    assert report["passed"] is True
    assert [row["p_detect"] for row in report["rows"]] == [0.2, 0.5, 0.8]


def test_rejects_bad_seed():
    with pytest.raises(UsageError) as info:
        build_parser().parse_args(["qe-sweep", "--seed", "-1"])
    assert info.value.keys == ["arguments"]


def test_bad_arguments_report_a_config_error_record(tmp_path, capsys):
    assert main(["qe-sweep", "--seed", "-1", "--out", str(tmp_path)]) == EXIT_CONFIG
    record = json.loads(capsys.readouterr().err.strip().splitlines()[-1])
    assert record["error"] == "UsageError"
    assert record["exit_code"] == EXIT_CONFIG
    assert record["keys"] == ["arguments"]
    assert "--seed" in record["message"]
    assert main(["no-such-command"]) == EXIT_CONFIG


def test_literal_alias_selects_the_literal_variant(tmp_path):
    assert main(["validate-appendix", "--seed", "0", "--variant", "paper-literal", "--out", str(tmp_path)]) == EXIT_OK
    report = read_report(tmp_path / APPENDIX_REPORT)["reports"]
    assert list(report["max_abs_diff"]) == ["literal"]


def test_exit_codes():
    assert exit_code_for(ConfigError("x")) == 2
    assert exit_code_for(SchemaVersionError("x")) == 2
    assert exit_code_for(ValidationFailure("x")) == 3
    assert exit_code_for(FileNotFoundError("x")) == 4
    assert exit_code_for(DomainError("x")) == 1
