import json
import math
from pathlib import Path

import pytest
import yaml

from core.exceptions import ConfigError, DomainError, SchemaVersionError
from models.experiment_config import default_qe_sweep
from models.outcomes import RunOutcome, SettingResult
from models.reports import FitReport
from storage.config_loader import apply_overrides, build_config, config_hash, load_config, validate_config_data
from storage.datasets import RUN_COLUMNS, read_report, read_runs, read_table, write_records, write_report, write_runs, write_table

DEFAULT_CONFIG = Path(__file__).resolve().parent.parent / "config" / "default.yaml"


def write_yaml(path, data):
    path.write_text(yaml.safe_dump(data), encoding="utf-8")
    return path


def test_default_config_loads():
    config = load_config(DEFAULT_CONFIG)
    assert config.master_seed == 20240601
    assert config.detector.bg_mean == 1.146
    assert config.exposure.eta_qj == 2.9e-3
    assert len(config.qe.nbar_photons) == 10
    assert len(config.config_hash) == 64


def test_missing_seed_is_named(tmp_path):
    with pytest.raises(ConfigError) as info:
        load_config(write_yaml(tmp_path / "c.yaml", {"schema_version": 1}))
    assert info.value.keys == ["master_seed"]


def test_unknown_keys_are_listed_with_paths(tmp_path):
    data = {"schema_version": 1, "master_seed": 1, "detector": {"gain": 2.0}, "colour": "blue"}
    with pytest.raises(ConfigError) as info:
        load_config(write_yaml(tmp_path / "c.yaml", data))
    assert info.value.keys == ["colour", "detector.gain"]


def test_wrong_types_are_listed():
    with pytest.raises(ConfigError) as info:
        validate_config_data({"schema_version": 1, "master_seed": 1, "qe": {"n_runs": "many"}, "workers": True})
    assert info.value.keys == ["qe.n_runs", "workers"]


def test_out_of_range_values_are_listed():
    data = {"schema_version": 1, "master_seed": 1, "detector": {"scatter_survival": 1.5}, "exposure": {"prep_error": -0.1}}
    with pytest.raises(ConfigError) as info:
        validate_config_data(data)
    assert info.value.keys == ["detector.scatter_survival", "exposure.prep_error"]


def test_float_run_counts_are_rejected():
    with pytest.raises(ConfigError) as info:
        validate_config_data({"schema_version": 1, "master_seed": 1, "readout_noise": {"n_runs": 300.0}})
    assert info.value.keys == ["readout_noise.n_runs"]


def test_readout_error_rate_target_is_read():
    config = build_config({"schema_version": 1, "master_seed": 1, "readout_noise": {"readout_error_rate_per_s": 30.0}})
    assert config.readout_noise_campaign().readout_error_rate == 30.0
    with pytest.raises(ConfigError):
        validate_config_data({"schema_version": 1, "master_seed": 1, "readout_noise": {"readout_error_rate_per_s": 0.0}})


def test_schema_version_mismatch():
    with pytest.raises(SchemaVersionError):
        validate_config_data({"schema_version": 2, "master_seed": 1})


def test_unparseable_yaml(tmp_path):
    path = tmp_path / "bad.yaml"
    path.write_text("detector: [unclosed", encoding="utf-8")
    with pytest.raises(ConfigError):
        load_config(path)


def test_probe_axis_and_branching_resolve_eta_qj():
    transverse = build_config({"schema_version": 1, "master_seed": 1, "exposure": {"probe_axis": "transverse"}})
    assert transverse.exposure.eta_qj == 1.6e-3
    branched = build_config({"schema_version": 1, "master_seed": 1, "exposure": {"branching_q": 0.5, "eta_abs": 0.01}})
    assert branched.exposure.eta_qj == pytest.approx(0.005)
    with pytest.raises(ConfigError):
        build_config({"schema_version": 1, "master_seed": 1, "exposure": {"branching_q": 0.5}})


def test_hash_ignores_output_dir_and_workers():
    config = build_config({"schema_version": 1, "master_seed": 9})
    moved = apply_overrides(config, output_dir="elsewhere", workers=4)
    assert moved.config_hash == config.config_hash
    assert apply_overrides(config, master_seed=10).config_hash != config.config_hash
    assert config_hash(config) == config.config_hash


def test_overrides():
    config = build_config({"schema_version": 1, "master_seed": 9})
    changed = apply_overrides(config, n_runs=40, f2_model="gaussian_heuristic", variant="literal")
    assert changed.qe.n_runs == changed.dark_current.n_runs == changed.characterize.n_runs == 40
    assert changed.detector.is_gaussian
    assert changed.appendix_variants == ("literal",)
    with pytest.raises(ConfigError):
        apply_overrides(config, master_seed=-1)


def test_runs_survive_a_write_read_cycle(tmp_path):
    outcomes = [RunOutcome(i % 3 == 0, i % 7, i != 4, i) for i in range(10)]
    results = [SettingResult(0, 1e-3, "s", outcomes, threshold=2), SettingResult(1, 2e-3, "s", outcomes[:3], threshold=2)]
    path = write_runs(results, tmp_path / "runs.csv", {"schema_version": 1, "config_hash": "abc", "master_seed": 5})
    records, provenance = read_runs(path)
    assert records == [record for result in results for record in result.to_records()]
    assert provenance == {"schema_version": "1", "config_hash": "abc", "master_seed": "5"}
    header = [line for line in path.read_text().splitlines() if not line.startswith("#")][0]
    assert header.split(",") == RUN_COLUMNS


def test_logspaced_setting_values_read_back_exactly(tmp_path):
    sweep = default_qe_sweep()
    results = [SettingResult(i, value, "photons", [RunOutcome(True, 3, True, 0)], threshold=4) for i, value in enumerate(sweep)]
    records, _ = read_runs(write_runs(results, tmp_path / "runs.csv", {}))
    assert [record.setting_value for record in records] == list(sweep)
    assert records == [record for result in results for record in result.to_records()]


def test_duplicate_run_keys_are_rejected(tmp_path):
    records = SettingResult(0, 1.0, "s", [RunOutcome(False, 0, True, 0), RunOutcome(False, 1, True, 0)]).to_records()
    with pytest.raises(DomainError):
        write_records(records, tmp_path / "dup.csv", {})


def test_table_values_are_formatted(tmp_path):
    path = tmp_path / "t.csv"
    write_table(path, ["a", "b", "c"], [(True, 0.1 + 0.2, None)], {"command": "x"})
    rows, provenance = read_table(path)
    assert rows == [{"a": "true", "b": "0.30000000000000004", "c": ""}]
    assert provenance == {"command": "x"}


def test_report_encodes_non_finite_values(tmp_path):
    report = FitReport(1.5, math.inf, 3, math.nan, False, {"flag": True})
    path = write_report({"fit": report, "limit": -math.inf}, tmp_path / "r.json", {"master_seed": 1})
    document = read_report(path)
    assert document["reports"]["fit"]["std_error"] == "inf"
    assert document["reports"]["fit"]["objective"] == "nan"
    assert document["reports"]["limit"] == "-inf"
    assert document["provenance"] == {"master_seed": 1}
    assert json.loads(path.read_text()) == document
