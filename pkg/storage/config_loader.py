"""YAML configuration loading, schema validation and provenance hashing."""

import dataclasses
import hashlib
import json
import logging
from pathlib import Path
from typing import Any, Dict, List, Mapping, Optional, Union

import yaml
from jsonschema import Draft7Validator, validators

from core.constants import (
    F2_MODELS,
    PROBE_AXIS_ETA_QJ,
    VARIANTS,
)
from core.exceptions import ConfigError, DomainError, SchemaVersionError
from models.experiment_config import (
    SCHEMA_VERSION,
    CharacterizeSettings,
    DarkCurrentSettings,
    EstimatorValidationSettings,
    ExperimentConfig,
    QeSettings,
    ReadoutNoiseSettings,
)
from models.params import BranchingParams, CascadeParams, DetectorParams, ExposureParams

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]

SCHEMA_PATH = Path(__file__).with_name("config_schema.json")
NON_SEMANTIC_KEYS = ("config_hash", "output_dir", "workers")


def _is_strict_integer(checker, instance) -> bool:
    # YAML 300.0 is a float and must not pass as a run count
    return isinstance(instance, int) and not isinstance(instance, bool)


StrictValidator = validators.extend(
    Draft7Validator,
    type_checker=Draft7Validator.TYPE_CHECKER.redefine("integer", _is_strict_integer),
)


def load_schema() -> Dict[str, Any]:
    """Return the JSON Schema of the configuration document."""
    return json.loads(SCHEMA_PATH.read_text(encoding="utf-8"))


def _dotted(path, key: Optional[str] = None) -> str:
    parts = [str(p) for p in path if isinstance(p, str)]
    if key is not None:
        parts.append(key)
    return ".".join(parts)


def schema_violations(data: Any) -> Dict[str, List[str]]:
    """Return the dotted key paths breaking the schema, grouped as missing, unknown and invalid."""
    found: Dict[str, set] = {"missing": set(), "unknown": set(), "invalid": set()}
    for error in StrictValidator(load_schema()).iter_errors(data):
        if error.validator == "required":
            found["missing"].update(_dotted(error.absolute_path, k) for k in error.validator_value if k not in error.instance)
        elif error.validator == "additionalProperties":
            known = error.schema.get("properties", {})
            found["unknown"].update(_dotted(error.absolute_path, k) for k in error.instance if k not in known)
        else:
            found["invalid"].add(_dotted(error.absolute_path))
    return {kind: sorted(keys) for kind, keys in found.items()}


def validate_config_data(data: Any) -> Dict[str, Any]:
    """Check raw YAML data against the configuration schema.

    Args:
        data: Parsed YAML document

    Returns:
        The data as a dictionary

    Raises:
        ConfigError: If keys are unknown, missing or of the wrong type or range
        SchemaVersionError: If schema_version is not the supported one
    """
    if not isinstance(data, dict):
        raise ConfigError("configuration must be a mapping", [])
    violations = schema_violations(data)
    if violations["missing"]:
        raise ConfigError("missing required keys", violations["missing"])
    if violations["unknown"]:
        raise ConfigError("unknown keys", violations["unknown"])
    if violations["invalid"]:
        raise ConfigError("invalid values", violations["invalid"])
    if data["schema_version"] != SCHEMA_VERSION:
        raise SchemaVersionError(f"schema_version {data['schema_version']} is not supported (expected {SCHEMA_VERSION})", ["schema_version"])
    return data


def _section(data: Mapping, name: str) -> Dict[str, Any]:
    return dict(data.get(name) or {})


def _resolve_eta_qj(exposure: Mapping) -> float:
    """Return eta_qj from an explicit value, a branching decomposition or the probe-axis preset."""
    eta_qj = exposure.get("eta_qj")
    q = exposure.get("branching_q")
    eta_abs = exposure.get("eta_abs")
    if (q is None) != (eta_abs is None):
        raise ConfigError("branching_q and eta_abs must be given together", ["exposure.branching_q", "exposure.eta_abs"])
    if q is not None:
        try:
            branching = BranchingParams(q, eta_abs, eta_qj)
        except DomainError as exc:
            raise ConfigError(str(exc), ["exposure.eta_qj", "exposure.branching_q", "exposure.eta_abs"]) from exc
        if not branching.within_single_pass_bound:
            logger.warning("eta_qj=%g exceeds the single-pass bound q(1-q)=%g", branching.eta_qj, branching.single_pass_bound)
        return branching.eta_qj
    if eta_qj is not None:
        return float(eta_qj)
    return PROBE_AXIS_ETA_QJ[exposure.get("probe_axis", "axial")]


def build_config(data: Mapping) -> ExperimentConfig:
    """Build an ExperimentConfig from validated data, filling nominal defaults.

    Raises:
        ConfigError: If a value is outside its physical domain
    """
    detector_data = _section(data, "detector")
    exposure_data = _section(data, "exposure")
    try:
        defaults = DetectorParams()
        cascade = CascadeParams(
            scatter_survival=float(detector_data.get("scatter_survival", defaults.cascade.scatter_survival)),
            det_efficiency=float(detector_data.get("det_efficiency", defaults.cascade.det_efficiency)),
            bg_mean=float(detector_data.get("bg_mean_counts", defaults.cascade.bg_mean)),
        )
        detector = DetectorParams(
            cascade=cascade,
            f2_model=detector_data.get("f2_model", defaults.f2_model),
            gauss_mean=float(detector_data.get("gauss_mean_counts", defaults.gauss_mean)),
            gauss_var=float(detector_data.get("gauss_var_counts2", defaults.gauss_var)),
            readout_duration=float(detector_data.get("t_rd_s", defaults.readout_duration)),
            gauss_convolve_background=bool(detector_data.get("gauss_convolve_background", defaults.gauss_convolve_background)),
        )
        exposure_defaults = ExposureParams()
        exposure = ExposureParams(
            eta_qj=_resolve_eta_qj(exposure_data),
            dark_jump_rate=float(exposure_data.get("dark_rate_per_s", exposure_defaults.dark_jump_rate)),
            exposure_duration=float(exposure_data.get("t_exp_s", exposure_defaults.exposure_duration)),
            atom_loss_rate=float(exposure_data.get("loss_rate_per_s", exposure_defaults.atom_loss_rate)),
        )
    except DomainError as exc:
        raise ConfigError(str(exc), ["detector", "exposure"]) from exc
    if exposure.exceeds_single_pass_bound:
        logger.warning("eta_qj=%g exceeds the 1/4 single-pass bound", exposure.eta_qj)

    prep_error = float(exposure_data.get("prep_error", 0.0))

    qe_data = _section(data, "qe")
    qe_defaults = QeSettings()
    qe = QeSettings(
        n_runs=qe_data.get("n_runs", qe_defaults.n_runs),
        nbar_photons=tuple(float(v) for v in qe_data.get("nbar_photons", qe_defaults.nbar_photons)),
        nbar_rel_uncertainty=float(qe_data.get("nbar_rel_uncertainty", qe_defaults.nbar_rel_uncertainty)),
        nbar_calibration_jitter=float(qe_data.get("nbar_calibration_jitter", qe_defaults.nbar_calibration_jitter)),
        estimator=qe_data.get("estimator", qe_defaults.estimator),
    )
    rn_data = _section(data, "readout_noise")
    rn_defaults = ReadoutNoiseSettings()
    readout_noise = ReadoutNoiseSettings(
        n_runs=rn_data.get("n_runs", rn_defaults.n_runs),
        t_rd_s=tuple(float(v) for v in rn_data.get("t_rd_s", rn_defaults.t_rd_s)),
        t_wait_s=float(rn_data.get("t_wait_s", rn_defaults.t_wait_s)),
        bg_rate_per_s=None if rn_data.get("bg_rate_per_s") is None else float(rn_data["bg_rate_per_s"]),
        readout_error_rate_per_s=float(rn_data.get("readout_error_rate_per_s", rn_defaults.readout_error_rate_per_s)),
    )
    dc_data = _section(data, "dark_current")
    dc_defaults = DarkCurrentSettings()
    dark_current = DarkCurrentSettings(
        n_runs=dc_data.get("n_runs", dc_defaults.n_runs),
        t_exp_s=tuple(float(v) for v in dc_data.get("t_exp_s", dc_defaults.t_exp_s)),
    )
    est_data = _section(data, "estimators")
    est_defaults = EstimatorValidationSettings()
    estimators = EstimatorValidationSettings(
        n_campaigns=est_data.get("n_campaigns", est_defaults.n_campaigns),
        n_runs=est_data.get("n_runs", est_defaults.n_runs),
        p_detect=tuple(float(v) for v in est_data.get("p_detect", est_defaults.p_detect)),
        tolerance=float(est_data.get("tolerance", est_defaults.tolerance)),
    )
    characterize = CharacterizeSettings(n_runs=_section(data, "characterize").get("n_runs", CharacterizeSettings().n_runs))
    variants = tuple(_section(data, "appendix").get("variants", VARIANTS))

    threshold = _section(data, "decision").get("threshold")

    config = ExperimentConfig(
        master_seed=int(data["master_seed"]),
        detector=detector,
        exposure=exposure,
        probe_axis=exposure_data.get("probe_axis", "axial"),
        prep_error=prep_error,
        qe=qe,
        readout_noise=readout_noise,
        dark_current=dark_current,
        characterize=characterize,
        estimators=estimators,
        threshold=threshold,
        output_dir=str(data.get("output_dir", "results")),
        workers=int(data.get("workers", 1)),
        appendix_variants=variants,
    )
    return with_hash(config)


def config_to_dict(config: ExperimentConfig) -> Dict[str, Any]:
    """Return the resolved configuration as plain data.

    The hash, output directory and worker count are left out: they do not
    change any result.
    """
    data = dataclasses.asdict(config)
    for key in NON_SEMANTIC_KEYS:
        data.pop(key, None)
    return data


def config_hash(config: ExperimentConfig) -> str:
    """Return the SHA-256 of the canonical JSON of the resolved configuration."""
    canonical = json.dumps(config_to_dict(config), sort_keys=True, separators=(",", ":"), ensure_ascii=True)
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


def with_hash(config: ExperimentConfig) -> ExperimentConfig:
    """Return config with config_hash recomputed."""
    return dataclasses.replace(config, config_hash=config_hash(config))


def load_config(path: PathLike) -> ExperimentConfig:
    """Read, validate and resolve a YAML configuration file.

    Args:
        path: Configuration file

    Returns:
        ExperimentConfig with its config_hash set

    Raises:
        OSError: If the file cannot be read
        ConfigError: If the document is malformed or violates the schema
    """
    text = Path(path).read_text(encoding="utf-8")
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigError(f"cannot parse {path}: {exc}", []) from exc
    config = build_config(validate_config_data(data))
    logger.info("loaded %s (hash %s)", path, config.config_hash[:12])
    return config


def apply_overrides(
    config: ExperimentConfig,
    master_seed: Optional[int] = None,
    n_runs: Optional[int] = None,
    f2_model: Optional[str] = None,
    output_dir: Optional[str] = None,
    workers: Optional[int] = None,
    variant: Optional[str] = None,
) -> ExperimentConfig:
    """Return config with command-line overrides applied and the hash recomputed.

    Raises:
        ConfigError: If an override is out of range
    """
    changes: Dict[str, Any] = {}
    if master_seed is not None:
        if not 0 <= master_seed < 2**64:
            raise ConfigError("seed must be an unsigned 64-bit integer", ["master_seed"])
        changes["master_seed"] = master_seed
    if n_runs is not None:
        if n_runs < 1:
            raise ConfigError("runs must be at least 1", ["runs"])
        changes["qe"] = dataclasses.replace(config.qe, n_runs=n_runs)
        changes["readout_noise"] = dataclasses.replace(config.readout_noise, n_runs=n_runs)
        changes["dark_current"] = dataclasses.replace(config.dark_current, n_runs=n_runs)
        changes["characterize"] = dataclasses.replace(config.characterize, n_runs=n_runs)
    if f2_model is not None:
        if f2_model not in F2_MODELS:
            raise ConfigError(f"model must be one of {F2_MODELS}", ["model"])
        changes["detector"] = config.detector.with_f2_model(f2_model)
    if output_dir is not None:
        changes["output_dir"] = output_dir
    if workers is not None:
        if workers < 1:
            raise ConfigError("workers must be at least 1", ["workers"])
        changes["workers"] = workers
    if variant is not None:
        if variant not in VARIANTS:
            raise ConfigError(f"variant must be one of {VARIANTS}", ["variant"])
        changes["appendix_variants"] = (variant,)
    return with_hash(dataclasses.replace(config, **changes))
