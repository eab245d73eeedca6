"""Presenter layer: runs campaigns and validation suites, persists their results."""

import logging
from pathlib import Path
from typing import Any, Dict

from core.constants import (
    NOMINAL_FIDELITY,
    NOMINAL_THRESHOLD,
    PROVENANCE_MODEL,
)
from core.detector_model import discretized_gaussian, pmf_counts_given_state
from core.distributions import poisson_distribution
from core.exceptions import ConfigError, ValidationFailure
from core.inference import (
    analyze_qe_campaign,
    choose_threshold,
    empirical_decision_rule,
    fit_histogram_models,
    fit_rate,
    model_decision_rule,
)
from core.oracles import APPENDIX_COLUMNS, check_exp_integral, validate_appendix
from core.sequence_sim import (
    CAMPAIGN_DARK_CURRENT,
    CAMPAIGN_READOUT_NOISE,
    expected_detection_probabilities,
    rate_points,
    resolve_background_rate,
    run_dark_current_campaign,
    run_qe_campaign,
    run_readout_noise_campaign,
    simulate_conditional_histograms,
)
from core.validation import CALIBRATION_COLUMNS, validate_estimators
from models.experiment_config import SCHEMA_VERSION, ExperimentConfig
from models.params import HyperfineState
from storage.config_loader import apply_overrides, build_config, load_config, validate_config_data
from storage.datasets import write_report, write_runs, write_table

from .constants import (
    APPENDIX_GRID,
    APPENDIX_REPORT,
    CHARACTERIZE_HISTOGRAMS,
    CHARACTERIZE_REPORT,
    CMD_CHARACTERIZE,
    CMD_DARK_CURRENT,
    CMD_QE_SWEEP,
    CMD_READOUT_NOISE,
    CMD_VALIDATE_APPENDIX,
    CMD_VALIDATE_ESTIMATORS,
    DARK_CURRENT_REPORT,
    DARK_CURRENT_RUNS,
    DARK_CURRENT_SWEEP,
    ESTIMATOR_CALIBRATION,
    ESTIMATOR_REPORT,
    HISTOGRAM_COLUMNS,
    MODEL_CHOICES,
    QE_REPORT,
    QE_RUNS,
    QE_SWEEP,
    QE_SWEEP_COLUMNS,
    RATE_SWEEP_COLUMNS,
    READOUT_NOISE_REPORT,
    READOUT_NOISE_RUNS,
    READOUT_NOISE_SWEEP,
    VARIANT_CHOICES,
)

logger = logging.getLogger(__name__)


def config_from_args(args) -> ExperimentConfig:
    """Resolve the configuration file (or the defaults) and command-line overrides.

    Args:
        args: Parsed command-line namespace

    Returns:
        ExperimentConfig with its hash recomputed after overrides

    Raises:
        ConfigError: If no seed is available or a value violates the schema
    """
    if args.config is not None:
        config = load_config(args.config)
    else:
        if args.seed is None:
            raise ConfigError("master_seed is required (give --seed or a config file)", ["master_seed"])
        config = build_config(validate_config_data({"schema_version": SCHEMA_VERSION, "master_seed": args.seed}))
    return apply_overrides(
        config,
        master_seed=args.seed,
        n_runs=args.runs,
        f2_model=MODEL_CHOICES[args.model] if args.model else None,
        output_dir=args.out,
        workers=args.workers,
        variant=VARIANT_CHOICES[args.variant] if args.variant else None,
    )


class CampaignPresenter:
    """Mediates between ExperimentConfig (model) and the command-line view."""

    def __init__(self, config: ExperimentConfig, view):
        """Initialize presenter with configuration and view.

        Args:
            config: Resolved experiment configuration
            view: CLI view instance (must have show_status() and show_summary() methods)
        """
        self.config = config
        self.view = view
        self.handlers = {
            CMD_CHARACTERIZE: self.on_characterize,
            CMD_QE_SWEEP: self.on_qe_sweep,
            CMD_READOUT_NOISE: self.on_readout_noise,
            CMD_DARK_CURRENT: self.on_dark_current,
            CMD_VALIDATE_APPENDIX: self.on_validate_appendix,
            CMD_VALIDATE_ESTIMATORS: self.on_validate_estimators,
        }

    @property
    def output_dir(self) -> Path:
        """Return the directory results are written to."""
        return Path(self.config.output_dir)

    def provenance(self, command: str) -> Dict[str, Any]:
        """Return the provenance block embedded in every output file."""
        return {
            "schema_version": self.config.schema_version,
            "config_hash": self.config.config_hash,
            "master_seed": self.config.master_seed,
            "command": command,
        }

    def run_command(self, command: str) -> Dict[str, Any]:
        """Dispatch a subcommand and return its summary."""
        handler = self.handlers.get(command)
        if handler is None:
            raise ConfigError(f"unknown command {command!r}", ["command"])
        logger.info("%s: seed %d, config %s", command, self.config.master_seed, self.config.config_hash[:12])
        return handler()

    def on_characterize(self) -> Dict[str, Any]:
        """Simulate F1/F2 readouts, fit count models and choose thresholds."""
        config = self.config
        detector = config.detector
        hist1, hist2 = simulate_conditional_histograms(detector, config.characterize.n_runs, config.master_seed)
        poisson_fit, _ = fit_histogram_models(hist1)
        _, gauss_fit = fit_histogram_models(hist2)

        model_rule = model_decision_rule(detector, config.threshold)
        empirical_rule = empirical_decision_rule(hist1, hist2, config.threshold)
        fitted_pmf1 = poisson_distribution(poisson_fit.estimate)
        fitted_rule = None
        if gauss_fit.converged:
            fitted_pmf2 = discretized_gaussian(gauss_fit.estimate, gauss_fit.diagnostics["var"])
            fitted_rule = choose_threshold(fitted_pmf1, fitted_pmf2, PROVENANCE_MODEL)

        pmf1 = pmf_counts_given_state(HyperfineState.F1, detector)
        pmf2 = pmf_counts_given_state(HyperfineState.F2, detector)
        length = max(hist1.counts.size, hist2.counts.size, pmf1.masses.size, pmf2.masses.size)
        counts1, counts2 = hist1.padded(length), hist2.padded(length)
        model1, model2 = pmf1.padded(length), pmf2.padded(length)
        rows = [(n, counts1[n], counts2[n], model1[n], model2[n]) for n in range(length)]

        provenance = self.provenance(CMD_CHARACTERIZE)
        write_table(self.output_dir / CHARACTERIZE_HISTOGRAMS, HISTOGRAM_COLUMNS, rows, provenance)
        summary = {
            "f2_model": detector.f2_model,
            "runs_per_state": config.characterize.n_runs,
            "poisson_fit_f1": poisson_fit,
            "gaussian_fit_f2": gauss_fit,
            "model_rule": model_rule.to_record(),
            "empirical_rule": empirical_rule.to_record(),
            "fitted_form_rule": fitted_rule.to_record() if fitted_rule else None,
            "reported_rule": {"threshold": NOMINAL_THRESHOLD, "fidelity": NOMINAL_FIDELITY},
        }
        write_report(summary, self.output_dir / CHARACTERIZE_REPORT, provenance)
        self.view.show_summary(
            "characterize",
            {
                "mu (F1 fit)": f"{poisson_fit.estimate:.4f} +- {poisson_fit.std_error:.4f}",
                "model threshold / fidelity": f"{model_rule.threshold} / {model_rule.fidelity:.4f}",
                "empirical threshold / fidelity": f"{empirical_rule.threshold} / {empirical_rule.fidelity:.4f}",
            },
        )
        return summary

    def on_qe_sweep(self) -> Dict[str, Any]:
        """Run the QE sweep, estimate P(QJ) per setting and fit eta_QJ."""
        config = self.config
        campaign = config.qe_campaign()
        results = run_qe_campaign(campaign)
        rule = model_decision_rule(config.detector, config.threshold)
        analysis = analyze_qe_campaign(results, config.detector, rule, config.qe.nbar_rel_uncertainty, config.qe.estimator)

        rows = []
        for result, setting in zip(results, analysis.settings, strict=True):
            estimate = setting.threshold_estimate
            mixture = setting.mixture
            rows.append(
                (
                    result.setting_id,
                    setting.nbar,
                    config.qe.nbar_rel_uncertainty * setting.nbar,
                    setting.retained_runs,
                    setting.detections,
                    setting.p_detect,
                    estimate.estimate if estimate else None,
                    setting.threshold_std_error if estimate else None,
                    estimate.raw if estimate else None,
                    estimate.clamped if estimate else None,
                    mixture.estimate if mixture else None,
                    mixture.std_error if mixture else None,
                )
            )

        provenance = self.provenance(CMD_QE_SWEEP)
        write_runs(results, self.output_dir / QE_RUNS, provenance)
        write_table(self.output_dir / QE_SWEEP, QE_SWEEP_COLUMNS, rows, provenance)
        fit = analysis.saturation
        summary = {
            "eta_qj": fit,
            "injected_eta_qj": config.exposure.eta_qj,
            "probe_axis": config.probe_axis,
            "estimator": analysis.estimator,
            "rule": rule.to_record(),
            "settings": len(results),
            "empty_settings": sum(1 for r in results if r.is_empty),
        }
        write_report(summary, self.output_dir / QE_REPORT, provenance)
        self.view.show_summary(
            "qe-sweep",
            {
                "eta_QJ": f"{fit.estimate:.4e} +- {fit.std_error:.2e}",
                "injected": f"{config.exposure.eta_qj:.4e}",
                "chi2 / dof": f"{fit.objective:.2f} / {fit.diagnostics['dof']}",
            },
        )
        return summary

    def _rate_rows(self, results, expected):
        return [
            (r.setting_id, r.setting_value, r.retained_runs, r.detections, None if r.is_empty else r.detections / r.retained_runs, p)
            for r, p in zip(results, expected, strict=True)
        ]

    def on_readout_noise(self) -> Dict[str, Any]:
        """Sweep the readout duration and regress the false-positive rate."""
        config = self.config
        campaign = resolve_background_rate(config.readout_noise_campaign())
        results = run_readout_noise_campaign(campaign)
        threshold = results[0].threshold
        fit = fit_rate(rate_points(results))
        expected = expected_detection_probabilities(campaign, CAMPAIGN_READOUT_NOISE, threshold)

        t_rd = config.detector.readout_duration
        line_value = fit.diagnostics["intercept"] + fit.estimate * t_rd
        provenance = self.provenance(CMD_READOUT_NOISE)
        write_runs(results, self.output_dir / READOUT_NOISE_RUNS, provenance)
        write_table(self.output_dir / READOUT_NOISE_SWEEP, RATE_SWEEP_COLUMNS, self._rate_rows(results, expected), provenance)
        summary = {
            "readout_error_rate": fit,
            "threshold": threshold,
            "bg_rate_per_s": campaign.bg_rate,
            "target_readout_error_rate_per_s": campaign.readout_error_rate,
            "nominal_t_rd_s": t_rd,
            "false_positives_per_read_from_slope": fit.estimate * t_rd,
            "false_positives_per_read_from_line": line_value,
        }
        write_report(summary, self.output_dir / READOUT_NOISE_REPORT, provenance)
        self.view.show_summary(
            "readout-noise",
            {
                "readout error rate": f"{fit.estimate:.3f} +- {fit.std_error:.3f} counts/s",
                "per read at t_rd": f"{line_value:.4e}",
            },
        )
        return summary

    def on_dark_current(self) -> Dict[str, Any]:
        """Sweep the exposure duration and regress the dark jump rate."""
        config = self.config
        campaign = config.dark_current_campaign()
        results = run_dark_current_campaign(campaign)
        threshold = results[0].threshold
        rule = model_decision_rule(config.detector, threshold)
        points = rate_points(results)
        jump_fit = fit_rate(points, rule)
        detection_fit = fit_rate(points)
        expected = expected_detection_probabilities(campaign, CAMPAIGN_DARK_CURRENT, threshold)

        provenance = self.provenance(CMD_DARK_CURRENT)
        write_runs(results, self.output_dir / DARK_CURRENT_RUNS, provenance)
        write_table(self.output_dir / DARK_CURRENT_SWEEP, RATE_SWEEP_COLUMNS, self._rate_rows(results, expected), provenance)
        summary = {
            "dark_current": jump_fit,
            "detection_rate": detection_fit,
            "injected_dark_rate_per_s": config.exposure.dark_jump_rate,
            "consistent_with_zero": jump_fit.diagnostics["consistent_with_zero"],
            "rule": rule.to_record(),
        }
        write_report(summary, self.output_dir / DARK_CURRENT_REPORT, provenance)
        flag = " (consistent with zero)" if summary["consistent_with_zero"] else ""
        self.view.show_summary("dark-current", {"dark current": f"{jump_fit.estimate:.3e} +- {jump_fit.std_error:.1e} /s{flag}"})
        return summary

    def on_validate_appendix(self) -> Dict[str, Any]:
        """Compare the closed form with the brute-force oracle and check E_{-n}(z)."""
        check = validate_appendix(variants=self.config.appendix_variants)
        expint = check_exp_integral()
        provenance = self.provenance(CMD_VALIDATE_APPENDIX)
        write_table(self.output_dir / APPENDIX_GRID, APPENDIX_COLUMNS, check.rows, provenance)
        summary = {
            "max_abs_diff": check.max_abs_diff,
            "tolerance": check.tolerance,
            "passed": check.passed and expint.passed,
            "literal_anomaly": check.literal_anomaly,
            "literal_zero_masses": [{"p": p, "eta": eta, "value": value} for p, eta, value in check.literal_zero_masses],
            "exp_integral": {
                "recurrence": expint.recurrence,
                "quadrature": expint.quadrature,
                "incomplete_gamma": expint.incomplete_gamma,
                "tolerance": expint.tolerance,
            },
        }
        write_report(summary, self.output_dir / APPENDIX_REPORT, provenance)
        self.view.show_summary(
            "validate-appendix",
            {f"max |diff| {variant}": f"{diff:.3e}" for variant, diff in check.max_abs_diff.items()},
        )
        if not summary["passed"]:
            raise ValidationFailure(f"appendix checks exceed tolerance: {check.max_abs_diff}")
        return summary

    def on_validate_estimators(self) -> Dict[str, Any]:
        """Check the predicted estimator MSE against Monte Carlo campaigns at the default rule."""
        config = self.config
        settings = config.estimators
        rule = model_decision_rule(config.detector, config.threshold)
        calibration = validate_estimators(rule, config.master_seed, settings.p_detect, settings.n_campaigns, settings.n_runs, settings.tolerance)

        rows = [[getattr(row, column) for column in CALIBRATION_COLUMNS] for row in calibration.rows]
        provenance = self.provenance(CMD_VALIDATE_ESTIMATORS)
        write_table(self.output_dir / ESTIMATOR_CALIBRATION, CALIBRATION_COLUMNS, rows, provenance)
        summary = {
            "rule": rule.to_record(),
            "n_campaigns": calibration.n_campaigns,
            "n_runs": calibration.n_runs,
            "tolerance": calibration.tolerance,
            "passed": calibration.passed,
            "rows": [dict(zip(CALIBRATION_COLUMNS, row, strict=True)) for row in rows],
        }
        write_report(summary, self.output_dir / ESTIMATOR_REPORT, provenance)
        self.view.show_summary(
            "validate-estimators",
            {f"P(D)={row.p_detect:.2f}": f"rel. diff {row.relative_error:.3f}" for row in calibration.rows},
        )
        if not calibration.passed:
            raise ValidationFailure("empirical MSE differs from the predicted MSE beyond tolerance")
        return summary
