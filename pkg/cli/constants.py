"""CLI-specific constants for the quantum-jump photodetector simulator."""

# Subcommands
CMD_CHARACTERIZE = "characterize"
CMD_QE_SWEEP = "qe-sweep"
CMD_READOUT_NOISE = "readout-noise"
CMD_DARK_CURRENT = "dark-current"
CMD_VALIDATE_APPENDIX = "validate-appendix"
CMD_VALIDATE_ESTIMATORS = "validate-estimators"
COMMANDS = [
    CMD_CHARACTERIZE,
    CMD_QE_SWEEP,
    CMD_READOUT_NOISE,
    CMD_DARK_CURRENT,
    CMD_VALIDATE_APPENDIX,
    CMD_VALIDATE_ESTIMATORS,
]

# Exit codes
EXIT_OK = 0
EXIT_ERROR = 1
EXIT_CONFIG = 2
EXIT_VALIDATION = 3
EXIT_IO = 4

# Command-line spellings mapped to internal names
MODEL_CHOICES = {
    "markov": "markov",
    "gaussian": "gaussian_heuristic",
}
VARIANT_CHOICES = {
    "corrected": "corrected",
    "literal": "literal",
    "paper-literal": "literal",
}

# Logging
LOG_FORMAT = "%(asctime)s %(levelname)s %(name)s: %(message)s"

# Output files
CHARACTERIZE_HISTOGRAMS = "characterize_histograms.csv"
CHARACTERIZE_REPORT = "characterize_report.json"
QE_RUNS = "qe_runs.csv"
QE_SWEEP = "qe_sweep.csv"
QE_REPORT = "qe_report.json"
READOUT_NOISE_RUNS = "readout_noise_runs.csv"
READOUT_NOISE_SWEEP = "readout_noise_sweep.csv"
READOUT_NOISE_REPORT = "readout_noise_report.json"
DARK_CURRENT_RUNS = "dark_current_runs.csv"
DARK_CURRENT_SWEEP = "dark_current_sweep.csv"
DARK_CURRENT_REPORT = "dark_current_report.json"
APPENDIX_GRID = "appendix_grid.csv"
APPENDIX_REPORT = "appendix_report.json"
ESTIMATOR_CALIBRATION = "estimator_calibration.csv"
ESTIMATOR_REPORT = "estimator_report.json"

# CSV schemas
HISTOGRAM_COLUMNS = ["n_c", "count_f1", "count_f2", "model_f1", "model_f2"]
QE_SWEEP_COLUMNS = [
    "setting_id",
    "nbar_photons",
    "x_err",
    "retained_runs",
    "detections",
    "p_detect",
    "pqj",
    "y_err",
    "pqj_raw",
    "clamped",
    "mixture_w",
    "mixture_err",
]
RATE_SWEEP_COLUMNS = ["setting_id", "duration_s", "retained_runs", "detections", "p_detect", "expected_p_detect"]
