"""Constants for the quantum-jump photodetector simulator."""

# Hyperfine states
STATE_F1 = "F1"
STATE_F2 = "F2"

# F=2 readout models
F2_MODEL_MARKOV = "markov"
F2_MODEL_GAUSSIAN = "gaussian_heuristic"
F2_MODELS = [F2_MODEL_MARKOV, F2_MODEL_GAUSSIAN]

# Appendix formula variants
VARIANT_CORRECTED = "corrected"
VARIANT_LITERAL = "literal"
VARIANTS = [VARIANT_CORRECTED, VARIANT_LITERAL]

# Exponential integral evaluation routes
EXPINT_FINITE_SUM = "finite_sum"
EXPINT_INCOMPLETE_GAMMA = "incomplete_gamma"

# Closed-form evaluation methods reported in diagnostics
METHOD_CLOSED_FORM = "closed_form"
METHOD_DIRECT_SUM = "direct_sum"

# Pmf truncation
DEFAULT_TAIL_CUTOFF = 1e-12
MAX_PMF_TERMS = 100_000

# Closed form is abandoned when its estimated absolute error exceeds this
CLOSED_FORM_ABS_TOLERANCE = 1e-8

# Brute-force oracle truncation
ORACLE_TAIL_CUTOFF = 1e-14

# Appendix validation grid
APPENDIX_GRID_P = [0.3, 0.7, 0.95]
APPENDIX_GRID_ETA = [0.01, 0.1, 0.5]
APPENDIX_GRID_MU = [0.5, 1.146, 3.0]
APPENDIX_MAX_COUNT = 30
APPENDIX_TOLERANCE = 1e-10

# Exponential integral cross-checks
EXPINT_CHECK_MAX_ORDER = 50
EXPINT_CHECK_Z = [0.1, 0.5, 1.0, 2.0, 5.0, 10.0, 20.0, 50.0]
EXPINT_QUADRATURE_ORDERS = [0, 1, 2, 5, 10, 20, 30, 40, 50]
EXPINT_RELATIVE_TOLERANCE = 1e-10

# Measured figures used as defaults
NOMINAL_BG_MEAN = 1.146
NOMINAL_GAUSS_MEAN = 5.9
NOMINAL_GAUSS_VAR = 17.6
NOMINAL_THRESHOLD = 4
NOMINAL_FIDELITY = 0.72
ETA_QJ_AXIAL = 2.9e-3
ETA_QJ_TRANSVERSE = 1.6e-3
NOMINAL_DARK_RATE = 9e-3
NOMINAL_READOUT_ERROR_RATE = 18.0
NOMINAL_READOUT_DURATION = 1e-3
NOMINAL_EXPOSURE_DURATION = 10e-3
NOMINAL_IDLE_WAIT = 37e-3

# Cascade defaults chosen so that mu + eta / (1 - p) matches the Gaussian heuristic mean
DEFAULT_SCATTER_SURVIVAL = 0.995
DEFAULT_DET_EFFICIENCY = 0.0238
DEFAULT_ATOM_LOSS_RATE = 0.1

# Single-pass bound on the jump efficiency for 1:1 branching
SINGLE_PASS_BOUND = 0.25

# Probe axis presets
PROBE_AXIS_AXIAL = "axial"
PROBE_AXIS_TRANSVERSE = "transverse"
PROBE_AXIS_ETA_QJ = {
    PROBE_AXIS_AXIAL: ETA_QJ_AXIAL,
    PROBE_AXIS_TRANSVERSE: ETA_QJ_TRANSVERSE,
}

# Decision-rule provenance
PROVENANCE_MODEL = "model"
PROVENANCE_EMPIRICAL = "empirical"

# QE estimators
ESTIMATOR_THRESHOLD = "threshold"
ESTIMATOR_MIXTURE = "mixture"
ESTIMATORS = [ESTIMATOR_THRESHOLD, ESTIMATOR_MIXTURE]

# Mixture fit criteria
MIXTURE_MLE = "mle"
MIXTURE_LEAST_SQUARES = "least_squares"

# Gaussian histogram fit methods
GAUSS_FIT_MLE = "mle"
GAUSS_FIT_MOMENTS = "moments"

# A rate estimate is "consistent with zero" within this many standard errors
ZERO_RATE_SIGMAS = 3.0

# Setting units
UNIT_PHOTONS = "photons"
UNIT_SECONDS = "s"
