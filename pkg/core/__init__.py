"""Core module for the quantum-jump photodetector simulator."""

import importlib

from .constants import (
    F2_MODEL_GAUSSIAN,
    F2_MODEL_MARKOV,
    VARIANT_CORRECTED,
    VARIANT_LITERAL,
    VARIANTS,
)
from .exceptions import (
    ConfigError,
    DegenerateDesignError,
    DomainError,
    EmptyHistogramError,
    ModelMismatchError,
    QjpdError,
    SchemaVersionError,
    UninformativeRuleError,
    UsageError,
    ValidationFailure,
)

# Lazy imports: models/* import core.constants, so only leaf modules load eagerly
_LAZY = {
    "exp_integral_neg_order": "core.special",
    "log_exp_integral_neg_order": "core.special",
    "pmf_detected_photons": "core.distributions",
    "pmf_counts_f2_closed_form": "core.distributions",
    "counts_f2_distribution": "core.distributions",
    "poisson_distribution": "core.distributions",
    "validate_appendix": "core.oracles",
    "pmf_counts_given_state": "core.detector_model",
    "sample_readout": "core.detector_model",
    "discretized_gaussian": "core.detector_model",
    "make_generator": "core.random_streams",
    "jump_probability": "core.sequence_sim",
    "run_single_sequence": "core.sequence_sim",
    "run_qe_campaign": "core.sequence_sim",
    "run_readout_noise_campaign": "core.sequence_sim",
    "run_dark_current_campaign": "core.sequence_sim",
    "choose_threshold": "core.inference",
    "infer_pqj": "core.inference",
    "mse_pqj": "core.inference",
    "fit_mixture": "core.inference",
    "fit_saturation": "core.inference",
    "fit_rate": "core.inference",
    "fit_histogram_models": "core.inference",
    "validate_estimators": "core.validation",
}

__all__ = [
    "F2_MODEL_GAUSSIAN",
    "F2_MODEL_MARKOV",
    "VARIANTS",
    "VARIANT_CORRECTED",
    "VARIANT_LITERAL",
    "ConfigError",
    "DegenerateDesignError",
    "DomainError",
    "EmptyHistogramError",
    "ModelMismatchError",
    "QjpdError",
    "SchemaVersionError",
    "UninformativeRuleError",
    "UsageError",
    "ValidationFailure",
    *_LAZY,
]


def __getattr__(name):
    """Lazy import of core module components."""
    module = _LAZY.get(name)
    if module is None:
        raise AttributeError(f"module {__name__!r} has no attribute {name!r}")
    return getattr(importlib.import_module(module), name)
