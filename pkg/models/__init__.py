"""Domain types for the quantum-jump photodetector simulator."""

from .experiment_config import CampaignConfig, ExperimentConfig, SequenceConfig
from .outcomes import RunOutcome, RunRecord, SettingResult
from .params import BranchingParams, CascadeParams, DetectorParams, ExposureParams, HyperfineState
from .pmf import CountHistogram, Pmf
from .reports import CalibrationRow, DecisionRule, FitReport, PqjEstimate, QeAnalysis, QeSettingEstimate, RatePoint, SaturationPoint

__all__ = [
    "BranchingParams",
    "CalibrationRow",
    "CampaignConfig",
    "CascadeParams",
    "CountHistogram",
    "DecisionRule",
    "DetectorParams",
    "ExperimentConfig",
    "ExposureParams",
    "FitReport",
    "HyperfineState",
    "Pmf",
    "PqjEstimate",
    "QeAnalysis",
    "QeSettingEstimate",
    "RatePoint",
    "RunOutcome",
    "RunRecord",
    "SaturationPoint",
    "SequenceConfig",
    "SettingResult",
]
