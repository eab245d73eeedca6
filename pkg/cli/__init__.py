"""CLI module for the quantum-jump photodetector simulator."""

from .presenter import CampaignPresenter, config_from_args
from .view import CliView, build_parser

__all__ = ["CampaignPresenter", "CliView", "build_parser", "config_from_args"]
