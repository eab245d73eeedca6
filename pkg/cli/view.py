"""Command-line view (View layer in MVP): argument parsing, output and exit codes."""

import argparse
import json
import logging
import sys
from typing import Dict, List, Optional

from core.exceptions import ConfigError, UsageError, ValidationFailure

from .constants import (
    COMMANDS,
    EXIT_CONFIG,
    EXIT_ERROR,
    EXIT_IO,
    EXIT_VALIDATION,
    LOG_FORMAT,
    MODEL_CHOICES,
    VARIANT_CHOICES,
)

logger = logging.getLogger(__name__)

COMMAND_HELP = {
    "characterize": "simulate F1/F2 readouts, fit count models, choose the threshold",
    "qe-sweep": "run the quantum-efficiency sweep and fit eta_QJ",
    "readout-noise": "sweep the readout duration and fit the readout error rate",
    "dark-current": "sweep the exposure duration and fit the dark current",
    "validate-appendix": "check the closed form against brute-force oracles",
    "validate-estimators": "Monte Carlo check of the P(QJ) error formula",
}


def _u64(text: str) -> int:
    value = int(text)
    if not 0 <= value < 2**64:
        raise argparse.ArgumentTypeError(f"{text} is not an unsigned 64-bit integer")
    return value


def _positive_int(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"{text} must be at least 1")
    return value


class UsageErrorParser(argparse.ArgumentParser):
    """ArgumentParser that raises UsageError instead of printing usage and exiting."""

    def error(self, message):
        raise UsageError(f"{self.prog}: {message}", ["arguments"])


def build_parser() -> argparse.ArgumentParser:
    """Return the parser with one subcommand per campaign or validation suite."""
    common = UsageErrorParser(add_help=False)
    common.add_argument("--config", help="YAML configuration file")
    common.add_argument("--seed", type=_u64, help="master seed (overrides the config)")
    common.add_argument("--out", help="output directory (overrides the config)")
    common.add_argument("--runs", type=_positive_int, help="runs per setting (overrides the config)")
    common.add_argument("--model", choices=sorted(MODEL_CHOICES), help="F=2 readout model")
    common.add_argument("--variant", choices=sorted(VARIANT_CHOICES), help="appendix formula variant to validate")
    common.add_argument("--workers", type=_positive_int, help="worker processes")
    common.add_argument("-v", "--verbose", action="count", default=0, help="-v for INFO, -vv for DEBUG")

    parser = UsageErrorParser(prog="qjpd-sim", description="Quantum-jump photodetector simulator and analysis toolkit")
    subparsers = parser.add_subparsers(dest="command", required=True)
    for command in COMMANDS:
        subparsers.add_parser(command, parents=[common], help=COMMAND_HELP[command])
    return parser


def exit_code_for(exc: BaseException) -> int:
    """Map an exception to the process exit status."""
    if isinstance(exc, ConfigError):
        return EXIT_CONFIG
    if isinstance(exc, ValidationFailure):
        return EXIT_VALIDATION
    if isinstance(exc, OSError):
        return EXIT_IO
    return EXIT_ERROR


class CliView:
    """Text front end; results go to stdout, logs and error records to stderr."""

    def __init__(self, stdout=None, stderr=None):
        self.stdout = stdout or sys.stdout
        self.stderr = stderr or sys.stderr
        self.presenter = None
        self.parser = build_parser()

    def set_presenter(self, presenter):
        """Set the presenter for this view."""
        self.presenter = presenter

    def parse_args(self, argv: Optional[List[str]] = None) -> argparse.Namespace:
        """Parse command-line arguments."""
        return self.parser.parse_args(argv)

    def configure_logging(self, verbosity: int):
        """Configure the root logger once for the whole process."""
        level = logging.WARNING if verbosity <= 0 else (logging.INFO if verbosity == 1 else logging.DEBUG)
        logging.basicConfig(level=level, format=LOG_FORMAT, stream=self.stderr, force=True)

    def show_status(self, message: str):
        """Print a one-line status message."""
        print(message, file=self.stdout)

    def show_summary(self, title: str, values: Dict[str, str]):
        """Print a titled block of key/value lines."""
        self.show_status(f"[{title}]")
        for key, value in values.items():
            self.show_status(f"  {key}: {value}")

    def show_error(self, exc: BaseException) -> int:
        """Print a machine-readable error record and return the exit status."""
        code = exit_code_for(exc)
        record = {
            "error": type(exc).__name__,
            "message": str(exc),
            "exit_code": code,
            "keys": list(getattr(exc, "keys", []) or []),
        }
        print(json.dumps(record, sort_keys=True), file=self.stderr)
        if code == EXIT_ERROR:
            logger.debug("unhandled error", exc_info=exc)
        return code
