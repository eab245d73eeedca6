"""Main entry point for the quantum-jump photodetector simulator."""

import sys
from typing import List, Optional

from cli.constants import EXIT_OK
from cli.presenter import CampaignPresenter, config_from_args
from cli.view import CliView


def main(argv: Optional[List[str]] = None) -> int:
    """Run one subcommand and return the process exit status."""
    # Create MVP components
    view = CliView()

    try:
        args = view.parse_args(argv)
        view.configure_logging(args.verbose)
        config = config_from_args(args)
        presenter = CampaignPresenter(config, view)
        view.set_presenter(presenter)
        presenter.run_command(args.command)
    except Exception as exc:
        return view.show_error(exc)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
