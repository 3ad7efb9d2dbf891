import argparse
import sys
from typing import List, Optional

from mtrd import __version__
from mtrd.cli import region, simulate, spectrum
from mtrd.cli.deps import report_error
from mtrd.core.exceptions import MTRDError
from mtrd.core.logging import configure_logging


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mtrd",
        description="Multiterminal rate-distortion regions, information spectra and binning experiments",
    )
    parser.add_argument("--version", action="version", version=f"mtrd {__version__}")
    parser.add_argument("--log", default=None, help="log level (default from MTRD_LOG)")
    parser.add_argument("--log-format", choices=["console", "json"], default=None)
    subparsers = parser.add_subparsers(dest="command", required=True)

    spectrum.register(subparsers)
    region.register(subparsers)
    simulate.register(subparsers)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    args = build_parser().parse_args(argv)
    configure_logging(args.log, args.log_format)
    try:
        return args.handler(args, argv)
    except MTRDError as exc:
        return report_error(exc)


if __name__ == "__main__":
    sys.exit(main())
