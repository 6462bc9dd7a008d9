#!/usr/bin/env python3
"""
FPBZ Fingerprint Codec

Compresses fingerprint images into a handful of cubic Bezier curves per
print and reconstructs ridge images from them.

    python fpbz_codec.py compress print.pgm -o print.fbz
    python fpbz_codec.py evaluate print.pgm --out-dir results/
"""

import sys
import logging
from pathlib import Path
from typing import Optional

# Add the src directory to Python path
src_path = Path(__file__).parent
sys.path.insert(0, str(src_path))

LOG_LEVELS = [logging.WARNING, logging.INFO, logging.DEBUG]


def setup_logging(verbosity: int = 0, log_file: Optional[Path] = None):
    """Setup logging configuration.

    Results go to stdout, so the log is written to stderr (and optionally a file).
    """
    handlers = [logging.StreamHandler(sys.stderr)]
    if log_file is not None:
        handlers.append(logging.FileHandler(log_file))
    logging.basicConfig(
        level=LOG_LEVELS[min(verbosity, len(LOG_LEVELS) - 1)],
        format='%(asctime)s - %(name)s - %(levelname)s - %(message)s',
        handlers=handlers
    )


def main():
    """Main function to run the FPBZ codec command line."""
    try:
        from fpbz.cli import build_parser, run
    except ImportError as e:
        print(f"\n❌ Missing required package: {e}", file=sys.stderr)
        print("\nPlease install the required packages:", file=sys.stderr)
        print("  pip install -r requirements.txt", file=sys.stderr)
        sys.exit(1)

    args = build_parser().parse_args()
    setup_logging(args.verbose, args.log_file)
    logger = logging.getLogger(__name__)
    logger.info(f"Running {args.command}")

    sys.exit(run(args))


if __name__ == '__main__':
    main()
