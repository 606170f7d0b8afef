#!/usr/bin/env python3
"""
SAIQH time-scale toolkit entry point.

    python run.py simulate --config example_3_7
    python run.py certify --config example_3_7 --out certificate.txt
"""
import logging
import os
import sys

from dotenv import load_dotenv

# Load environment variables
load_dotenv()

from cli.app import main as cli_main  # noqa: E402


def setup_logging():
    """Configure logging for the application."""
    log_level = os.getenv('LOG_LEVEL', 'INFO').upper()

    handlers = [logging.StreamHandler(sys.stderr)]
    log_file = os.getenv('LOG_FILE')
    if log_file:
        handlers.append(logging.FileHandler(log_file, mode='a'))

    logging.basicConfig(
        level=getattr(logging, log_level, logging.INFO),
        format='%(asctime)s - %(name)s - %(levelname)s - %(message)s',
        handlers=handlers,
    )

    # Reduce noise from external libraries
    logging.getLogger('matplotlib').setLevel(logging.WARNING)


def main() -> int:
    """Main application entry point."""
    setup_logging()
    return cli_main(sys.argv[1:])


if __name__ == '__main__':
    sys.exit(main())
