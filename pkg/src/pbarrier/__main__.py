"""Entry point for python -m pbarrier

This module allows running the CLI as:
    python -m pbarrier
"""

import sys

from pbarrier.cli import main

if __name__ == "__main__":
    sys.exit(main() or 0)
