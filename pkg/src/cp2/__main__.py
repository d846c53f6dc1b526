"""Module entry point: ``python -m cp2``."""

import sys

from .cli import main

sys.exit(main())
