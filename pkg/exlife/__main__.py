"""Run exlife as ``python -m exlife``."""

import sys

from .cli import main

sys.exit(main())
