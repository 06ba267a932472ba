"""``python -m mopkit``."""

import sys

from mopkit.cli import main

sys.exit(main())
