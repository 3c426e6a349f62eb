"""Allow ``python -m persistence_templates``."""

import sys

from .cli import main

if __name__ == "__main__":
    sys.exit(main())
