"""Run ``cli.main`` from a source checkout; installs get the ``phi-orbits`` console script."""

import sys

from cli import main

if __name__ == "__main__":
    sys.exit(main())
