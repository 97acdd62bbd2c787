#!/usr/bin/env python3
"""Run the built-in demonstration config and leave artifacts in demo_out/.

Forwards any extra arguments to the demo verb, so the usual flags work:

    python3 scripts/run_demo.py --out /tmp/demo --format json --seed 7
"""

import sys

from circumproj.cli import main

if __name__ == "__main__":
    sys.exit(main(["demo", *sys.argv[1:]]))
