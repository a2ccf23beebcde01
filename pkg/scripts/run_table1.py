"""Run the table1 pipeline with configs/table1.cfg and print the artifact paths.

Usage: python scripts/run_table1.py [--out DIR] [--seed N] [--jobs N]
"""

import sys
from pathlib import Path

from privpower.cli import main

CONFIG = Path(__file__).resolve().parent.parent / "configs" / "table1.cfg"

if __name__ == "__main__":
    sys.exit(main(["--config", str(CONFIG), "--out", "results/table1", *sys.argv[1:]]))
