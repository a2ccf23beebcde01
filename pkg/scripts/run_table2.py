"""Run the table2 pipeline with configs/table2.cfg and print the artifact paths.

Usage: python scripts/run_table2.py [--out DIR] [--seed N] [--jobs N]
"""

import sys
from pathlib import Path

from privpower.cli import main

CONFIG = Path(__file__).resolve().parent.parent / "configs" / "table2.cfg"

if __name__ == "__main__":
    sys.exit(main(["--config", str(CONFIG), "--out", "results/table2", *sys.argv[1:]]))
