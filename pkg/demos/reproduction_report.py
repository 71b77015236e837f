"""Run every reference check and write CSV series and SVG charts.

Equivalent to ``arimoto-speed reproduce all --csv out --svg out``. Anchors
that fail are explained in the README under known discrepancies.

    python3 demos/reproduction_report.py [output-dir]
"""

import sys
from pathlib import Path

from arimoto_speed.cli import main

out = Path(sys.argv[1] if len(sys.argv) > 1 else "reproduction_output")
out.mkdir(parents=True, exist_ok=True)
code = main(["reproduce", "all", "--csv", str(out), "--svg", str(out), "--out", str(out / "summary.json")])
print(f"exit code {code}; series and charts in {out}/")
