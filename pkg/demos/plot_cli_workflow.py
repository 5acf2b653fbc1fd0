"""
Command line workflow
=====================

The command line tool covers the whole loop: generate a synthetic system,
validate it, simulate it, price it and summarize the results. This script
drives the same entry point from Python in a temporary directory.
"""

import json
import tempfile
from pathlib import Path

from horizonpcm.cli import main

root = Path(tempfile.mkdtemp(prefix="horizonpcm-demo-"))
sysdir, run, rep = root / "system", root / "run", root / "report"

main(["synth", "--zones", "3", "--hours", "168", "--seed", "1", "--out", str(sysdir)])
main(["validate", str(sysdir)])
main(["run", str(sysdir), "--prices", "--out", str(run)])
main(["report", str(run), "--out", str(rep)])

summary = json.loads((rep / "summary.json").read_text())
print("total production cost:", round(summary["tpc_total"], 2))
print("curtailment %:", round(summary["curtailment_pct"], 3))
print("files:", sorted(p.name for p in rep.iterdir()))
