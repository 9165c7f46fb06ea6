"""Driving the ``qttn-bench`` command line from Python.

Writes a small grid file into a temporary directory, runs it, then
prints the energy-above-best / speedup report and verifies one point
against exact diagonalization.  The same steps from a shell::

    qttn-bench grid --config grid.json --out records.jsonl
    qttn-bench report records.jsonl --baseline N4-chi16-DDDDDD-optimized-t1
    qttn-bench verify --config point.json
"""

import json
import tempfile
from pathlib import Path

from qttn.bench.cli import main

with tempfile.TemporaryDirectory() as tmp:
    tmp = Path(tmp)
    grid = {"schema_version": 1, "N": 4, "chi": [4, 16], "pattern": ["DDDDDD", "SSSSDD"], "skip_ergt": [False, True],
            "threads": 1}
    (tmp / "grid.json").write_text(json.dumps(grid, indent=2))
    records = tmp / "records.jsonl"
    main(["grid", "--config", str(tmp / "grid.json"), "--out", str(records)])

    main(["report", str(records), "--baseline", "N4-chi16-DDDDDD-optimized-t1", "--out", str(tmp / "summary")])
    print((tmp / "summary.plot.csv").read_text())

    point = {"N": 2, "chi": 16, "pattern": "DDDDDD", "verify_tolerance": 1e-9}
    (tmp / "point.json").write_text(json.dumps(point))
    main(["verify", "--config", str(tmp / "point.json")])
