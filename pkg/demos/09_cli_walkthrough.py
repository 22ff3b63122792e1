"""Drive the command-line runner from Python: validate, run, read the CSVs.

Run: python3 demos/09_cli_walkthrough.py
Shell equivalent: lme-sim run configs/single_qubit_relax.json --out out/demo
"""
# %%
import csv
import json
import tempfile
from pathlib import Path

from localme.cli import main

config = Path(__file__).resolve().parent.parent / "configs" / "single_qubit_relax.json"
main(["list-scenarios"])
main(["validate", str(config)])

# %%
out = Path(tempfile.mkdtemp()) / "demo"
status = main(["run", str(config), "--out", str(out), "--seed", "7"])
manifest = json.loads((out / "manifest.json").read_text())
print("exit status", status, " files", manifest["files"])
print("summary", manifest["summary"])
with open(out / "single_qubit_relax_rho11.csv") as fh:
    rows = list(csv.reader(fh))
print(rows[0], rows[1], rows[-1])
