"""
Running an experiment from the command line
===========================================

Writes a benchmark network to a JSON file, checks it, releases one obfuscated
copy and runs a short repeated experiment. The same steps work from a shell,
e.g. ``cinobf experiment grid.json --runs 50 --out report/``.
"""

import os
import tempfile

from cinobf.benchmarks import dispatch_benchmark
from cinobf.cli import main
from cinobf.io import save_network

work = tempfile.mkdtemp()
grid = os.path.join(work, "grid.json")
save_network(*dispatch_benchmark(seed=0), grid)

main(["validate", grid])
main(["obfuscate", grid, "--alpha-loc-pct", "10", "--seed", "1", "--out", os.path.join(work, "released.json")])
main(["experiment", grid, "--runs", "10", "--alpha-loc-pct", "10", "--out", os.path.join(work, "report")])

print("report files:", sorted(os.listdir(os.path.join(work, "report"))))
