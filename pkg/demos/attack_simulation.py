"""
How much does a release help an attacker?
=========================================

Three attackers disable the top k elements of the real network. One guesses
at random, one ranks the released network and one knows the truth. A useful
release keeps the middle attacker close to random guessing.
"""

import numpy as np

from cinobf.attacks import FULLY_INFORMED, OBFUSCATED, RANDOM
from cinobf.benchmarks import dispatch_benchmark
from cinobf.network import PrivacyParams
from cinobf.pipeline import PipelineConfig, run_release_experiment

budgets = (10, 20, 30)
for pct in (1, 10):
    damage = {s: {b: [] for b in budgets} for s in (RANDOM, OBFUSCATED, FULLY_INFORMED)}
    for seed in range(50):
        G, inst = dispatch_benchmark(seed)
        config = PipelineConfig(input_path=None, privacy=PrivacyParams(1.0, 1.0, 0.1, 0.1, seed=seed),
                                budgets=budgets, runs=1, alpha_loc_pct=pct)
        rec = run_release_experiment(G, inst, config).records[0]
        for s in damage:
            for b in budgets:
                damage[s][b].append(rec["damages"][s][b])
    print(f"location radius {pct}% of the diameter (mean damage, $)")
    for s, by_budget in damage.items():
        row = "  ".join(f"b={b}%: {np.mean(d):7.2f}" for b, d in by_budget.items())
        print(f"  {s:>15}  {row}")
