"""
Selection percentages over 1000 trials
======================================

Reruns the Monte Carlo study for the three reference setups and prints
the estimate percentages next to the published ones. Takes a few seconds.
"""

import sys
from pathlib import Path

from finset_id import builtin_paper_config, run_montecarlo

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "tests"))
from table1_reference import HORIZONS, TABLE1  # noqa: E402

for e in (1, 2, 3):
    table = run_montecarlo(builtin_paper_config(e, seed=0))
    print(f"\nexperiment {e}")
    print("  T     mle (ours | published)             ols (ours | published)")
    for T in HORIZONS:
        cells = []
        for est in ("mle", "ols"):
            ours = "/".join(f"{table.pct(est, T, c):4.1f}" for c in range(3))
            ref = "/".join(f"{p:4.1f}" for p in TABLE1[est][e][T])
            cells.append(f"{ours} | {ref}")
        print(f"  {T:<5d} " + "   ".join(cells))
