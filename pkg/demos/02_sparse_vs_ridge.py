"""Sparse controller against the ridge baseline at matched packet size.

The sparse run fixes a per-period support size. The ridge solution is then cut
down to the same number of coefficients and re-simulated in closed loop.
"""
from dataclasses import replace
from pathlib import Path

import numpy as np

from cscontrol import RidgeController, compare_truncated, load_config, run_closed_loop

exp = load_config(Path(__file__).resolve().parents[1] / "configs" / "baseline.toml")

sparse = run_closed_loop(exp.run)
print(f"sparse:  rms {sparse.rms:.4f}, avg sparsity {sparse.avg_sparsity:.2f}")
print("support size, first periods:", sparse.sparsity[:12])

ridge_cfg = replace(exp.run, controller=RidgeController(exp.mu2))
truncated = compare_truncated(ridge_cfg, sparse.sparsity)
print(f"truncated ridge (mu2={exp.mu2}): rms {truncated.rms:.4g}, diverged={truncated.diverged}")

for mu2 in (1e-2, 1e-3, exp.mu2):
    r = run_closed_loop(replace(exp.run, controller=RidgeController(mu2)))
    status = f"diverged at period {r.diverged_at}" if r.diverged else f"rms {r.rms:.4f}"
    print(f"plain ridge mu2={mu2:g}: {status}")

print("\nerror per period (dB), sparse vs truncated")
for k in (0, 1, 2, 5, 10, 25, 50, 100):
    if k < len(truncated.errors):
        print(f"  k={k:3d}  {sparse.errors_db()[k]:8.2f}  {truncated.errors_db()[k]:8.2f}")
