"""Trade tracking error for sparsity by sweeping the l1 weight."""
from dataclasses import replace
from pathlib import Path

import numpy as np

from cscontrol import SolverConfig, SparseController, build_lifted, load_config, run_closed_loop

exp = load_config(Path(__file__).resolve().parents[1] / "configs" / "baseline.toml")
lifted = build_lifted(exp.run.plant, exp.run.spec)

print(f"{'mu':>8} {'rms':>10} {'avg support':>12}")
for mu in (1e-4, 1e-3, 2e-3, 1e-2, 1e-1, 1.0):
    solver = replace(exp.solver, mu=mu)
    runs = [run_closed_loop(replace(exp.run, seed=s, controller=SparseController(solver)), lifted)
            for s in range(1, 6)]
    print(f"{mu:8.0e} {np.mean([r.rms for r in runs]):10.4f} "
          f"{np.mean([r.avg_sparsity for r in runs]):12.2f}")

# cold start spends its ten iterations climbing out of zero every period
cold = SolverConfig(mu=exp.solver.mu, iterations=10, warm_start=False)
r = run_closed_loop(replace(exp.run, controller=SparseController(cold)), lifted)
print(f"\ncold start at mu={cold.mu}: avg support {r.avg_sparsity:.1f}, rms {r.rms:.4f}")
