"""Track a constant reference. A single coefficient (m = 0) should suffice."""
from dataclasses import replace

import numpy as np

from cscontrol import (BasisSpec, RunConfig, SolverConfig, SparseController, default_plant,
                       reference_from_step, run_closed_loop)

spec = BasisSpec(2 * np.pi, 50)
cfg = RunConfig(plant=default_plant(), spec=spec, reference=reference_from_step(1.0, spec),
                controller=SparseController(SolverConfig(mu=0.002, warm_start=True)),
                K=33, periods=60, seed=2)
r = run_closed_loop(cfg)
print("support size per period:", r.sparsity[::5])
print(f"final error {r.errors[-1]:.3e}, rms {r.rms:.4f}")
last = r.thetas[-1]
nz = np.flatnonzero(last)
print("final nonzero indices m:", (nz - spec.M).tolist())
print("dc gain of the plant:", float(-default_plant().c @ np.linalg.solve(default_plant().A, default_plant().b)))
print(f"steady input level theta_0 / sqrt(T) = {last[spec.M].real / np.sqrt(spec.T):.4f}")
