"""Lift the plant over one period and check the result two independent ways.

The lifted matrices turn a period of continuous-time dynamics into plain linear
algebra. Here we compare the Gram matrix against brute-force quadrature and the
one-period state map against the matrix exponential.
"""
import time

import numpy as np

from cscontrol import BasisSpec, build_lifted, default_plant
from cscontrol.lift import quadrature_gram_oracle

plant = default_plant()
spec = BasisSpec(2 * np.pi, 50)
print("plant poles:", np.linalg.eigvals(plant.A))

t0 = time.perf_counter()
lifted = build_lifted(plant, spec)
print(f"lifted N={spec.N} basis in {1e3 * (time.perf_counter() - t0):.1f} ms")
print("G:", lifted.G.shape, "H:", lifted.H.shape, "Z:", lifted.Z.shape)

oracle = quadrature_gram_oracle(plant, spec, points=20001)
print(f"max |G - Simpson quadrature|   = {np.max(np.abs(lifted.G - oracle)):.2e}")
lam, V = np.linalg.eig(plant.A)
diag = (V * np.exp(spec.T * lam)) @ np.linalg.inv(V)
print(f"max |A_d - V exp(T Lambda) V^-1| = {np.max(np.abs(lifted.A_d - diag)):.2e}")

# negative-frequency columns are conjugates of the positive ones
M = spec.M
print("G[:, -m] == conj(G[:, m]):", np.array_equal(lifted.G[:, :M], np.conj(lifted.G[:, :M:-1])))

# the non-minimum-phase zero makes G badly conditioned, which is why plain
# inversion (small ridge weight) is unstable
s = np.linalg.svd(lifted.G, compute_uv=False)
print(f"singular values of G: max {s[0]:.3g}, min {s[-1]:.3g}")
