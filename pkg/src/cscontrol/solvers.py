"""Per-period control synthesis.

* :func:`fista` minimizes ``||Phi theta - alpha||^2 + mu ||theta||_1`` where the
  l1 norm of a complex vector is the sum of entry moduli.
* :func:`ridge` is the closed-form energy-regularized (L2-optimal) solution.
* :func:`truncate_top` keeps the largest-magnitude entries of a vector.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np
import scipy.linalg

from .model import SYMMETRY_TOL, is_conjugate_symmetric


@dataclass(frozen=True)
class SolverConfig:
    mu: float = 0.002
    iterations: int = 10
    lipschitz_safety: float = 1.01
    warm_start: bool = False
    zero_tol: float = 0.0

    def __post_init__(self):
        if self.mu < 0:
            raise ValueError(f"mu must be nonnegative, got {self.mu}")
        if int(self.iterations) != self.iterations or self.iterations < 1:
            raise ValueError(f"iterations must be a positive integer, got {self.iterations}")
        if self.lipschitz_safety < 1:
            raise ValueError(f"lipschitz_safety must be >= 1, got {self.lipschitz_safety}")
        if self.zero_tol < 0:
            raise ValueError(f"zero_tol must be nonnegative, got {self.zero_tol}")


@dataclass(frozen=True)
class ControlVector:
    """Basis coefficients ``theta[m + M]`` defining one period of input."""

    theta: np.ndarray
    zero_tol: float = 0.0

    def __post_init__(self):
        th = np.array(self.theta, dtype=complex).reshape(-1)
        th.setflags(write=False)
        object.__setattr__(self, "theta", th)

    @property
    def support_count(self) -> int:
        return int(np.count_nonzero(np.abs(self.theta) > self.zero_tol))

    @property
    def N(self) -> int:
        return self.theta.shape[0]

    @property
    def M(self) -> int:
        return (self.N - 1) // 2

    def is_conjugate_symmetric(self, tol: float = SYMMETRY_TOL) -> bool:
        return is_conjugate_symmetric(self.theta, tol)

    @classmethod
    def zeros(cls, N: int, zero_tol: float = 0.0) -> "ControlVector":
        return cls(np.zeros(N, dtype=complex), zero_tol)


def soft_threshold(v, tau: float):
    """Complex shrinkage ``v * max(1 - tau/|v|, 0)``; exactly zero when ``|v| <= tau``."""
    if tau < 0:
        raise ValueError(f"threshold must be nonnegative, got {tau}")
    v = np.asarray(v, dtype=complex)
    mag = np.abs(v)
    keep = mag > tau
    out = np.zeros_like(v)
    out[keep] = v[keep] * (1.0 - tau / mag[keep])
    return out[()] if out.ndim == 0 else out


def l1_objective(Phi, alpha, theta, mu: float) -> float:
    r = np.asarray(Phi) @ theta - alpha
    return float(np.vdot(r, r).real + mu * np.sum(np.abs(theta)))


def lipschitz_estimate(Phi, safety: float = 1.0, tol: float = 1e-6, max_iter: int = 10_000) -> float:
    """Upper estimate ``safety * 2 sigma_max(Phi)^2`` of the gradient Lipschitz constant.

    ``sigma_max^2`` comes from power iteration on ``Phi^H Phi`` with a fixed start
    vector, stopped once the eigen-residual ``||w - lam v||`` is below ``tol * lam``.
    """
    Phi = np.asarray(Phi)
    if not np.any(Phi):
        raise ValueError("Lipschitz constant undefined for a zero matrix")
    start = np.random.default_rng(0)
    v = start.standard_normal(Phi.shape[1]) + 1j * start.standard_normal(Phi.shape[1])
    v /= np.linalg.norm(v)
    lam = 0.0
    for _ in range(max_iter):
        w = Phi.conj().T @ (Phi @ v)
        lam = float(np.vdot(v, w).real)
        nrm = np.linalg.norm(w)
        if nrm == 0:
            # start vector in the null space; restart along a new direction
            v = start.standard_normal(Phi.shape[1]) + 0j
            v /= np.linalg.norm(v)
            continue
        if np.linalg.norm(w - lam * v) <= tol * lam:
            break
        v = w / nrm
    return 2.0 * lam * safety


def fista(Phi, alpha, cfg: SolverConfig, init: Optional[np.ndarray] = None,
          lipschitz: Optional[float] = None) -> ControlVector:
    """Run ``cfg.iterations`` FISTA steps on the l1-l2 objective.

    Starts from ``init`` when ``cfg.warm_start`` is set and an initial vector is
    given, otherwise from zero.
    """
    Phi = np.asarray(Phi, dtype=complex)
    alpha = np.asarray(alpha)
    K, N = Phi.shape
    if alpha.shape != (K,):
        raise ValueError(f"alpha must have length {K}, got shape {alpha.shape}")
    if cfg.warm_start and init is not None:
        x = np.array(init, dtype=complex).reshape(-1)
        if x.shape != (N,):
            raise ValueError(f"init must have length {N}, got {x.shape[0]}")
    else:
        x = np.zeros(N, dtype=complex)
    PhiH = Phi.conj().T

    if not np.any(x) and cfg.mu >= 2.0 * np.max(np.abs(PhiH @ alpha), initial=0.0):
        # zero satisfies the optimality condition
        return ControlVector(x, cfg.zero_tol)

    L = lipschitz if lipschitz is not None else lipschitz_estimate(Phi, cfg.lipschitz_safety)
    step = 1.0 / L
    tau = cfg.mu * step
    y = x.copy()
    s = 1.0
    for _ in range(cfg.iterations):
        grad = 2.0 * (PhiH @ (Phi @ y - alpha))
        x_new = soft_threshold(y - step * grad, tau)
        if not np.all(np.isfinite(x_new)):
            raise FloatingPointError("FISTA iterate became non-finite; Lipschitz constant underestimated")
        s_new = 0.5 * (1.0 + np.sqrt(1.0 + 4.0 * s * s))
        y = x_new + ((s - 1.0) / s_new) * (x_new - x)
        x, s = x_new, s_new
    return ControlVector(x, cfg.zero_tol)


def ridge_factor(G, mu2: float):
    """Cholesky factor of ``mu2 I + G^H G``, reusable across right-hand sides."""
    if not mu2 > 0:
        raise ValueError(f"mu2 must be positive, got {mu2}")
    G = np.asarray(G, dtype=complex)
    gram = G.conj().T @ G
    gram[np.diag_indices_from(gram)] += mu2
    return scipy.linalg.cho_factor(gram)


def ridge(G, rhs, mu2: float, factor=None, zero_tol: float = 0.0) -> ControlVector:
    """Solve ``(mu2 I + G^H G) theta = G^H rhs``."""
    G = np.asarray(G, dtype=complex)
    rhs = np.asarray(rhs)
    if rhs.shape != (G.shape[0],):
        raise ValueError(f"rhs must have length {G.shape[0]}, got shape {rhs.shape}")
    if factor is None:
        factor = ridge_factor(G, mu2)
    theta = scipy.linalg.cho_solve(factor, G.conj().T @ rhs)
    return ControlVector(theta, zero_tol)


def truncate_top(theta: ControlVector, s: int) -> ControlVector:
    """Keep the ``s`` largest-magnitude entries.

    Ties go to the smaller ``|m|``, then to the negative index.
    """
    N = theta.N
    if not 0 <= s <= N:
        raise ValueError(f"need 0 <= s <= {N}, got {s}")
    m = np.arange(N) - theta.M
    order = np.lexsort((m > 0, np.abs(m), -np.abs(theta.theta)))
    out = np.zeros(N, dtype=complex)
    keep = order[:s]
    out[keep] = theta.theta[keep]
    return ControlVector(out, theta.zero_tol)
