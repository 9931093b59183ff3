"""Random row selection for compressive sampling.

A selector picks ``K`` of the ``N`` Nyquist grid points; applying it to a
matrix keeps those rows, which is the product ``U X`` with the 0/1 matrix
``U`` never formed. Row indices are zero-based.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np


def make_rng(seed: int) -> np.random.Generator:
    """PCG64 generator; the seed is the only state that must be recorded."""
    return np.random.Generator(np.random.PCG64(int(seed)))


@dataclass(frozen=True)
class SampleSelector:
    indices: tuple[int, ...]
    N: int

    def __post_init__(self):
        idx = tuple(int(i) for i in self.indices)
        if not 1 <= len(idx) <= self.N:
            raise ValueError(f"need 1 <= K <= N, got K={len(idx)}, N={self.N}")
        if any(b <= a for a, b in zip(idx, idx[1:])):
            raise ValueError("selector indices must be strictly increasing")
        if idx[0] < 0 or idx[-1] >= self.N:
            raise ValueError(f"selector indices must lie in [0, {self.N})")
        object.__setattr__(self, "indices", idx)

    @property
    def K(self) -> int:
        return len(self.indices)

    def matrix(self) -> np.ndarray:
        """The explicit ``K x N`` selection matrix (for checks only)."""
        U = np.zeros((self.K, self.N))
        U[np.arange(self.K), self.indices] = 1.0
        return U


def full_selector(N: int) -> SampleSelector:
    return SampleSelector(tuple(range(N)), N)


def draw_selector(rng: np.random.Generator, N: int, K: int) -> SampleSelector:
    """Draw ``K`` distinct rows uniformly by a partial Fisher-Yates shuffle."""
    if not 1 <= K <= N:
        raise ValueError(f"need 1 <= K <= N, got K={K}, N={N}")
    pool = list(range(N))
    for i in range(K):
        j = int(rng.integers(i, N))
        pool[i], pool[j] = pool[j], pool[i]
    return SampleSelector(tuple(sorted(pool[:K])), N)


def select_rows(sel: SampleSelector, X):
    X = np.asarray(X)
    if X.shape[0] != sel.N:
        raise ValueError(f"expected {sel.N} rows, got {X.shape[0]}")
    return X[list(sel.indices)]
