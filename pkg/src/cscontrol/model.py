"""Plant, band-limited signal space and reference signals.

Signals in V_M are stored as complex coefficient vectors of length
``N = 2M + 1`` indexed by ``m + M`` for ``m = -M, ..., M``. Real signals
are conjugate symmetric: ``rho[-m] == conj(rho[m])``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

SYMMETRY_TOL = 1e-9


def _frozen(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class PlantModel:
    """Continuous-time SISO plant ``x' = A x + b u``, ``y = c^T x``."""

    A: np.ndarray
    b: np.ndarray
    c: np.ndarray
    x0: np.ndarray | None = None

    def __post_init__(self):
        A = np.array(self.A, dtype=float)
        if A.ndim != 2 or A.shape[0] != A.shape[1] or A.shape[0] < 1:
            raise ValueError(f"A must be a non-empty square matrix, got shape {A.shape}")
        nu = A.shape[0]
        b = np.array(self.b, dtype=float).reshape(-1)
        c = np.array(self.c, dtype=float).reshape(-1)
        x0 = np.zeros(nu) if self.x0 is None else np.array(self.x0, dtype=float).reshape(-1)
        for name, v in (("b", b), ("c", c), ("x0", x0)):
            if v.shape != (nu,):
                raise ValueError(f"{name} must have length {nu}, got {v.shape[0]}")
        for name, v in (("A", A), ("b", b), ("c", c), ("x0", x0)):
            if not np.all(np.isfinite(v)):
                raise ValueError(f"{name} has non-finite entries")
        object.__setattr__(self, "A", _frozen(A))
        object.__setattr__(self, "b", _frozen(b))
        object.__setattr__(self, "c", _frozen(c))
        object.__setattr__(self, "x0", _frozen(x0))

    @property
    def order(self) -> int:
        return self.A.shape[0]


def default_plant(alpha: float = 5.0, beta: float = 10.0) -> PlantModel:
    """Second-order plant with poles ``-alpha, -beta`` and a zero at ``+alpha``."""
    A = [[0.0, 1.0], [-alpha * beta, -alpha - beta]]
    return PlantModel(A=A, b=[0.0, 1.0], c=[-alpha, 1.0])


@dataclass(frozen=True)
class BasisSpec:
    """Period ``T`` and bandwidth index ``M`` of the exponential basis."""

    T: float
    M: int

    def __post_init__(self):
        if not (np.isfinite(self.T) and self.T > 0):
            raise ValueError(f"period T must be positive, got {self.T}")
        if int(self.M) != self.M or self.M < 1:
            raise ValueError(f"M must be a positive integer, got {self.M}")
        object.__setattr__(self, "T", float(self.T))
        object.__setattr__(self, "M", int(self.M))

    @property
    def N(self) -> int:
        return 2 * self.M + 1

    @property
    def h(self) -> float:
        """Nyquist grid spacing ``T / (N - 1)``."""
        return self.T / (self.N - 1)

    @property
    def nyquist_rate(self) -> float:
        return 2 * self.M / self.T

    @property
    def indices(self) -> np.ndarray:
        """Frequency indices ``-M, ..., M``."""
        return np.arange(-self.M, self.M + 1)

    @property
    def omegas(self) -> np.ndarray:
        return 2 * np.pi * self.indices / self.T

    @property
    def grid(self) -> np.ndarray:
        """Nyquist grid ``t_1 = 0, ..., t_N = T``."""
        g = np.arange(self.N) * self.h
        g[-1] = self.T
        return g

    def basis_matrix(self, t) -> np.ndarray:
        """Matrix ``[psi_m(t_i)]`` with one row per time and one column per ``m``."""
        t = np.atleast_1d(np.asarray(t, dtype=float))
        return np.exp(1j * np.outer(t, self.omegas)) / np.sqrt(self.T)


def basis_eval(spec: BasisSpec, m: int, t: float) -> complex:
    """Evaluate ``psi_m(t) = exp(j w_m t) / sqrt(T)``."""
    if abs(m) > spec.M:
        raise IndexError(f"basis index {m} outside [-{spec.M}, {spec.M}]")
    if not 0.0 <= t <= spec.T:
        raise ValueError(f"t={t} outside [0, {spec.T}]")
    return complex(np.exp(1j * 2 * np.pi * m * t / spec.T) / np.sqrt(spec.T))


def is_conjugate_symmetric(theta, tol: float = SYMMETRY_TOL) -> bool:
    """Whether ``theta[-m] == conj(theta[m])`` to within ``tol`` (scaled by max(1, |theta|_inf))."""
    theta = np.asarray(theta)
    scale = max(1.0, float(np.max(np.abs(theta), initial=0.0)))
    return bool(np.max(np.abs(theta - np.conj(theta[::-1])), initial=0.0) <= tol * scale)


def check_conjugate_symmetric(theta, tol: float = SYMMETRY_TOL) -> None:
    if not is_conjugate_symmetric(theta, tol):
        raise ValueError("coefficient vector is not conjugate symmetric; decoded signal would be complex")


@dataclass(frozen=True)
class ReferenceSignal:
    rho: np.ndarray
    label: str = ""
    spec: BasisSpec | None = field(default=None, compare=False)

    def __post_init__(self):
        rho = np.array(self.rho, dtype=complex).reshape(-1)
        if self.spec is not None and rho.shape[0] != self.spec.N:
            raise ValueError(f"reference needs {self.spec.N} coefficients, got {rho.shape[0]}")
        if rho.shape[0] % 2 != 1:
            raise ValueError("coefficient vector length must be odd")
        check_conjugate_symmetric(rho)
        object.__setattr__(self, "rho", _frozen(rho))

    def sample(self, spec: BasisSpec, t) -> np.ndarray:
        return signal_values(self.rho, spec, t)


def reference_from_sinusoids(
    terms: Iterable[tuple[str, int, float]], spec: BasisSpec, label: str = ""
) -> ReferenceSignal:
    """Reference ``sum amp * {sin,cos}(w_q t)`` for basis frequencies ``w_q = 2 pi q / T``."""
    rho = np.zeros(spec.N, dtype=complex)
    half = np.sqrt(spec.T) / 2
    for kind, q, amp in terms:
        if int(q) != q:
            raise ValueError(f"frequency index {q} is not an integer; not a basis frequency")
        q = int(q)
        if not 0 <= q <= spec.M:
            raise ValueError(f"frequency index {q} outside [0, {spec.M}]")
        if kind == "cos":
            if q == 0:
                rho[spec.M] += amp * np.sqrt(spec.T)
            else:
                rho[spec.M + q] += amp * half
                rho[spec.M - q] += amp * half
        elif kind == "sin":
            # sin(0 t) vanishes identically
            if q:
                rho[spec.M + q] += -1j * amp * half
                rho[spec.M - q] += 1j * amp * half
        else:
            raise ValueError(f"unknown sinusoid kind {kind!r}; expected 'sin' or 'cos'")
    if not label:
        label = " + ".join(f"{a:g}*{k}({q}w)" for k, q, a in terms) if terms else "zero"
    return ReferenceSignal(rho=rho, label=label, spec=spec)


def reference_from_step(level: float, spec: BasisSpec, label: str = "") -> ReferenceSignal:
    rho = np.zeros(spec.N, dtype=complex)
    rho[spec.M] = level * np.sqrt(spec.T)
    return ReferenceSignal(rho=rho, label=label or f"step({level:g})", spec=spec)


def signal_values(rho, spec: BasisSpec, t) -> np.ndarray:
    """Real samples of ``sum_m rho[m] psi_m(t)`` at the times ``t``."""
    rho = np.asarray(rho)
    if rho.shape != (spec.N,):
        raise ValueError(f"expected {spec.N} coefficients, got shape {rho.shape}")
    check_conjugate_symmetric(rho)
    t = np.atleast_1d(np.asarray(t, dtype=float))
    if np.any(t < 0) or np.any(t > spec.T):
        raise ValueError(f"evaluation times must lie in [0, {spec.T}]")
    vals = spec.basis_matrix(t) @ rho
    scale = max(1.0, float(np.max(np.abs(vals), initial=0.0)))
    if np.max(np.abs(vals.imag), initial=0.0) >= SYMMETRY_TOL * scale:
        raise ValueError("signal has a non-negligible imaginary part")
    return vals.real


def signal_eval(rho, spec: BasisSpec, t: float) -> float:
    return float(signal_values(rho, spec, [t])[0])


def sparsity(theta: Sequence[complex], tol: float = 0.0) -> int:
    return int(np.count_nonzero(np.abs(np.asarray(theta)) > tol))
