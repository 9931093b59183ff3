"""Exact one-period lifting of the plant onto the exponential basis.

For the input ``u = sum_m theta_m psi_m`` on ``[0, T)`` the state and output
at time ``t`` are

    x(t) = exp(tA) x + Z(t) theta,      y(t) = c^T x(t)

with ``Z(t)[:, m] = (1/sqrt T) (j w_m I - A)^{-1} (exp(j w_m t) I - exp(tA)) b``.
``G`` is ``c^T Z(t_n)`` stacked over the Nyquist grid, ``H`` the free response
rows ``c^T exp(t_n A)``, and ``(A_d, Z)`` the state update over one period.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import scipy.linalg

from .model import BasisSpec, PlantModel

RESOLVENT_TOL = 1e-9


def matexp(A, t: float = 1.0) -> np.ndarray:
    """Matrix exponential ``exp(t A)`` (scaling and squaring, Pade core)."""
    A = np.asarray(A, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError(f"matexp needs a square matrix, got shape {A.shape}")
    if not (np.all(np.isfinite(A)) and np.isfinite(t)):
        raise ValueError("matexp input has non-finite entries")
    if t < 0:
        raise ValueError(f"t must be nonnegative, got {t}")
    if t == 0:
        return np.eye(A.shape[0])
    return scipy.linalg.expm(t * A)


def expm_grid(A, times) -> np.ndarray:
    """Stack of ``exp(t A)`` for every ``t`` in ``times``; shape ``(len(times), nu, nu)``."""
    times = np.asarray(times, dtype=float)
    return scipy.linalg.expm(times[:, None, None] * np.asarray(A, dtype=float))


def simpson_weights(n_points: int, length: float) -> np.ndarray:
    """Composite Simpson weights for ``n_points`` (odd) equispaced nodes over ``length``."""
    if n_points < 3 or n_points % 2 == 0:
        raise ValueError(f"Simpson rule needs an odd number >= 3 of points, got {n_points}")
    w = np.ones(n_points)
    w[1:-1:2] = 4.0
    w[2:-1:2] = 2.0
    return w * (length / (n_points - 1) / 3.0)


def _input_kernel(plant: PlantModel, spec: BasisSpec, times, E=None):
    """``Z(t)`` for each ``t``; returns ``(Z, fallback_columns)`` with Z of shape (len(t), nu, N).

    Only ``m >= 0`` is solved; negative indices are conjugates since A, b are real.
    """
    times = np.asarray(times, dtype=float)
    A, b = plant.A, plant.b
    nu, M = plant.order, spec.M
    if E is None:
        E = expm_grid(A, times)
    Eb = E @ b                                   # (P, nu)
    Z = np.empty((times.size, nu, spec.N), dtype=complex)
    eig = np.linalg.eigvals(A)
    fallback = []
    for q in range(M + 1):
        w = 2 * np.pi * q / spec.T
        if np.min(np.abs(eig - 1j * w)) < RESOLVENT_TOL * max(1.0, abs(w)):
            col = _kernel_by_quadrature(plant, spec, times, q)
            fallback.append(q)
        else:
            R = 1j * w * np.eye(nu) - A
            rhs = np.exp(1j * w * times)[:, None] * b[None, :] - Eb      # (P, nu)
            col = np.linalg.solve(R, rhs.T).T / np.sqrt(spec.T)
        Z[:, :, M + q] = col
        if q:
            Z[:, :, M - q] = np.conj(col)
    return Z, fallback


def _kernel_by_quadrature(plant, spec, times, q, points=4001):
    # resonant column: integrate exp((t - s)A) b psi_q(s) over [0, t] numerically
    w = 2 * np.pi * q / spec.T
    out = np.empty((times.size, plant.order), dtype=complex)
    for i, t in enumerate(times):
        if t == 0:
            out[i] = 0
            continue
        s = np.linspace(0.0, t, points)
        kern = expm_grid(plant.A, t - s) @ plant.b
        f = kern * (np.exp(1j * w * s) / np.sqrt(spec.T))[:, None]
        out[i] = simpson_weights(points, t) @ f
    return out


@dataclass(frozen=True)
class LiftedSystem:
    plant: PlantModel
    spec: BasisSpec
    G: np.ndarray
    H: np.ndarray
    A_d: np.ndarray
    Z: np.ndarray
    grid: np.ndarray
    quadrature_columns: tuple = ()

    def response(self, times):
        """``(H_t, G_t)`` mapping ``(x, theta)`` to the output at arbitrary times in ``[0, T]``."""
        times = np.asarray(times, dtype=float)
        if np.any(times < 0) or np.any(times > self.spec.T):
            raise ValueError(f"response times must lie in [0, {self.spec.T}]")
        E = expm_grid(self.plant.A, times)
        Zt, _ = _input_kernel(self.plant, self.spec, times, E)
        c = self.plant.c
        return E.transpose(0, 2, 1) @ c, np.einsum("i,pim->pm", c, Zt)


def build_lifted(plant: PlantModel, spec: BasisSpec) -> LiftedSystem:
    grid = spec.grid
    E = expm_grid(plant.A, grid)
    Zg, fallback = _input_kernel(plant, spec, grid, E)
    G = np.einsum("i,pim->pm", plant.c, Zg)
    G[0] = 0.0
    H = E.transpose(0, 2, 1) @ plant.c
    A_d = matexp(plant.A, spec.T)
    Z, _ = _input_kernel(plant, spec, [spec.T], A_d[None])
    for a in (G, H, A_d):
        a.setflags(write=False)
    Z = Z[0]
    Z.setflags(write=False)
    return LiftedSystem(plant=plant, spec=spec, G=G, H=H, A_d=A_d, Z=Z,
                        grid=grid, quadrature_columns=tuple(fallback))


def _impulse_response_uniform(plant: PlantModel, step: float, n: int) -> np.ndarray:
    """``c^T exp(j*step*A) b`` for ``j = 0..n-1`` by repeated doubling of one step matrix."""
    nu = plant.order
    powers = np.empty((n, nu, nu))
    powers[0] = np.eye(nu)
    filled = 1
    block = matexp(plant.A, step)
    while filled < n:
        take = min(filled, n - filled)
        powers[filled:filled + take] = powers[:take] @ block
        filled += take
        block = block @ block
    return powers @ plant.b @ plant.c


def quadrature_gram_oracle(plant: PlantModel, spec: BasisSpec, points: int = 20001) -> np.ndarray:
    """Gram matrix ``G[n, m] = int_0^{t_n} c^T exp((t_n - t)A) b psi_m(t) dt`` by composite Simpson.

    Independent of the resolvent formula used by :func:`build_lifted`.
    """
    if points < 3 or points % 2 == 0:
        raise ValueError(f"points must be odd and >= 3, got {points}")
    N, M = spec.N, spec.M
    G = np.zeros((N, N), dtype=complex)
    for n, tn in enumerate(spec.grid):
        if tn == 0.0:
            continue
        dt = tn / (points - 1)
        g = _impulse_response_uniform(plant, dt, points)[::-1]     # g(t_n - t_j)
        fw = (simpson_weights(points, tn) * g).astype(complex)
        base = np.exp(2j * np.pi * np.arange(points) * dt / spec.T)
        row = np.empty(M + 1, dtype=complex)
        for q in range(M + 1):
            row[q] = fw.sum()
            fw *= base
        row /= np.sqrt(spec.T)
        G[n, M:] = row
        G[n, :M] = np.conj(row[:0:-1])
    return G


def dump_matrix_csv(path, name_to_matrix: dict) -> None:
    """Write matrices to one CSV; complex entries get separate ``re``/``im`` columns."""
    path = Path(path)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["matrix", "row", "col", "re", "im"])
        for name, mat in name_to_matrix.items():
            mat = np.atleast_2d(np.asarray(mat))
            for (i, j), v in np.ndenumerate(mat):
                w.writerow([name, i, j, repr(float(np.real(v))), repr(float(np.imag(v)))])
