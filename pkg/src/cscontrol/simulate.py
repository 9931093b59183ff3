"""Closed-loop simulation of the sampled-data networked control loop.

Each period ``k`` the controller receives the sampled state ``x[k]``, forms a
control vector, the decoder applies ``u_k = sum theta_m psi_m`` over
``[kT, (k+1)T)``, and the plant is propagated exactly by the lifted maps.
"""
from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field, replace
from typing import Optional, Sequence, Union

import numpy as np

from . import codec
from .lift import LiftedSystem, build_lifted, simpson_weights
from .model import (SYMMETRY_TOL, BasisSpec, PlantModel, ReferenceSignal,
                    check_conjugate_symmetric)
from .sampling import SampleSelector, draw_selector, full_selector, make_rng, select_rows
from .solvers import (ControlVector, SolverConfig, fista, ridge, ridge_factor,
                      truncate_top)

DIVERGENCE_GROWTH = 1e6


@dataclass(frozen=True)
class SparseController:
    solver: SolverConfig = field(default_factory=SolverConfig)
    kind = "sparse"

    def describe(self) -> dict:
        s = self.solver
        return {"kind": self.kind, "mu": s.mu, "iterations": s.iterations,
                "lipschitz_safety": s.lipschitz_safety, "warm_start": s.warm_start,
                "zero_tol": s.zero_tol}


@dataclass(frozen=True)
class RidgeController:
    mu2: float = 0.0005
    kind = "ridge"

    def __post_init__(self):
        if not self.mu2 > 0:
            raise ValueError(f"mu2 must be positive, got {self.mu2}")

    def describe(self) -> dict:
        return {"kind": self.kind, "mu2": self.mu2}


@dataclass(frozen=True)
class TruncatedRidgeController:
    mu2: float
    schedule: tuple[int, ...]
    kind = "ridge_truncated"

    def __post_init__(self):
        if not self.mu2 > 0:
            raise ValueError(f"mu2 must be positive, got {self.mu2}")
        object.__setattr__(self, "schedule", tuple(int(s) for s in self.schedule))

    def describe(self) -> dict:
        return {"kind": self.kind, "mu2": self.mu2, "schedule": list(self.schedule)}


Controller = Union[SparseController, RidgeController, TruncatedRidgeController]


@dataclass(frozen=True)
class RunConfig:
    plant: PlantModel
    spec: BasisSpec
    reference: ReferenceSignal
    controller: Controller
    K: int = 33
    periods: int = 101
    seed: int = 0
    fine_grid: int = 2001

    def __post_init__(self):
        if self.periods < 1:
            raise ValueError(f"periods must be >= 1, got {self.periods}")
        if not 1 <= self.K <= self.spec.N:
            raise ValueError(f"need 1 <= K <= N={self.spec.N}, got K={self.K}")
        if self.fine_grid < 201 or self.fine_grid % 2 == 0:
            raise ValueError(f"fine_grid must be odd and >= 201, got {self.fine_grid}")
        if self.reference.rho.shape != (self.spec.N,):
            raise ValueError("reference length does not match the basis")
        if not 0 <= self.seed < 2**64:
            raise ValueError(f"seed must be an unsigned 64-bit integer, got {self.seed}")
        if isinstance(self.controller, TruncatedRidgeController) \
                and len(self.controller.schedule) != self.periods:
            raise ValueError(f"sparsity schedule has {len(self.controller.schedule)} entries, "
                             f"expected {self.periods}")

    def describe(self) -> dict:
        """JSON-ready echo of the fully resolved configuration."""
        return {
            "plant": {"A": self.plant.A.tolist(), "b": self.plant.b.tolist(),
                      "c": self.plant.c.tolist(), "x0": self.plant.x0.tolist()},
            "basis": {"T": self.spec.T, "M": self.spec.M, "N": self.spec.N},
            "reference": {"label": self.reference.label,
                          "rho_real": self.reference.rho.real.tolist(),
                          "rho_imag": self.reference.rho.imag.tolist()},
            "controller": self.controller.describe(),
            "K": self.K,
            "periods": self.periods,
            "seed": self.seed,
            "fine_grid": self.fine_grid,
        }


@dataclass
class RunResult:
    config: dict
    errors: list
    sparsity: list
    bytes_per_period: list
    thetas: np.ndarray
    states: np.ndarray
    rms: float
    avg_sparsity: float
    diverged: bool = False
    diverged_at: Optional[int] = None
    max_imag_control: float = 0.0
    max_imag_state: float = 0.0

    @property
    def N(self) -> int:
        return self.config["basis"]["N"]

    @property
    def final_time(self) -> float:
        """Simulated horizon ``T * (completed periods)``."""
        return self.config["basis"]["T"] * len(self.errors)

    def errors_db(self) -> list:
        return [20 * math.log10(e) if e > 0 else -math.inf for e in self.errors]

    def to_dict(self) -> dict:
        return {
            "config": self.config,
            "rms": self.rms,
            "avg_sparsity": self.avg_sparsity,
            "diverged": self.diverged,
            "diverged_at": self.diverged_at,
            "max_imag_control": self.max_imag_control,
            "max_imag_state": self.max_imag_state,
            "errors": list(self.errors),
            "sparsity": list(self.sparsity),
            "bytes_per_period": list(self.bytes_per_period),
            "theta_real": self.thetas.real.tolist(),
            "theta_imag": self.thetas.imag.tolist(),
            "states": self.states.tolist(),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=1, allow_nan=True) + "\n"

    def trace_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["k", "err_l2", "err_db", "sparsity", "bytes"])
        for k, (e, db, s, b) in enumerate(zip(self.errors, self.errors_db(),
                                              self.sparsity, self.bytes_per_period)):
            w.writerow([k, repr(e), repr(db), s, b])
        return buf.getvalue()


def _symmetrize(theta: np.ndarray) -> np.ndarray:
    return 0.5 * (theta + np.conj(theta[::-1]))


def _drop_unpaired(theta: ControlVector) -> ControlVector:
    # an entry whose conjugate partner was truncated would make the input complex
    th = theta.theta.copy()
    alone = (th != 0) & (th[::-1] == 0)
    th[alone] = 0
    return ControlVector(th, theta.zero_tol)


def control_step(lifted: LiftedSystem, sel: Optional[SampleSelector], reference: ReferenceSignal,
                 x, controller: Controller, *, k: int = 0, previous: Optional[ControlVector] = None,
                 r_vec=None, factor=None) -> ControlVector:
    """Control vector for the sampled state ``x``.

    The sparse controller solves the l1-l2 problem on the rows picked by
    ``sel``; the ridge controllers use the full grid.
    """
    x = np.asarray(x, dtype=float)
    if r_vec is None:
        r_vec = reference.sample(lifted.spec, lifted.grid)
    rhs = r_vec - lifted.H @ x
    if isinstance(controller, SparseController):
        if sel is None:
            sel = full_selector(lifted.spec.N)
        init = previous.theta if previous is not None else None
        return fista(select_rows(sel, lifted.G), select_rows(sel, rhs), controller.solver, init)
    if factor is None:
        factor = ridge_factor(lifted.G, controller.mu2)
    theta = ridge(lifted.G, rhs, controller.mu2, factor=factor)
    theta = ControlVector(_symmetrize(theta.theta))
    if isinstance(controller, TruncatedRidgeController):
        theta = _drop_unpaired(truncate_top(theta, controller.schedule[k]))
    return theta


def _real_part(v: np.ndarray, what: str) -> np.ndarray:
    scale = max(1.0, float(np.max(np.abs(v), initial=0.0)))
    if np.max(np.abs(v.imag), initial=0.0) >= SYMMETRY_TOL * scale:
        raise ValueError(f"{what} has a non-negligible imaginary part")
    return v.real


def propagate(lifted: LiftedSystem, x, theta: ControlVector) -> np.ndarray:
    """State at the end of the period: ``Re(A_d x + Z theta)``."""
    check_conjugate_symmetric(theta.theta)
    return _real_part(lifted.A_d @ np.asarray(x, dtype=float) + lifted.Z @ theta.theta,
                      "propagated state")


def output_trace(lifted: LiftedSystem, x, theta: ControlVector, grid=None,
                 response=None) -> np.ndarray:
    """Output ``y(t)`` over one period at the times ``grid`` (default: Nyquist grid).

    ``response`` may carry precomputed ``lifted.response(grid)`` matrices.
    """
    if response is None:
        if grid is None:
            response = (lifted.H, lifted.G)
        else:
            response = lifted.response(grid)
    Ht, Gt = response
    check_conjugate_symmetric(theta.theta)
    return _real_part(Ht @ np.asarray(x, dtype=float) + Gt @ theta.theta, "output")


def run_closed_loop(cfg: RunConfig, lifted: Optional[LiftedSystem] = None) -> RunResult:
    spec = cfg.spec
    if lifted is None:
        lifted = build_lifted(cfg.plant, spec)
    ctrl = cfg.controller
    fine = np.linspace(0.0, spec.T, cfg.fine_grid)
    weights = simpson_weights(cfg.fine_grid, spec.T)
    response = lifted.response(fine)
    decoder = spec.basis_matrix(fine)
    r_vec = cfg.reference.sample(spec, lifted.grid)
    r_fine = cfg.reference.sample(spec, fine)
    factor = None if isinstance(ctrl, SparseController) else ridge_factor(lifted.G, ctrl.mu2)
    rng = make_rng(cfg.seed)
    limit = DIVERGENCE_GROWTH * (1.0 + np.linalg.norm(cfg.plant.x0))

    x = cfg.plant.x0.copy()
    states = [x]
    errors, support, sizes, thetas = [], [], [], []
    imag_u = imag_x = 0.0
    theta = None
    diverged_at = None
    for k in range(cfg.periods):
        sel = draw_selector(rng, spec.N, cfg.K) if isinstance(ctrl, SparseController) else None
        theta = control_step(lifted, sel, cfg.reference, x, ctrl, k=k, previous=theta,
                             r_vec=r_vec, factor=factor)
        u = decoder @ theta.theta
        imag_u = max(imag_u, float(np.max(np.abs(u.imag))))
        y = output_trace(lifted, x, theta, response=response)
        errors.append(float(np.sqrt(max(weights @ (y - r_fine) ** 2, 0.0))))
        support.append(theta.support_count)
        sizes.append(len(codec.encode_control(theta, k)))
        thetas.append(theta.theta)
        x_next = lifted.A_d @ x + lifted.Z @ theta.theta
        imag_x = max(imag_x, float(np.max(np.abs(x_next.imag))))
        x = propagate(lifted, x, theta)
        states.append(x)
        if not np.linalg.norm(x) <= limit:
            diverged_at = k + 1
            break

    T_f = spec.T * len(errors)
    rms = math.sqrt(sum(e * e for e in errors) / T_f)
    return RunResult(
        config=cfg.describe(),
        errors=errors,
        sparsity=support,
        bytes_per_period=sizes,
        thetas=np.array(thetas),
        states=np.array(states),
        rms=rms,
        avg_sparsity=sum(support) / len(support),
        diverged=diverged_at is not None,
        diverged_at=diverged_at,
        max_imag_control=imag_u,
        max_imag_state=imag_x,
    )


def compare_truncated(cfg: RunConfig, sparsity_schedule: Sequence[int],
                      mu2: Optional[float] = None,
                      lifted: Optional[LiftedSystem] = None) -> RunResult:
    """Closed-loop ridge run with ``theta_2[k]`` truncated to ``sparsity_schedule[k]`` entries."""
    schedule = tuple(int(s) for s in sparsity_schedule)
    if len(schedule) != cfg.periods:
        raise ValueError(f"schedule has {len(schedule)} entries, expected {cfg.periods}")
    if mu2 is None:
        mu2 = getattr(cfg.controller, "mu2", None)
        if mu2 is None:
            raise ValueError("mu2 must be given when the configured controller is not a ridge controller")
    trunc = TruncatedRidgeController(mu2=mu2, schedule=schedule)
    return run_closed_loop(replace(cfg, controller=trunc), lifted)
