"""TOML experiment configuration.

Top-level keys: ``seed``, ``periods``, ``K``, ``fine_grid``; tables
``[plant]``, ``[basis]``, ``[reference]``, ``[controller]`` and, for sweep
files, ``[sweep]``. See ``configs/baseline.toml`` for an annotated example.
"""
from __future__ import annotations

import re
import sys
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Any

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .model import BasisSpec, PlantModel, default_plant, reference_from_sinusoids, reference_from_step
from .simulate import RidgeController, RunConfig, SparseController
from .solvers import SolverConfig

TOP_KEYS = {"seed", "periods", "K", "fine_grid", "plant", "basis", "reference", "controller", "sweep"}
PLANT_KEYS = {"alpha", "beta", "A", "b", "c", "x0"}
BASIS_KEYS = {"T", "M"}
REFERENCE_KEYS = {"kind", "terms", "level", "label"}
CONTROLLER_KEYS = {"kind", "mu", "iterations", "lipschitz_safety", "warm_start", "zero_tol", "mu2"}
SWEEP_KEYS = {"parameter", "values", "seeds"}


class ConfigError(ValueError):
    def __init__(self, message: str, path=None, line: int | None = None):
        where = f"{path}:{line}: " if path and line else (f"{path}: " if path else "")
        super().__init__(where + message)
        self.line = line


def _locate(text: str | None, table: str | None, key: str) -> int | None:
    """1-based line of ``key`` inside ``[table]`` (``None`` = top level)."""
    if text is None:
        return None
    current = None
    header = re.compile(r"^\s*\[\s*([A-Za-z0-9_.]+)\s*\]")
    assign = re.compile(r"^\s*" + re.escape(key) + r"\s*=")
    table_line = None
    for i, line in enumerate(text.splitlines(), 1):
        m = header.match(line)
        if m:
            current = m.group(1)
            if current == table:
                table_line = i
            continue
        if current == table and assign.match(line):
            return i
    return table_line


@dataclass
class _Reader:
    data: dict
    text: str | None = None
    path: Any = None

    def fail(self, table, key, msg):
        raise ConfigError(msg, self.path, _locate(self.text, table, key))

    def table(self, name, allowed, required=True) -> dict:
        t = self.data.get(name)
        if t is None:
            if required:
                raise ConfigError(f"missing [{name}] table", self.path)
            return {}
        if not isinstance(t, dict):
            self.fail(None, name, f"{name} must be a table")
        for k in t:
            if k not in allowed:
                self.fail(name, k, f"unknown key {k!r} in [{name}]; allowed: {sorted(allowed)}")
        return t

    def number(self, table, t, key, default=None, kind=float, positive=False, nonneg=False):
        if key not in t:
            if default is None:
                self.fail(table, key, f"missing required key {key!r}" + (f" in [{table}]" if table else ""))
            return default
        v = t[key]
        if isinstance(v, bool) or not isinstance(v, (int, float)) or (kind is int and not isinstance(v, int)):
            self.fail(table, key, f"{key} must be {'an integer' if kind is int else 'a number'}, got {v!r}")
        if positive and not v > 0:
            self.fail(table, key, f"{key} must be positive, got {v!r}")
        if nonneg and v < 0:
            self.fail(table, key, f"{key} must be nonnegative, got {v!r}")
        return kind(v)


def _plant(r: _Reader) -> PlantModel:
    t = r.table("plant", PLANT_KEYS)
    try:
        if "A" in t:
            for key in ("alpha", "beta"):
                if key in t:
                    r.fail("plant", key, f"{key} conflicts with an explicit A matrix")
            plant = PlantModel(A=t["A"], b=t.get("b"), c=t.get("c"), x0=t.get("x0"))
        else:
            alpha = r.number("plant", t, "alpha", 5.0)
            beta = r.number("plant", t, "beta", 10.0)
            plant = default_plant(alpha, beta)
            if "x0" in t:
                plant = replace(plant, x0=t["x0"])
    except (TypeError, ValueError) as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(f"invalid plant: {exc}", r.path, _locate(r.text, "plant", "A")) from None
    return plant


def _basis(r: _Reader) -> BasisSpec:
    t = r.table("basis", BASIS_KEYS)
    return BasisSpec(T=r.number("basis", t, "T", positive=True),
                     M=r.number("basis", t, "M", kind=int, positive=True))


def _reference(r: _Reader, spec: BasisSpec):
    t = r.table("reference", REFERENCE_KEYS)
    kind = t.get("kind", "sinusoids")
    label = t.get("label", "")
    try:
        if kind == "sinusoids":
            terms = []
            for term in t.get("terms", []):
                if not isinstance(term, dict) or set(term) - {"kind", "q", "amplitude"}:
                    r.fail("reference", "terms", "each term must be {kind=..., q=..., amplitude=...}")
                terms.append((term["kind"], term["q"], float(term.get("amplitude", 1.0))))
            return reference_from_sinusoids(terms, spec, label)
        if kind == "step":
            return reference_from_step(r.number("reference", t, "level"), spec, label)
        if kind == "zero":
            return reference_from_sinusoids([], spec, label or "zero")
    except (KeyError, ValueError) as exc:
        if isinstance(exc, ConfigError):
            raise
        r.fail("reference", "terms", f"invalid reference: {exc}")
    r.fail("reference", "kind", f"unknown reference kind {kind!r}; expected sinusoids, step or zero")


def _solver(r: _Reader, t: dict) -> SolverConfig:
    ws = t.get("warm_start", False)
    if not isinstance(ws, bool):
        r.fail("controller", "warm_start", "warm_start must be true or false")
    return SolverConfig(
        mu=r.number("controller", t, "mu", 0.002, nonneg=True),
        iterations=r.number("controller", t, "iterations", 10, kind=int, positive=True),
        lipschitz_safety=r.number("controller", t, "lipschitz_safety", 1.01),
        warm_start=ws,
        zero_tol=r.number("controller", t, "zero_tol", 0.0, nonneg=True),
    )


@dataclass(frozen=True)
class ExperimentConfig:
    """A resolved run configuration plus the settings needed by ``compare``."""

    run: RunConfig
    solver: SolverConfig
    mu2: float

    def with_controller(self, kind: str) -> RunConfig:
        ctrl = SparseController(self.solver) if kind == "sparse" else RidgeController(self.mu2)
        return replace(self.run, controller=ctrl)


def parse_config(data: dict, text: str | None = None, path=None) -> ExperimentConfig:
    r = _Reader(data, text, path)
    for k in data:
        if k not in TOP_KEYS:
            r.fail(None, k, f"unknown top-level key {k!r}; allowed: {sorted(TOP_KEYS)}")
    plant = _plant(r)
    spec = _basis(r)
    reference = _reference(r, spec)
    ct = r.table("controller", CONTROLLER_KEYS)
    solver = _solver(r, ct)
    mu2 = r.number("controller", ct, "mu2", 0.0005, positive=True)
    kind = ct.get("kind", "sparse")
    if kind not in ("sparse", "ridge"):
        r.fail("controller", "kind", f"controller kind must be 'sparse' or 'ridge', got {kind!r}")
    ctrl = SparseController(solver) if kind == "sparse" else RidgeController(mu2)
    seed = r.number(None, data, "seed", 0, kind=int, nonneg=True)
    try:
        run = RunConfig(plant=plant, spec=spec, reference=reference, controller=ctrl,
                        K=r.number(None, data, "K", 33, kind=int, positive=True),
                        periods=r.number(None, data, "periods", 101, kind=int, positive=True),
                        seed=seed,
                        fine_grid=r.number(None, data, "fine_grid", 2001, kind=int, positive=True))
    except ValueError as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(str(exc), path) from None
    return ExperimentConfig(run=run, solver=solver, mu2=mu2)


def read_toml(path) -> tuple[dict, str]:
    path = Path(path)
    text = path.read_text()
    try:
        return tomllib.loads(text), text
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"TOML syntax error: {exc}", path) from None


def load_config(path) -> ExperimentConfig:
    data, text = read_toml(path)
    return parse_config(data, text, path)


@dataclass(frozen=True)
class SweepSpec:
    parameter: str
    values: tuple
    base: ExperimentConfig
    seeds: tuple

    def __post_init__(self):
        if self.parameter not in ("mu", "mu2", "K"):
            raise ValueError(f"sweep parameter must be mu, mu2 or K, got {self.parameter!r}")
        if not self.values:
            raise ValueError("sweep needs at least one value")
        if list(self.values) != sorted(self.values):
            raise ValueError("sweep values must be sorted ascending")
        if not self.seeds:
            raise ValueError("sweep needs at least one seed")

    def point(self, value, seed: int) -> RunConfig:
        base = self.base
        if self.parameter == "mu":
            run = base.with_controller("sparse")
            run = replace(run, controller=SparseController(replace(base.solver, mu=float(value))))
        elif self.parameter == "mu2":
            run = replace(base.run, controller=RidgeController(float(value)))
        else:
            run = replace(base.run, K=int(value))
        return replace(run, seed=int(seed))


def load_sweep(path, overrides=None) -> SweepSpec:
    data, text = read_toml(path)
    r = _Reader(data, text, path)
    t = r.table("sweep", SWEEP_KEYS)
    base = parse_config(data, text, path)
    if overrides:
        base = overrides(base)
    param = t.get("parameter")
    if param not in ("mu", "mu2", "K"):
        r.fail("sweep", "parameter", f"sweep parameter must be mu, mu2 or K, got {param!r}")
    values = t.get("values", [])
    kind = int if param == "K" else float
    for v in values:
        if isinstance(v, bool) or not isinstance(v, (int, float)) or (kind is int and not isinstance(v, int)) or v <= 0:
            r.fail("sweep", "values", f"sweep values must be positive {'integers' if kind is int else 'numbers'}")
    if not values:
        r.fail("sweep", "values", "sweep values must be a nonempty list")
    if list(values) != sorted(values):
        r.fail("sweep", "values", "sweep values must be sorted ascending")
    seeds = t.get("seeds", [base.run.seed])
    if not seeds or any(not isinstance(s, int) or isinstance(s, bool) or s < 0 for s in seeds):
        r.fail("sweep", "seeds", "seeds must be a nonempty list of nonnegative integers")
    return SweepSpec(parameter=param, values=tuple(kind(v) for v in values), base=base,
                     seeds=tuple(seeds))
