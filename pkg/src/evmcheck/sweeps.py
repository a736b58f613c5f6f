"""Grid sweeps: boundary curves, attack curves and their row formats."""

from __future__ import annotations

import json
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from functools import partial
from typing import Callable, Iterable

import numpy as np

from . import attacks
from .channels import (
    ChannelParams,
    alpha_from_overlap,
    existence_bound,
    quadrature_record_at,
    simulate_quadrature_record,
    simulate_stokes_record,
    stokes_floor,
    stokes_record_at,
)
from .feasibility import BoundaryError, SolverConfig, boundary_search
from .records import MODES

WORKERS_ENV = "EVMCHECK_WORKERS"
BOUNDARY_COLUMNS = ("overlap", "boundary_variance", "verdict_low", "verdict_high", "iterations")
ATTACK_COLUMNS = ("overlap", "achieved_variance", "params_json", "residual")
FAMILIES = (attacks.MIN_ERROR, attacks.EQUAL_AMPLITUDE, attacks.TWO_AXIS, attacks.GAUSSIAN_SIMPLIFIED)


@dataclass(frozen=True)
class Grid:
    start: float = 0.05
    stop: float = 0.95
    step: float = 0.05

    def __post_init__(self):
        if not self.step > 0:
            raise ValueError("grid step must be positive")
        if self.stop < self.start:
            raise ValueError(f"empty grid {self.start}:{self.stop}:{self.step}")

    @classmethod
    def parse(cls, text: str) -> "Grid":
        parts = text.split(":")
        if len(parts) != 3:
            raise ValueError(f"grid must be start:stop:step, got {text!r}")
        return cls(*(float(p) for p in parts))

    def values(self) -> list[float]:
        n = int(math.floor((self.stop - self.start) / self.step + 1e-9)) + 1
        # rounding keeps 0.05-step grids free of 0.15000000000000002
        return [round(self.start + k * self.step, 12) for k in range(n)]


@dataclass(frozen=True)
class SweepSpec:
    mode: str = "quadrature"
    grid: Grid = field(default_factory=Grid)
    eta: float = 1.0
    alpha_lo: float = 100.0
    photons: float | None = None
    variant: str = attacks.QUAD_SQUEEZED_PLUS
    solver: SolverConfig = field(default_factory=SolverConfig)
    abs_width: float | None = None
    rel_width: float | None = None

    def __post_init__(self):
        if self.mode not in MODES:
            raise ValueError(f"unknown mode {self.mode!r}")
        if not 0 < self.eta <= 1:
            raise ValueError(f"eta={self.eta} outside (0, 1]")

    def widths(self) -> tuple[float | None, float | None]:
        if self.abs_width is not None or self.rel_width is not None:
            return self.abs_width, self.rel_width
        if self.mode.startswith("quadrature"):
            return 1e-5, None
        return None, 1e-5


def worker_count() -> int:
    raw = os.environ.get(WORKERS_ENV, "1")
    try:
        return max(1, int(raw))
    except ValueError:
        raise ValueError(f"{WORKERS_ENV} must be an integer, got {raw!r}") from None


def parallel_map(fn: Callable, items: Iterable, workers: int | None = None) -> list:
    """Map preserving input order; serial when a single worker is requested."""
    items = list(items)
    workers = worker_count() if workers is None else workers
    if workers <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


# --- records along a variance axis ------------------------------------------

def record_for(spec: SweepSpec, s: float, variance: float):
    if spec.mode.startswith("quadrature"):
        return quadrature_record_at(s, spec.eta, variance, heterodyne=spec.mode == "quadrature-heterodyne")
    return stokes_record_at(s, spec.alpha_lo, spec.eta, variance, spec.mode)


def bracket(spec: SweepSpec, s: float) -> tuple[float, float]:
    """Variances expected on the low side and on the separable side."""
    if spec.mode.startswith("quadrature"):
        return 0.3, 2.0
    if spec.mode == "stokes-with-S1":
        floor = stokes_floor(s, spec.alpha_lo, spec.eta)
        return 0.5 * floor, 4.0 * floor
    m = 2 * spec.eta * alpha_from_overlap(s) * spec.alpha_lo
    bound = existence_bound(s, m)
    return 0.5 * bound, 2.0 * bound


def boundary_row(spec: SweepSpec, s: float) -> dict:
    lo, hi = bracket(spec, s)
    abs_w, rel_w = spec.widths()
    try:
        res = boundary_search(partial(record_for, spec, s), lo, hi, spec.solver, abs_width=abs_w, rel_width=rel_w)
    except BoundaryError as exc:
        return {"overlap": s, "boundary_variance": None, "verdict_low": "", "verdict_high": "",
                "iterations": 0, "status": str(exc)}
    return {"overlap": s, "boundary_variance": res.variance, "verdict_low": res.verdict_low,
            "verdict_high": res.verdict_high, "iterations": res.iterations, "status": "ok"}


def boundary_curve(spec: SweepSpec, workers: int | None = None) -> list[dict]:
    return parallel_map(partial(boundary_row, spec), spec.grid.values(), workers)


# --- attacks --------------------------------------------------------------------

def lo_intensity_for(photons: float, s: float, eta: float) -> float:
    """LO amplitude giving total intensity ``photons`` after the channel."""
    lo2 = photons / eta - alpha_from_overlap(s) ** 2
    if lo2 <= 0:
        raise ValueError(f"total intensity {photons} too small for overlap {s}")
    return math.sqrt(lo2)


def run_attack(family: str, spec: SweepSpec, s: float) -> attacks.AttackResult:
    channel = ChannelParams(spec.eta)
    if family == attacks.MIN_ERROR:
        return attacks.quadrature_attack_numeric(simulate_quadrature_record(s, channel))
    if family == attacks.EQUAL_AMPLITUDE:
        return attacks.equal_amplitude_attack(simulate_stokes_record(s, spec.alpha_lo, channel, "stokes-bare"))
    if family == attacks.TWO_AXIS:
        n = int(spec.photons or 100)
        rec = simulate_stokes_record(s, lo_intensity_for(n, s, spec.eta), channel, "stokes-with-S0")
        return attacks.two_axis_attack(rec.with_values(mean_S0=float(n)), n)
    if family == attacks.GAUSSIAN_SIMPLIFIED:
        n = float(spec.photons or 1e4)
        rec = simulate_stokes_record(s, lo_intensity_for(n, s, spec.eta), channel, "stokes-with-S0")
        return attacks.gaussian_simplified_attack(rec.with_values(mean_S0=n), spec.variant)
    raise ValueError(f"unknown attack family {family!r}; expected one of {', '.join(FAMILIES)}")


def _jsonable(v):
    if isinstance(v, (np.floating, np.integer)):
        return v.item()
    return v


def attack_row(family: str, spec: SweepSpec, s: float) -> dict:
    try:
        res = run_attack(family, spec, s)
    except attacks.AttackError as exc:
        return {"overlap": s, "achieved_variance": None, "params_json": "{}", "residual": None, "status": str(exc)}
    params = {k: _jsonable(v) for k, v in res.params.items()}
    return {
        "overlap": s,
        "achieved_variance": res.achieved_variance,
        "params_json": json.dumps(params, sort_keys=True),
        "residual": res.max_residual,
        "status": res.status,
    }


def attack_curve(family: str, spec: SweepSpec, workers: int | None = None) -> list[dict]:
    return parallel_map(partial(attack_row, family, spec), spec.grid.values(), workers)


# --- reference curves -----------------------------------------------------------

def renormalized_quadrature_curve(grid: Grid, photons: float, eta: float = 1.0,
                                  solver: SolverConfig = SolverConfig(), workers: int | None = None) -> list[dict]:
    """Quadrature boundary scaled by twice the LO intensity at fixed total intensity."""
    quad = boundary_curve(SweepSpec("quadrature", grid, eta, solver=solver), workers)
    rows = []
    for row in quad:
        s = row["overlap"]
        lo2 = eta * lo_intensity_for(photons, s, eta) ** 2
        v = row["boundary_variance"]
        rows.append({"overlap": s, "variance": None if v is None else 2 * lo2 * v})
    return rows


def floor_curve(grid: Grid, alpha_lo: float | None, eta: float = 1.0) -> list[dict]:
    if alpha_lo is None:
        return [{"overlap": s, "variance": 0.5} for s in grid.values()]
    return [{"overlap": s, "variance": stokes_floor(s, alpha_lo, eta)} for s in grid.values()]


def with_spec(spec: SweepSpec, **changes) -> SweepSpec:
    return replace(spec, **changes)
