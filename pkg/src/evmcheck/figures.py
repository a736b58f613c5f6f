"""Figure reproduction: curve CSVs plus one SVG overlay per figure."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path

from . import attacks
from .feasibility import SolverConfig
from .svg import Series, write_svg
from .sweeps import (
    ATTACK_COLUMNS,
    BOUNDARY_COLUMNS,
    Grid,
    SweepSpec,
    attack_curve,
    boundary_curve,
    floor_curve,
    renormalized_quadrature_curve,
)

CURVE_COLUMNS = ("overlap", "variance")


def format_value(v) -> str:
    if v is None:
        return ""
    if isinstance(v, float):
        return "nan" if math.isnan(v) else f"{v:.12g}"
    return str(v)


def write_rows(path: str | Path | None, columns, rows: list[dict], stream=None) -> None:
    """CSV with the given columns; a ``status`` column is added if any row failed."""
    cols = list(columns)
    if any(r.get("status", "ok") != "ok" for r in rows):
        cols.append("status")
    if path is None:
        _write(stream, cols, rows)
        return
    with open(path, "w", newline="") as fh:
        _write(fh, cols, rows)


def _write(fh, cols, rows):
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(cols)
    for r in rows:
        w.writerow([format_value(r.get(c)) for c in cols])


@dataclass
class FigureOptions:
    grid: Grid = field(default_factory=Grid)
    alpha_lo: float = 100.0
    photons: float | None = None
    solver: SolverConfig = field(default_factory=SolverConfig)
    workers: int | None = None


@dataclass
class Curve:
    name: str
    label: str
    rows: list[dict]
    kind: str  # boundary, attack or reference
    style: str = "solid"

    @property
    def columns(self):
        return {"boundary": BOUNDARY_COLUMNS, "attack": ATTACK_COLUMNS}.get(self.kind, CURVE_COLUMNS)

    def points(self) -> tuple[list[float], list[float | None]]:
        key = {"boundary": "boundary_variance", "attack": "achieved_variance"}.get(self.kind, "variance")
        return [r["overlap"] for r in self.rows], [r.get(key) for r in self.rows]


def _fig1(opt: FigureOptions) -> list[Curve]:
    spec = SweepSpec("quadrature", opt.grid, 1.0, solver=opt.solver)
    return [
        Curve("boundary", "verification boundary", boundary_curve(spec, opt.workers), "boundary"),
        Curve("attack", "min-error squeezed attack", attack_curve(attacks.MIN_ERROR, spec, opt.workers), "attack",
              "dashed"),
        Curve("floor", "vacuum variance", floor_curve(opt.grid, None), "reference", "dotted"),
    ]


def _stokes_curves(opt: FigureOptions, eta: float, with_s1: bool) -> list[Curve]:
    bare = SweepSpec("stokes-bare", opt.grid, eta, opt.alpha_lo, solver=opt.solver)
    out = [
        Curve("existence", "existence boundary", boundary_curve(bare, opt.workers), "boundary"),
        Curve("attack", "equal-amplitude attack", attack_curve(attacks.EQUAL_AMPLITUDE, bare, opt.workers), "attack",
              "dashed"),
        Curve("floor", "coherent floor", floor_curve(opt.grid, opt.alpha_lo, eta), "reference", "dotted"),
    ]
    if with_s1:
        s1 = SweepSpec("stokes-with-S1", opt.grid, eta, opt.alpha_lo, solver=opt.solver)
        out.append(Curve("s1_boundary", "verification boundary with S1", boundary_curve(s1, opt.workers), "boundary"))
    return out


def _fig3(opt: FigureOptions) -> list[Curve]:
    return _stokes_curves(opt, 1.0, with_s1=False)


def _fig6(opt: FigureOptions) -> list[Curve]:
    return _stokes_curves(opt, 0.5, with_s1=True)


def _fig4(opt: FigureOptions) -> list[Curve]:
    n = opt.photons or 100
    spec = SweepSpec("stokes-with-S0", opt.grid, 1.0, photons=n, solver=opt.solver)
    return [
        Curve("two_axis", f"two-axis attack, n={n:g}", attack_curve(attacks.TWO_AXIS, spec, opt.workers), "attack"),
        Curve("quadrature", "renormalized quadrature boundary",
              renormalized_quadrature_curve(opt.grid, n, solver=opt.solver, workers=opt.workers), "reference",
              "dashed"),
    ]


def _fig5(opt: FigureOptions) -> list[Curve]:
    n = opt.photons or 1e4
    out = []
    for variant, style in ((attacks.QUAD_SQUEEZED_PLUS, "solid"), (attacks.TWO_MODE_BOTH, "dotted")):
        spec = SweepSpec("stokes-with-S0", opt.grid, 1.0, photons=n, variant=variant, solver=opt.solver)
        out.append(Curve(variant.replace("-", "_"), variant, attack_curve(attacks.GAUSSIAN_SIMPLIFIED, spec, opt.workers),
                         "attack", style))
    out.append(Curve("quadrature", "renormalized quadrature boundary",
                     renormalized_quadrature_curve(opt.grid, n, solver=opt.solver, workers=opt.workers), "reference",
                     "dashed"))
    return out


FIGURES = {
    "fig1": (_fig1, "Quadrature measurements", "quadrature variance"),
    "fig3": (_fig3, "Stokes measurements without S1", "Stokes variance"),
    "fig4": (_fig4, "Two-axis twisting attack", "Stokes variance"),
    "fig5": (_fig5, "Gaussian attacks at fixed total intensity", "Stokes variance"),
    "fig6": (_fig6, "Stokes curves at half transmission", "Stokes variance"),
}


def build_figure(name: str, out_dir: str | Path, opt: FigureOptions = FigureOptions()) -> list[Path]:
    if name not in FIGURES:
        raise KeyError(f"unknown figure {name!r}; valid names: {', '.join(FIGURES)}")
    fn, title, ylabel = FIGURES[name]
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    curves = fn(opt)
    written = []
    series = []
    for c in curves:
        path = out_dir / f"{name}_{c.name}.csv"
        write_rows(path, c.columns, c.rows)
        written.append(path)
        xs, ys = c.points()
        series.append(Series(c.label, xs, ys, c.style, markers=c.kind == "boundary"))
    written.append(write_svg(out_dir / f"{name}.svg", series, title, "overlap", ylabel))
    return written
