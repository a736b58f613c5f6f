"""Ratio of Stokes boundaries at two transmissions, per overlap."""

from __future__ import annotations

import argparse
from dataclasses import dataclass

from evmcheck.sweeps import Grid, SweepSpec, boundary_curve


@dataclass
class Config:
    grid: str = "0.1:0.9:0.2"
    eta: float = 0.5
    alpha_lo: float = 100.0
    modes: tuple[str, ...] = ("stokes-bare", "stokes-with-S0", "stokes-with-S1")


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--grid", default=Config.grid)
    ap.add_argument("--eta", type=float, default=Config.eta)
    ap.add_argument("--alpha-lo", type=float, default=Config.alpha_lo)
    a = ap.parse_args()
    cfg = Config(a.grid, a.eta, a.alpha_lo)
    print("mode,overlap,boundary_full,boundary_lossy,ratio,ratio_over_eta_squared")
    for mode in cfg.modes:
        full = boundary_curve(SweepSpec(mode, Grid.parse(cfg.grid), 1.0, cfg.alpha_lo))
        lossy = boundary_curve(SweepSpec(mode, Grid.parse(cfg.grid), cfg.eta, cfg.alpha_lo))
        for f, l in zip(full, lossy):
            r = l["boundary_variance"] / f["boundary_variance"]
            print(f"{mode},{f['overlap']:g},{f['boundary_variance']:.8g},{l['boundary_variance']:.8g},{r:.8g},"
                  f"{r / cfg.eta**2:.8g}")


if __name__ == "__main__":
    main()
