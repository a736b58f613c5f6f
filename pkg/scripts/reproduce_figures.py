"""Write the CSV curves and SVG overlay for every figure into one directory."""

from __future__ import annotations

import argparse
import time
from dataclasses import dataclass

from evmcheck.figures import FIGURES, FigureOptions, build_figure
from evmcheck.sweeps import Grid


@dataclass
class Config:
    out_dir: str = "figures"
    grid: str = "0.05:0.95:0.05"
    alpha_lo: float = 100.0
    figures: tuple[str, ...] = tuple(FIGURES)


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out-dir", default=Config.out_dir)
    ap.add_argument("--grid", default=Config.grid)
    ap.add_argument("--alpha-lo", type=float, default=Config.alpha_lo)
    ap.add_argument("names", nargs="*", default=list(Config.figures))
    a = ap.parse_args()
    cfg = Config(a.out_dir, a.grid, a.alpha_lo, tuple(a.names))
    opts = FigureOptions(Grid.parse(cfg.grid), cfg.alpha_lo)
    for name in cfg.figures:
        t0 = time.perf_counter()
        paths = build_figure(name, cfg.out_dir, opts)
        print(f"{name}: {len(paths)} files in {time.perf_counter() - t0:.0f}s")


if __name__ == "__main__":
    main()
