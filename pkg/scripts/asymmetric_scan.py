"""Boundary and attack along rays of unequal excess noise in x and p."""

from __future__ import annotations

import argparse
import math
from dataclasses import dataclass

from evmcheck.attacks import quadrature_attack_along
from evmcheck.channels import quadrature_record_at
from evmcheck.feasibility import boundary_search


@dataclass
class Config:
    overlap: float = 0.5
    eta: float = 1.0
    rays: int = 9


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--overlap", type=float, default=Config.overlap)
    ap.add_argument("--eta", type=float, default=Config.eta)
    ap.add_argument("--rays", type=int, default=Config.rays)
    a = ap.parse_args()
    cfg = Config(a.overlap, a.eta, a.rays)
    print("angle_deg,boundary_x,boundary_p,attack_x,attack_p")
    for k in range(cfg.rays):
        ang = (k + 0.5) * (math.pi / 2) / cfg.rays
        d = (math.cos(ang), math.sin(ang))
        _, ax, ap_ = quadrature_attack_along(cfg.overlap, cfg.eta, d)
        res = boundary_search(lambda t: quadrature_record_at(cfg.overlap, cfg.eta, 0.5 + t * d[0], 0.5 + t * d[1]),
                              0.0, 2.0 / min(d), abs_width=1e-6)
        print(f"{math.degrees(ang):.2f},{0.5 + res.variance * d[0]:.6f},{0.5 + res.variance * d[1]:.6f},"
              f"{ax:.6f},{ap_:.6f}")


if __name__ == "__main__":
    main()
