"""Randomized property suites behind ``evm-verify selftest``."""

from __future__ import annotations

import math
import time
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .channels import alpha_from_overlap, quadrature_record_at
from .evm import (
    build_quadrature_evm,
    check_symmetric_form_equivalence,
    evm_from_density,
    evm_from_pure,
    swap_offdiagonal_blocks,
)
from .feasibility import SEPARABLE, SolverConfig, decide
from .states import fock, gaussian, spin


@dataclass
class SuiteResult:
    name: str
    passed: bool
    detail: str
    seconds: float = 0.0

    def line(self) -> str:
        return f"[{'PASS' if self.passed else 'FAIL'}] {self.name}: {self.detail} ({self.seconds:.1f}s)"


def _bob_ops(cutoff: int) -> list[np.ndarray]:
    x, p = fock.quadrature_ops(cutoff)
    return [np.eye(cutoff + 1), x.toarray(), p.toarray()]


def _random_pure(rng, dim: int) -> np.ndarray:
    v = rng.normal(size=dim) + 1j * rng.normal(size=dim)
    return v / np.linalg.norm(v)


def separable_states(count: int = 1000, seed: int = 0, cutoff: int = 8) -> SuiteResult:
    """Random qubit (x) mode product mixtures give PSD EVMs and PSD block transposes."""
    rng = np.random.default_rng(seed)
    ops = _bob_ops(cutoff)
    dim = cutoff + 1
    worst = np.inf
    for _ in range(count):
        terms = rng.integers(1, 4)
        w = rng.dirichlet(np.ones(terms))
        rho = np.zeros((2 * dim, 2 * dim), dtype=complex)
        for wk in w:
            a, b = _random_pure(rng, 2), _random_pure(rng, dim)
            v = np.kron(a, b)
            rho += wk * np.outer(v, v.conj())
        chi = evm_from_density(rho, ops)
        worst = min(worst, np.linalg.eigvalsh(chi).min(), np.linalg.eigvalsh(swap_offdiagonal_blocks(chi)).min())
    return SuiteResult("separable states", worst >= -1e-9, f"{count} states, min eigenvalue {worst:.3e}")


def source_states(count: int = 200, seed: int = 1, cutoff: int = 40) -> SuiteResult:
    """(|0>|a> + |1>|-a>)/sqrt2 with random overlap and phase: block transpose not PSD."""
    rng = np.random.default_rng(seed)
    ops = _bob_ops(cutoff)
    worst = -np.inf
    for _ in range(count):
        s = rng.uniform(0.05, 0.95)
        a = alpha_from_overlap(s) * np.exp(1j * rng.uniform(0, 2 * np.pi))
        plus = fock.coherent_fock(a, cutoff).flat()
        minus = fock.coherent_fock(-a, cutoff).flat()
        chi = evm_from_pure([plus, minus], ops)
        worst = max(worst, np.linalg.eigvalsh(swap_offdiagonal_blocks(chi)).min())
    return SuiteResult("entangled source states", worst <= -1e-6,
                       f"{count} states, largest min eigenvalue of the transpose {worst:.3e}")


def symmetric_form_equivalence(count: int = 200, seed: int = 2) -> SuiteResult:
    """Symmetrized-form conditions agree with the two PSD conditions on every record."""
    rng = np.random.default_rng(seed)
    config = SolverConfig()
    agree, worst = 0, 0.0
    for k in range(count):
        s = rng.uniform(0.05, 0.95)
        eta = rng.uniform(0.3, 1.0)
        vx, vp = rng.uniform(0.4, 1.2, size=2)
        rec = quadrature_record_at(s, eta, vx, vp, heterodyne=bool(k % 2))
        verdict = decide(build_quadrature_evm(rec), config)
        params = verdict.witness_params if verdict.status == SEPARABLE else None
        rep = check_symmetric_form_equivalence(rec, trials=4, seed=seed + k, params=params, scale=0.2, tol=1e-7)
        agree += rep.agreements == rep.trials
        worst = max(worst, rep.max_identity_error)
    ok = agree == count and worst < 1e-9
    return SuiteResult("symmetric-form equivalence", ok, f"{agree}/{count} records agree, identity error {worst:.1e}")


def gaussian_vs_fock(count: int = 100, seed: int = 3, cutoff: int = 40) -> SuiteResult:
    """Analytic Gaussian Stokes moments against truncated Fock numerics."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(count):
        # mean quadrature vector bounded by 2 in norm
        v = rng.normal(size=4)
        v *= rng.uniform(0, 2) / np.linalg.norm(v)
        bs, bl = complex(v[0], v[1]) / math.sqrt(2), complex(v[2], v[3]) / math.sqrt(2)
        # combined squeezing (signal, LO, two-mode) bounded by 0.5 in norm
        r = rng.normal(size=3)
        r *= rng.uniform(0, 0.5) / np.linalg.norm(r)
        ph = rng.uniform(0, 2 * np.pi, size=2)
        num = fock.stokes_moments_fock(fock.evolve_two_mode(cutoff, bs, bl, *r, *ph))
        ana = gaussian.stokes_moments_gaussian(gaussian.random_gaussian_layers(bs, bl, *r, *ph))
        worst = max(worst, np.abs(num.mean - ana.mean).max(), np.abs(num.second - ana.second).max())
    return SuiteResult("Gaussian vs Fock moments", worst <= 1e-6, f"{count} states, max deviation {worst:.2e}")


def stokes_identity(spins=(0.5, 1, 25, 50), fock_cutoff: int = 12) -> SuiteResult:
    """S1^2 + S2^2 + S3^2 = S0 (S0 + 2), on spin sectors and on the Fock grid."""
    worst = 0.0
    for j in spins:
        s0, s1, s2, s3 = spin.spin_operators(j).stokes()
        lhs = s1 @ s1 + s2 @ s2 + s3 @ s3
        worst = max(worst, np.abs(lhs - s0 @ (s0 + 2 * np.eye(len(s0)))).max())
    s0, s1, s2, s3 = (S.toarray() for S in fock.stokes_ops_fock(fock_cutoff))
    lhs = s1 @ s1 + s2 @ s2 + s3 @ s3
    rhs = s0 @ (s0 + 2 * np.eye(len(s0)))
    # truncation only spoils sectors that leave the grid
    n = np.add.outer(np.arange(fock_cutoff + 1), np.arange(fock_cutoff + 1)).reshape(-1)
    keep = n <= fock_cutoff - 1
    worst = max(worst, np.abs((lhs - rhs)[np.ix_(keep, keep)]).max())
    return SuiteResult("Stokes operator identity", worst <= 1e-9, f"j in {list(spins)}, max deviation {worst:.1e}")


def unitarity(seed: int = 4, spins=(0.5, 1, 25, 50)) -> SuiteResult:
    rng = np.random.default_rng(seed)
    worst = 0.0
    for j in spins:
        for _ in range(3):
            for U in (spin.two_axis_twist(j, rng.uniform(-1, 1)),
                      spin.spin_rotation(j, rng.uniform(0, np.pi), rng.uniform(0, 2 * np.pi))):
                worst = max(worst, np.abs(U.conj().T @ U - np.eye(len(U))).max())
    for _ in range(5):
        S = (gaussian.two_mode_squeeze_symplectic(rng.uniform(-1, 1))
             @ gaussian.squeeze_symplectic(rng.uniform(-1, 1), 0)
             @ gaussian.phase_symplectic(rng.uniform(0, 6), 1))
        worst = max(worst, np.abs(S @ gaussian.OMEGA @ S.T - gaussian.OMEGA).max())
    return SuiteResult("unitarity", worst <= 1e-10, f"max deviation from identity {worst:.1e}")


SUITES: dict[str, Callable[[], SuiteResult]] = {
    "separable": separable_states,
    "source": source_states,
    "equivalence": symmetric_form_equivalence,
    "gaussian-fock": gaussian_vs_fock,
    "stokes-identity": stokes_identity,
    "unitarity": unitarity,
}


def run_all(names=None) -> list[SuiteResult]:
    out = []
    for name in names or SUITES:
        t0 = time.perf_counter()
        res = SUITES[name]()
        res.seconds = time.perf_counter() - t0
        out.append(res)
    return out
