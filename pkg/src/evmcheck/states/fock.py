"""Truncated Fock-space backend.

Single-mode states are vectors of length ``cutoff + 1``; two-mode states are
stored on the ``(cutoff + 1, cutoff + 1)`` grid indexed ``[n_signal, n_lo]``.
This backend is slow but direct, and is used as the brute-force reference for
the Gaussian moment engine.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import expm_multiply

NORM_TOL = 1e-10
DEFAULT_LEAKAGE = 1e-8


@dataclass(frozen=True)
class FockVector:
    cutoff: int
    amplitudes: np.ndarray
    modes: int = 1
    leakage_bound: float = DEFAULT_LEAKAGE

    def __post_init__(self):
        amps = np.asarray(self.amplitudes, dtype=complex)
        shape = (self.cutoff + 1,) * self.modes
        if amps.shape != shape:
            raise ValueError(f"amplitudes have shape {amps.shape}, expected {shape}")
        norm = np.linalg.norm(amps)
        if abs(norm - 1.0) > NORM_TOL:
            raise ValueError(f"state is not normalized (norm = {norm:.12g})")
        object.__setattr__(self, "amplitudes", amps)

    @property
    def dim(self) -> int:
        return (self.cutoff + 1) ** self.modes

    def flat(self) -> np.ndarray:
        return self.amplitudes.reshape(-1)

    def tail_mass(self, levels: int = 2) -> float:
        """Probability in the top ``levels`` number states of any mode."""
        p = np.abs(self.amplitudes) ** 2
        if self.modes == 1:
            return float(p[-levels:].sum())
        top = p[-levels:, :].sum() + p[:, -levels:].sum() - p[-levels:, -levels:].sum()
        return float(top)


def required_cutoff(mean_photons: float) -> int:
    """Cutoff keeping the Poisson tail of a coherent state well below 1e-8."""
    return int(math.ceil(mean_photons + 6.0 * math.sqrt(mean_photons) + 10.0))


def coherent_amplitudes(alpha: complex, cutoff: int) -> np.ndarray:
    n = np.arange(cutoff + 1)
    log_fact = np.array([math.lgamma(k + 1.0) for k in n])
    if alpha == 0:
        c = np.zeros(cutoff + 1, dtype=complex)
        c[0] = 1.0
        return c
    mag = abs(alpha)
    log_mag = n * math.log(mag) - 0.5 * log_fact - 0.5 * mag**2
    phase = np.exp(1j * n * np.angle(alpha))
    c = np.exp(log_mag) * phase
    return c / np.linalg.norm(c)


def coherent_fock(alpha: complex, cutoff: int) -> FockVector:
    """Coherent state |alpha> truncated at ``cutoff``.

    The cutoff must satisfy ``cutoff >= ceil(|a|^2 + 6|a| + 10)``; otherwise
    the Poisson tail is not negligible and a ValueError carrying the minimum
    cutoff is raised.
    """
    need = int(math.ceil(abs(alpha) ** 2 + 6 * abs(alpha) + 10))
    if alpha != 0 and cutoff < need:
        raise ValueError(f"cutoff {cutoff} too small for |alpha|={abs(alpha):.4g}; need cutoff >= {need}")
    return FockVector(cutoff, coherent_amplitudes(alpha, cutoff))


def two_mode_product(signal: FockVector, lo: FockVector) -> FockVector:
    if signal.cutoff != lo.cutoff:
        raise ValueError("both modes need the same cutoff")
    amps = np.outer(signal.amplitudes, lo.amplitudes)
    return FockVector(signal.cutoff, amps, modes=2)


def number_state(n: int, cutoff: int) -> FockVector:
    c = np.zeros(cutoff + 1, dtype=complex)
    c[n] = 1.0
    return FockVector(cutoff, c)


# --- operators -------------------------------------------------------------

def annihilation(cutoff: int) -> sp.csr_matrix:
    return sp.diags(np.sqrt(np.arange(1, cutoff + 1, dtype=float)), 1, format="csr").astype(complex)


def quadrature_ops(cutoff: int) -> tuple[sp.csr_matrix, sp.csr_matrix]:
    a = annihilation(cutoff)
    ad = a.conj().T
    x = (ad + a) / math.sqrt(2)
    p = 1j * (ad - a) / math.sqrt(2)
    return x.tocsr(), p.tocsr()


def two_mode_ladders(cutoff: int) -> tuple[sp.csr_matrix, sp.csr_matrix]:
    a = annihilation(cutoff)
    eye = sp.identity(cutoff + 1, dtype=complex, format="csr")
    return sp.kron(a, eye, format="csr"), sp.kron(eye, a, format="csr")


def stokes_ops_fock(cutoff: int) -> list[sp.csr_matrix]:
    """[S0, S1, S2, S3] on the two-mode truncated space (signal, LO)."""
    a_s, a_l = two_mode_ladders(cutoff)
    ad_s, ad_l = a_s.conj().T, a_l.conj().T
    n_s, n_l = ad_s @ a_s, ad_l @ a_l
    s0 = n_s + n_l
    s1 = n_s - n_l
    s2 = ad_s @ a_l + ad_l @ a_s
    s3 = 1j * (ad_l @ a_s - ad_s @ a_l)
    return [m.tocsr() for m in (s0, s1, s2, s3)]


# --- moments ---------------------------------------------------------------

@dataclass(frozen=True)
class QuadratureMoments:
    mean_x: float
    mean_p: float
    x2: float
    p2: float
    sym_xp: float

    @property
    def xp(self) -> complex:
        return self.sym_xp + 0.5j

    @property
    def px(self) -> complex:
        return self.sym_xp - 0.5j

    @property
    def var_x(self) -> float:
        return self.x2 - self.mean_x**2

    @property
    def var_p(self) -> float:
        return self.p2 - self.mean_p**2


@dataclass(frozen=True)
class StokesMoments:
    """First moments, product moments <S_i S_j> and variances for S0..S3."""

    mean: np.ndarray
    second: np.ndarray
    warnings: tuple[str, ...] = field(default=())

    @property
    def var(self) -> np.ndarray:
        return np.real(np.diag(self.second)) - self.mean**2

    def covariance(self) -> np.ndarray:
        sym = 0.5 * (self.second + self.second.T)
        return np.real(sym) - np.outer(self.mean, self.mean)


def _single_mode_view(state: FockVector, mode: int) -> np.ndarray:
    """Reduced density matrix of one mode."""
    if state.modes == 1:
        if mode != 0:
            raise IndexError("single-mode state has only mode 0")
        v = state.amplitudes
        return np.outer(v, v.conj())
    if mode not in (0, 1):
        raise IndexError(f"mode {mode} out of range")
    A = state.amplitudes if mode == 0 else state.amplitudes.T
    return A @ A.conj().T


def quadrature_moments_fock(state: FockVector, mode: int = 0) -> QuadratureMoments:
    rho = _single_mode_view(state, mode)
    x, p = quadrature_ops(state.cutoff)
    x, p = x.toarray(), p.toarray()

    def ev(op):
        return np.trace(rho @ op)

    sym = 0.5 * (ev(x @ p) + ev(p @ x))
    return QuadratureMoments(
        mean_x=float(np.real(ev(x))),
        mean_p=float(np.real(ev(p))),
        x2=float(np.real(ev(x @ x))),
        p2=float(np.real(ev(p @ p))),
        sym_xp=float(np.real(sym)),
    )


def stokes_moments_fock(state: FockVector, leakage_bound: float | None = None) -> StokesMoments:
    """Stokes moments by direct sparse application of S0..S3."""
    if state.modes != 2:
        raise ValueError("Stokes moments need a two-mode state")
    bound = state.leakage_bound if leakage_bound is None else leakage_bound
    psi = state.flat()
    applied = [op @ psi for op in stokes_ops_fock(state.cutoff)]
    mean = np.array([np.real(np.vdot(psi, v)) for v in applied])
    second = np.array([[np.vdot(u, v) for v in applied] for u in applied])
    warnings = ()
    tail = state.tail_mass()
    if tail > bound:
        warnings = (f"truncation leakage {tail:.3g} exceeds bound {bound:.3g}",)
    return StokesMoments(mean=mean, second=second, warnings=warnings)


# --- Gaussian unitaries in the number basis --------------------------------

def evolve_two_mode(
    cutoff: int,
    beta_s: complex = 0.0,
    beta_lo: complex = 0.0,
    r_signal: float = 0.0,
    r_lo: float = 0.0,
    r_two_mode: float = 0.0,
    phi_signal: float = 0.0,
    phi_lo: float = 0.0,
    work_cutoff: int | None = None,
) -> FockVector:
    """Prepare D_lo D_s R_lo R_s S_lo S_s S_2 |0,0> numerically.

    The evolution runs on a larger ``work_cutoff`` grid and is truncated back
    to ``cutoff`` with renormalization.  The ordering of gates matches
    :func:`evmcheck.states.gaussian.random_gaussian_layers`.
    """
    wc = work_cutoff or cutoff + 15
    a_s, a_l = two_mode_ladders(wc)
    ad_s, ad_l = a_s.conj().T, a_l.conj().T
    psi = np.zeros((wc + 1) ** 2, dtype=complex)
    psi[0] = 1.0
    gens = [
        r_two_mode * (a_s @ a_l - ad_s @ ad_l),
        0.5 * r_signal * (a_s @ a_s - ad_s @ ad_s),
        0.5 * r_lo * (a_l @ a_l - ad_l @ ad_l),
        -1j * phi_signal * (ad_s @ a_s),
        -1j * phi_lo * (ad_l @ a_l),
        beta_s * ad_s - np.conj(beta_s) * a_s,
        beta_lo * ad_l - np.conj(beta_lo) * a_l,
    ]
    for g in gens:
        if g.nnz:
            psi = expm_multiply(g.tocsc(), psi)
    grid = psi.reshape(wc + 1, wc + 1)[: cutoff + 1, : cutoff + 1]
    grid = grid / np.linalg.norm(grid)
    return FockVector(cutoff, grid, modes=2)
