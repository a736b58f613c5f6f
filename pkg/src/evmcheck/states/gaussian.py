"""Two-mode Gaussian states and their analytic Stokes moments.

Quadrature vector ordering is ``(x_s, p_s, x_lo, p_lo)`` and the vacuum
covariance is ``I/2``.  Stokes operators are quadratic forms in these
quadratures, so all their first and second moments follow from the
displacement and covariance via Wick's theorem for ordered products.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .fock import QuadratureMoments, StokesMoments

OMEGA = np.array(
    [
        [0.0, 1.0, 0.0, 0.0],
        [-1.0, 0.0, 0.0, 0.0],
        [0.0, 0.0, 0.0, 1.0],
        [0.0, 0.0, -1.0, 0.0],
    ]
)
PHYSICAL_TOL = 1e-10


@dataclass(frozen=True)
class GaussianTwoModeState:
    displacement: np.ndarray
    covariance: np.ndarray

    def __post_init__(self):
        d = np.asarray(self.displacement, dtype=float).reshape(4)
        v = np.asarray(self.covariance, dtype=float).reshape(4, 4)
        if not np.allclose(v, v.T, atol=1e-12):
            raise ValueError("covariance must be symmetric")
        object.__setattr__(self, "displacement", d)
        object.__setattr__(self, "covariance", v)

    def is_physical(self, tol: float = PHYSICAL_TOL) -> bool:
        lam = np.linalg.eigvalsh(self.covariance + 0.5j * OMEGA)
        return bool(lam.min() >= -tol)

    @property
    def two_point(self) -> np.ndarray:
        """G_ij = <dr_i dr_j> for centred quadratures (ordered, complex)."""
        return self.covariance + 0.5j * OMEGA


def vacuum() -> GaussianTwoModeState:
    return GaussianTwoModeState(np.zeros(4), 0.5 * np.eye(4))


# --- symplectic (Heisenberg) maps ------------------------------------------

def _embed(block: np.ndarray, mode: int) -> np.ndarray:
    S = np.eye(4)
    i = 2 * mode
    S[i : i + 2, i : i + 2] = block
    return S


def squeeze_symplectic(r: float, mode: int) -> np.ndarray:
    # r > 0 contracts x
    return _embed(np.diag([math.exp(-r), math.exp(r)]), mode)


def phase_symplectic(phi: float, mode: int) -> np.ndarray:
    c, s = math.cos(phi), math.sin(phi)
    return _embed(np.array([[c, s], [-s, c]]), mode)


def two_mode_squeeze_symplectic(r: float) -> np.ndarray:
    ch, sh = math.cosh(r), math.sinh(r)
    return np.array(
        [
            [ch, 0.0, -sh, 0.0],
            [0.0, ch, 0.0, sh],
            [-sh, 0.0, ch, 0.0],
            [0.0, sh, 0.0, ch],
        ]
    )


def displacement_vector(beta_s: complex, beta_lo: complex) -> np.ndarray:
    r2 = math.sqrt(2.0)
    return np.array([r2 * beta_s.real, r2 * beta_s.imag, r2 * beta_lo.real, r2 * beta_lo.imag])


def displaced_squeezed_gaussian(
    beta_s: complex = 0.0,
    beta_lo: complex = 0.0,
    r_signal: float = 0.0,
    r_two_mode: float = 0.0,
) -> GaussianTwoModeState:
    """D_lo(beta_lo) D_s(beta_s) S_s(r_signal) S_{lo,s}(r_two_mode) |0,0>."""
    S = squeeze_symplectic(r_signal, 0) @ two_mode_squeeze_symplectic(r_two_mode)
    V = 0.5 * S @ S.T
    return GaussianTwoModeState(displacement_vector(complex(beta_s), complex(beta_lo)), V)


def random_gaussian_layers(
    beta_s: complex,
    beta_lo: complex,
    r_signal: float,
    r_lo: float,
    r_two_mode: float,
    phi_signal: float,
    phi_lo: float,
) -> GaussianTwoModeState:
    """Same gate sequence as :func:`evmcheck.states.fock.evolve_two_mode`."""
    # later gates multiply on the left in the Heisenberg picture
    S = (
        phase_symplectic(phi_lo, 1)
        @ phase_symplectic(phi_signal, 0)
        @ squeeze_symplectic(r_lo, 1)
        @ squeeze_symplectic(r_signal, 0)
        @ two_mode_squeeze_symplectic(r_two_mode)
    )
    V = 0.5 * S @ S.T
    return GaussianTwoModeState(displacement_vector(complex(beta_s), complex(beta_lo)), V)


# --- moments ---------------------------------------------------------------

def quadrature_moments_gaussian(state: GaussianTwoModeState, mode: int = 0) -> QuadratureMoments:
    if mode not in (0, 1):
        raise IndexError(f"mode {mode} out of range")
    i = 2 * mode
    d = state.displacement[i : i + 2]
    V = state.covariance[i : i + 2, i : i + 2]
    return QuadratureMoments(
        mean_x=float(d[0]),
        mean_p=float(d[1]),
        x2=float(V[0, 0] + d[0] ** 2),
        p2=float(V[1, 1] + d[1] ** 2),
        sym_xp=float(V[0, 1] + d[0] * d[1]),
    )


def _stokes_forms() -> tuple[list[np.ndarray], np.ndarray]:
    """Symmetric matrices M_k and offsets c_k with S_k = r^T M_k r + c_k."""
    M0 = 0.5 * np.eye(4)
    M1 = 0.5 * np.diag([1.0, 1.0, -1.0, -1.0])
    M2 = np.zeros((4, 4))
    M2[0, 2] = M2[2, 0] = M2[1, 3] = M2[3, 1] = 0.5
    M3 = np.zeros((4, 4))
    # S3 = x_s p_lo - p_s x_lo
    M3[0, 3] = M3[3, 0] = 0.5
    M3[1, 2] = M3[2, 1] = -0.5
    return [M0, M1, M2, M3], np.array([-1.0, 0.0, 0.0, 0.0])


STOKES_FORMS, STOKES_OFFSETS = _stokes_forms()
_FORM_STACK = np.array(STOKES_FORMS, dtype=float)


def stokes_moments_gaussian(state: GaussianTwoModeState) -> StokesMoments:
    """Analytic Stokes moments of a Gaussian state.

    For quadratic forms Q_a = r^T M_a r the ordered Wick expansion gives
    <Q_a Q_b> = <Q_a><Q_b> + 4 u_a^T G u_b + 2 tr(M_a G M_b G^T),
    with u = M d and G the ordered two-point function.
    """
    if not state.is_physical():
        raise ValueError("covariance violates the uncertainty relation")
    d, V, G = state.displacement, state.covariance, state.two_point
    forms = _FORM_STACK
    mean = np.einsum("aij,ji->a", forms, V) + np.einsum("i,aij,j->a", d, forms, d) + STOKES_OFFSETS
    u = forms @ d
    left = forms @ G
    right = forms @ G.T
    conn = 4.0 * (u @ G @ u.T) + 2.0 * np.einsum("aij,bji->ab", left, right)
    second = np.outer(mean, mean) + conn
    return StokesMoments(mean=np.real(mean), second=second)
