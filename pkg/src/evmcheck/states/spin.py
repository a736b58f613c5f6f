"""Spin-j algebra in the Schwinger picture.

Basis index k holds |j, m = j - k>, so J_z is diagonal with decreasing
entries.  The Stokes operators map as S1, S2, S3 = 2 Jz, 2 Jx, 2 Jy and
S0 = 2j on the fixed-photon-number sector.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

J_MAX = 200
NORM_TOL = 1e-10


def _check_j(j: float, j_max: float = J_MAX) -> float:
    twoj = 2 * j
    if abs(twoj - round(twoj)) > 1e-12 or twoj < 0:
        raise ValueError(f"j={j} is not a non-negative half-integer")
    if j > j_max:
        raise ValueError(f"j={j} exceeds j_max={j_max}; matrices of dimension {int(twoj) + 1} requested")
    return round(twoj) / 2


@dataclass(frozen=True)
class SpinOperators:
    j: float
    jx: np.ndarray
    jy: np.ndarray
    jz: np.ndarray
    jp: np.ndarray
    jm: np.ndarray

    @property
    def dim(self) -> int:
        return self.jz.shape[0]

    def stokes(self) -> list[np.ndarray]:
        """[S0, S1, S2, S3] for photon number 2j."""
        s0 = 2 * self.j * np.eye(self.dim)
        return [s0, 2 * self.jz, 2 * self.jx, 2 * self.jy]


@lru_cache(maxsize=512)
def spin_operators(j: float, j_max: float = J_MAX) -> SpinOperators:
    j = _check_j(j, j_max)
    dim = int(round(2 * j)) + 1
    m = j - np.arange(dim)
    jp = np.zeros((dim, dim))
    # J+ |m> -> |m+1>, i.e. from index k to k-1
    for k in range(1, dim):
        mk = m[k]
        jp[k - 1, k] = np.sqrt(j * (j + 1) - mk * (mk + 1))
    jm = jp.T.copy()
    jx = 0.5 * (jp + jm)
    jy = -0.5j * (jp - jm)
    jz = np.diag(m)
    for arr in (jp, jm, jx, jy, jz):
        arr.setflags(write=False)
    return SpinOperators(j, jx, jy, jz, jp, jm)


@dataclass(frozen=True)
class SpinState:
    j: float
    amplitudes: np.ndarray

    def __post_init__(self):
        amps = np.asarray(self.amplitudes, dtype=complex)
        if amps.shape != (int(round(2 * self.j)) + 1,):
            raise ValueError("amplitude length must be 2j+1")
        if abs(np.linalg.norm(amps) - 1) > NORM_TOL:
            raise ValueError("spin state is not normalized")
        object.__setattr__(self, "amplitudes", amps)


def pole_state(j: float) -> SpinState:
    """|j, j>."""
    v = np.zeros(int(round(2 * j)) + 1, dtype=complex)
    v[0] = 1.0
    return SpinState(j, v)


def unitary_from_hermitian(H: np.ndarray, angle: float) -> np.ndarray:
    """exp(-i angle H) via the eigendecomposition of Hermitian H."""
    w, V = np.linalg.eigh(H)
    return (V * np.exp(-1j * angle * w)) @ V.conj().T


@lru_cache(maxsize=512)
def _twist_eig(j: float) -> tuple[np.ndarray, np.ndarray]:
    ops = spin_operators(j)
    jp2 = ops.jp @ ops.jp
    # i (J+^2 - J-^2) is Hermitian
    H = 1j * (jp2 - jp2.T)
    return np.linalg.eigh(H)


def two_axis_twist(j: float, mu: float) -> np.ndarray:
    """U(mu) = exp(-(mu/8)(J+^2 - J-^2)).

    With H = i(J+^2 - J-^2) the exponent is (i mu / 8) H, so U = exp(-i(-mu/8)H).
    """
    if not np.isfinite(mu):
        raise ValueError("twist strength must be finite")
    w, V = _twist_eig(_check_j(j))
    return (V * np.exp(1j * (mu / 8.0) * w)) @ V.conj().T


def twisted_pole_state(j: float, mu: float) -> np.ndarray:
    """U(mu)|j, j>, without forming the full unitary."""
    if not np.isfinite(mu):
        raise ValueError("twist strength must be finite")
    w, V = _twist_eig(_check_j(j))
    return V @ (np.exp(1j * (mu / 8.0) * w) * V[0].conj())


def spin_rotation(j: float, theta: float, phi: float) -> np.ndarray:
    """R(theta, phi) = exp(-i theta (Jx sin(phi) - Jy cos(phi)))."""
    if not (np.isfinite(theta) and np.isfinite(phi)):
        raise ValueError("rotation angles must be finite")
    ops = spin_operators(_check_j(j))
    G = ops.jx * np.sin(phi) - ops.jy * np.cos(phi)
    return unitary_from_hermitian(G, theta)


def expect(op: np.ndarray, state: np.ndarray) -> complex:
    return np.vdot(state, op @ state)


@dataclass(frozen=True)
class PoleMoments:
    """Moments of U(mu)|j,j> needed to rotate analytically about y.

    ``mean`` holds <Jx>, <Jy>, <Jz>; ``second`` the symmetrized second moment
    matrix 1/2 <{J_a, J_b}> in the (x, y, z) order.
    """

    j: float
    mu: float
    mean: np.ndarray
    second: np.ndarray


def twisted_pole_moments(j: float, mu: float) -> PoleMoments:
    ops = spin_operators(j)
    psi = twisted_pole_state(j, mu)
    J = [ops.jx, ops.jy, ops.jz]
    applied = [Ja @ psi for Ja in J]
    mean = np.array([np.real(np.vdot(psi, v)) for v in applied])
    second = np.array([[np.real(np.vdot(u, v)) for v in applied] for u in applied])
    return PoleMoments(j, mu, mean, second)


def rotate_y_moments(pm: PoleMoments, theta: float) -> tuple[np.ndarray, np.ndarray]:
    """Moments of R(theta, 0) U(mu)|j,j>, with R(theta, 0) = exp(i theta Jy).

    Returns (mean, second) in the (x, y, z) order.
    """
    # R^dag J R = O J for the rotation exp(i theta Jy) (rotation by -theta about y)
    c, s = np.cos(theta), np.sin(theta)
    O = np.array([[c, 0.0, -s], [0.0, 1.0, 0.0], [s, 0.0, c]])
    return O @ pm.mean, O @ pm.second @ O.T
