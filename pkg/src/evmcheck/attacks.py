"""Intercept-resend attack families.

Each attack builds Eve's resent states, mixes them with the minimum-error
probability e(s), and reports the smallest variance Bob sees while the first
moments (and, where monitored, the total intensity) match the record.  A
successful attack is a constructive separable model of the data.

Mixtures are handled through their component moments: first moments and
second moments are linear in the mixture weights, so the between-component
variance needs no separate formula.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy.optimize import brentq, minimize, minimize_scalar
from scipy.stats import qmc

from .records import MeasurementRecord
from .states import spin
from .states.gaussian import displaced_squeezed_gaussian, stokes_moments_gaussian

MIN_ERROR = "min-error-squeezed"
EQUAL_AMPLITUDE = "equal-amplitude"
TWO_AXIS = "two-axis"
GAUSSIAN_SIMPLIFIED = "gaussian-simplified"
QUAD_SQUEEZED_PLUS = "quad-squeezed-plus"
TWO_MODE_BOTH = "two-mode-squeezed-both"


RESIDUAL_TOL = 1e-6


class AttackError(RuntimeError):
    """The attack family cannot reproduce the record's first moments."""


@dataclass
class AttackResult:
    family: str
    params: dict
    means: dict
    variances: dict
    residuals: dict
    status: str = "ok"
    notes: dict = field(default_factory=dict)

    @property
    def achieved_variance(self) -> float:
        """Common variance Bob observes once Eve tops up the smaller one."""
        return max(self.variances.values())

    @property
    def max_residual(self) -> float:
        return max(self.residuals.values(), default=0.0)


def min_error_probability(s: float) -> float:
    if not 0.0 <= s <= 1.0:
        raise ValueError(f"overlap {s} outside [0, 1]")
    return 0.5 - 0.5 * math.sqrt(1.0 - s * s)


def _f_factor(s: float, eta: float) -> float:
    if s <= 0.0:
        return 0.0
    if s >= 1.0:
        return 0.5 * eta
    return eta * s * s * math.log(s) / (s * s - 1.0)


def quadrature_attack_analytic(s: float, eta: float = 1.0) -> float:
    """Bob's quadrature variance under the minimum-error squeezed attack."""
    f = _f_factor(s, eta)
    return 0.5 * (f + math.sqrt(f * f + 1.0))


# --- quadrature ------------------------------------------------------------

def quadrature_mixture(beta: complex, r: float, e: float) -> dict:
    """Moments of (1-e) D(beta)S(r)|0> + e D(-beta)S(r)|0>."""
    between = 8.0 * e * (1.0 - e)
    return {
        "mean_x": (1 - 2 * e) * math.sqrt(2) * beta.real,
        "mean_p": (1 - 2 * e) * math.sqrt(2) * beta.imag,
        "var_x": math.exp(-2 * r) / 2 + between * beta.real**2,
        "var_p": math.exp(2 * r) / 2 + between * beta.imag**2,
    }


def quadrature_attack_numeric(record: MeasurementRecord) -> AttackResult:
    """Optimize D(+-beta) S(r)|0> for a quadrature record.

    beta follows from the first moments; r balances the two quadratures so
    that max(var_x - target_x, var_p - target_p) is smallest.  The x excess
    falls and the p excess rises monotonically in r, so the optimum is where
    they are equal, sinh(2r) = delta.
    """
    if not record.mode.startswith("quadrature"):
        raise AttackError(f"quadrature attack needs a quadrature record, got {record.mode}")
    e = min_error_probability(record.overlap_s)
    mx, mp = record.mean_x_0, record.mean_p_0
    if abs(mx + record.mean_x_1) > 1e-12 or abs(mp + record.mean_p_1) > 1e-12:
        raise AttackError("attack assumes antipodal conditional means")
    if 1 - 2 * e <= 0:
        if abs(mx) > 0 or abs(mp) > 0:
            raise AttackError("identical signals cannot produce separated means")
        beta = 0j
    else:
        beta = complex(mx, mp) / (math.sqrt(2) * (1 - 2 * e))
    between = 8.0 * e * (1.0 - e)
    bx, bp = between * beta.real**2, between * beta.imag**2
    delta = (bx - record.var_x) - (bp - record.var_p)
    r = 0.5 * math.asinh(delta)
    mom = quadrature_mixture(beta, r, e)
    res = {
        "mean_x": abs(mom["mean_x"] - mx) / max(1.0, abs(mx)),
        "mean_p": abs(mom["mean_p"] - mp) / max(1.0, abs(mp)),
    }
    return AttackResult(
        MIN_ERROR,
        {"beta_re": beta.real, "beta_im": beta.imag, "r": r, "e": e},
        {"mean_x": mom["mean_x"], "mean_p": mom["mean_p"]},
        {"x": mom["var_x"], "p": mom["var_p"]},
        res,
        notes={"excess_over_target": mom["var_x"] - record.var_x},
    )


def quadrature_attack_along(s: float, eta: float, direction: tuple[float, float]) -> tuple[float, float, float]:
    """Smallest k such that the attack reaches (1/2 + k dx, 1/2 + k dp).

    Returns (k, var_x, var_p) with the attack's variances at the optimum.
    """
    dx, dp = direction
    e = min_error_probability(s)
    alpha2 = -math.log(s) / 2 if s > 0 else 0.0
    m = math.sqrt(eta) * math.sqrt(2 * alpha2)
    beta = m / (math.sqrt(2) * (1 - 2 * e))
    bx = 8 * e * (1 - e) * beta**2

    def kx(r):
        return (math.exp(-2 * r) / 2 + bx - 0.5) / dx

    def kp(r):
        return (math.exp(2 * r) / 2 - 0.5) / dp

    r = brentq(lambda r: kx(r) - kp(r), -20.0, 20.0, xtol=1e-15)
    k = kx(r)
    return k, 0.5 + k * dx, 0.5 + k * dp


# --- Stokes mixtures -------------------------------------------------------

@dataclass(frozen=True)
class Component:
    """Stokes moments [S0..S3] of one pure component, for bit 0 and bit 1."""

    mean0: np.ndarray
    second0: np.ndarray
    mean1: np.ndarray
    second1: np.ndarray


def gaussian_component(beta_lo: float, beta_s: float, r_signal: float = 0.0, r_two_mode: float = 0.0) -> Component:
    m0 = stokes_moments_gaussian(displaced_squeezed_gaussian(beta_s, beta_lo, r_signal, r_two_mode))
    m1 = stokes_moments_gaussian(displaced_squeezed_gaussian(-beta_s, beta_lo, r_signal, r_two_mode))
    return Component(m0.mean, np.real(m0.second), m1.mean, np.real(m1.second))


def bob_moments(components: list[tuple[float, Component]], e: float) -> tuple[np.ndarray, np.ndarray]:
    """Bob's bit-0 state: (1-e) Eve's bit-0 mixture + e Eve's bit-1 mixture."""
    mean = np.zeros(4)
    second = np.zeros((4, 4))
    for w, c in components:
        mean += w * ((1 - e) * c.mean0 + e * c.mean1)
        second += w * ((1 - e) * c.second0 + e * c.second1)
    return mean, second


def _variances(mean, second) -> np.ndarray:
    return np.diag(second) - mean**2


def _stokes_result(family, params, mean, second, record, extra_res=None, status="ok") -> AttackResult:
    var = _variances(mean, second)
    m2, m3 = record.mean_S2_0, record.mean_S3_0
    res = {
        "mean_S2": abs(mean[2] - m2) / max(1.0, abs(m2)),
        "mean_S3": abs(mean[3] - m3) / max(1.0, abs(m2)),
    }
    if record.mean_S0 is not None:
        res["mean_S0"] = abs(mean[0] - record.mean_S0) / max(1.0, record.mean_S0)
    if extra_res:
        res.update(extra_res)
    if max(res.values()) > RESIDUAL_TOL:
        status = "undecided"
    elif "p" in params and not 1e-9 < params["p"] < 1 - 1e-9:
        # the mixture collapsed onto a single component
        status = "degenerate"
    return AttackResult(
        family,
        params,
        {"S0": mean[0], "S1": mean[1], "S2": mean[2], "S3": mean[3]},
        {"S2": var[2], "S3": var[3]},
        res,
        status,
    )


def equal_amplitude_components(beta: float, r: float) -> Component:
    return gaussian_component(beta, beta, r_signal=r)


def equal_amplitude_attack(record: MeasurementRecord) -> AttackResult:
    """D_lo(beta) D_s(+-beta) S_s(r)|0,0> with minimum-error mixing.

    beta is fixed by <S2> = (1-2e) 2 beta^2; r minimizes the larger of the
    S2 and S3 variances.
    """
    if record.mode != "stokes-bare":
        raise AttackError(f"equal-amplitude attack needs a stokes-bare record, got {record.mode}")
    e = min_error_probability(record.overlap_s)
    m = record.mean_S2_0
    if 1 - 2 * e <= 0:
        if m != 0:
            raise AttackError("identical signals cannot produce separated means")
        beta = 0.0
    else:
        beta = math.copysign(math.sqrt(abs(m) / (2 * (1 - 2 * e))), m)
    # D_s(-beta) with D_lo(beta) flips the S2 sign; realised via signed amplitude

    def objective(r):
        comp = gaussian_component(abs(beta), beta, r_signal=r)
        mean, second = bob_moments([(1.0, comp)], e)
        return max(_variances(mean, second)[2:])

    opt = minimize_scalar(objective, bounds=(-4.0, 4.0), method="bounded", options={"xatol": 1e-10})
    r = float(opt.x)
    comp = gaussian_component(abs(beta), beta, r_signal=r)
    mean, second = bob_moments([(1.0, comp)], e)
    return _stokes_result(EQUAL_AMPLITUDE, {"beta": beta, "r": r, "e": e}, mean, second, record)


# --- spin components -------------------------------------------------------

@lru_cache(maxsize=1)
def rotation_sign() -> float:
    """+1 if R(pi/2, 0)|j,j> has <S2> > 0 under the chosen convention, else -1."""
    psi = spin.spin_rotation(0.5, math.pi / 2, 0.0)[:, 0]
    s2 = np.real(spin.expect(2 * spin.spin_operators(0.5).jx, psi))
    return 1.0 if s2 > 0 else -1.0


@lru_cache(maxsize=4096)
def _pole(j: float, mu: float) -> spin.PoleMoments:
    return spin.twisted_pole_moments(j, mu)


def _spin_stokes(pm: spin.PoleMoments, theta: float) -> tuple[np.ndarray, np.ndarray]:
    mean_j, sec_j = spin.rotate_y_moments(pm, theta)
    # Stokes order S0, S1, S2, S3 = 2j, 2Jz, 2Jx, 2Jy
    n = 2 * pm.j
    perm = [2, 0, 1]
    mean = np.concatenate([[n], 2 * mean_j[perm]])
    second = np.zeros((4, 4))
    second[0, 0] = n * n
    second[0, 1:] = second[1:, 0] = n * mean[1:]
    second[1:, 1:] = 4 * sec_j[np.ix_(perm, perm)]
    return mean, second


def spin_component(n_photons: int, mu: float, theta: float) -> Component:
    """R(+-theta, 0) U(mu) |j, j> with j = n/2, sign-calibrated so bit 0 has <S2> >= 0."""
    pm = _pole(n_photons / 2, float(mu))
    sg = rotation_sign()
    m0, s0 = _spin_stokes(pm, sg * theta)
    m1, s1 = _spin_stokes(pm, -sg * theta)
    return Component(m0, s0, m1, s1)


def _pole_coherent_tables(n: np.ndarray, sin_z: np.ndarray):
    """<S2>, <S2^2>, <S3^2> of R(zeta)|j,j> without twisting (vectorised)."""
    j = n / 2
    mean = 2 * sin_z * j
    s2sq = 4 * (sin_z**2 * j * j + (1 - sin_z**2) * j / 2)
    s3sq = 2 * j
    return mean, s2sq, s3sq


def _sobol(dim: int, count: int, seed: int) -> np.ndarray:
    """First ``count`` points of a scrambled Sobol sequence."""
    m = max(0, math.ceil(math.log2(max(count, 1))))
    return qmc.Sobol(dim, scramble=True, seed=seed).random_base2(m)[:count]


@dataclass(frozen=True)
class TwoAxisSettings:
    # photon-number scan window, as a fraction of n_total on either side
    window: float = 1.0
    n_minus_range: tuple[int, int] | None = None
    n_plus_range: tuple[int, int] | None = None
    refine_pairs: int = 12
    restarts: int = 8
    seed: int = 0
    zeta_max: float = math.pi / 4
    apply_mixing: bool = True


def _two_axis_eval(n_total, nm, npl, mu_m, mu_p, M, record, e, zeta_max):
    """Moments for given integers and twists, solving p and zeta exactly."""
    p = (npl - n_total) / (npl - nm)
    cm = spin_component(nm, mu_m, math.pi / 2)
    pole = _pole(npl / 2, float(mu_p))
    jz = pole.mean[2]
    need = (M - p * cm.mean0[2]) / ((1 - p) * 2 * jz) if jz > 0 else np.inf
    if abs(need) > math.sin(zeta_max):
        return None
    zeta = math.asin(need)
    cp = spin_component(npl, mu_p, zeta)
    mean, second = bob_moments([(p, cm), (1 - p, cp)], e)
    return p, zeta, mean, second


def two_axis_attack(
    record: MeasurementRecord,
    n_total: int,
    settings: TwoAxisSettings = TwoAxisSettings(),
) -> AttackResult:
    """Mixture of two-axis-twisted spin states around the monitored intensity.

    p follows from the total-intensity constraint and zeta from the <S2>
    constraint, so both hold exactly.  The integer photon numbers are
    scanned in closed form without twisting; the best pairs are then refined
    over the two twist strengths with Nelder-Mead restarts.
    """
    if record.mode != "stokes-with-S0":
        raise AttackError(f"two-axis attack needs a stokes-with-S0 record, got {record.mode}")
    if 2 * spin.J_MAX < n_total:
        raise AttackError(f"n_total={n_total} exceeds the spin backend limit {2 * spin.J_MAX}")
    e = min_error_probability(record.overlap_s) if settings.apply_mixing else 0.0
    if 1 - 2 * e <= 0:
        raise AttackError("identical signals cannot produce separated means")
    m = record.mean_S2_0
    M = m / (1 - 2 * e)
    span = int(math.floor(settings.window * n_total))
    lo_m, hi_m = settings.n_minus_range or (max(1, n_total - span), n_total - 1)
    lo_p, hi_p = settings.n_plus_range or (n_total + 1, min(n_total + span, 2 * int(spin.J_MAX)))
    if not (1 <= lo_m <= hi_m < n_total < lo_p <= hi_p <= 2 * spin.J_MAX):
        raise AttackError(f"bad photon-number window {(lo_m, hi_m)} / {(lo_p, hi_p)} around {n_total}")

    # closed-form scan at zero twist
    nm = np.arange(lo_m, hi_m + 1, dtype=float)[:, None]
    npl = np.arange(lo_p, hi_p + 1, dtype=float)[None, :]
    p = (npl - n_total) / (npl - nm)
    sin_z = (M - p * nm) / ((1 - p) * npl)
    ok = np.abs(sin_z) <= math.sin(settings.zeta_max)
    sin_z = np.where(ok, sin_z, 0.0)
    _, s2p, s3p = _pole_coherent_tables(npl, sin_z)
    s2 = p * nm**2 + (1 - p) * s2p - m * m
    s3 = p * nm + (1 - p) * s3p - record.mean_S3_0**2
    score = np.where(ok, np.maximum(s2, s3), np.inf)
    flat = np.argsort(score, axis=None)[: settings.refine_pairs]
    if not np.isfinite(score.reshape(-1)[flat[0]]):
        raise AttackError("no photon-number pair satisfies the intensity and mean constraints")

    best = None
    starts = (_sobol(2, settings.restarts, settings.seed) * 2 - 1) * 1.5
    starts[0] = 0.0
    for idx in flat:
        i, k = np.unravel_index(idx, score.shape)
        a, b = int(nm[i, 0]), int(npl[0, k])

        def obj(u, a=a, b=b):
            got = _two_axis_eval(n_total, a, b, u[0] / a, u[1] / b, M, record, e, settings.zeta_max)
            if got is None:
                return 1e12
            return float(max(_variances(got[2], got[3])[2:]))

        for x0 in starts:
            res = minimize(obj, x0, method="Nelder-Mead", options={"xatol": 1e-7, "fatol": 1e-9, "maxiter": 400})
            if best is None or res.fun < best[0]:
                best = (res.fun, a, b, res.x[0] / a, res.x[1] / b)
    _, a, b, mu_m, mu_p = best
    p_val, zeta, mean, second = _two_axis_eval(n_total, a, b, mu_m, mu_p, M, record, e, settings.zeta_max)
    params = {"n_minus": a, "n_plus": b, "mu": mu_m, "mu_plus": mu_p, "zeta": zeta, "p": p_val, "e": e}
    return _stokes_result(TWO_AXIS, params, mean, second, record)


# --- Gaussian simplifications ----------------------------------------------

def _split_amplitudes(A: float, Q: float) -> tuple[float, float] | None:
    """(a_lo, a_s) with 2 a_s a_lo = A and a_lo^2 + a_s^2 = Q, a_lo >= |a_s|."""
    if Q < abs(A):
        return None
    u, v = math.sqrt(Q + A), math.sqrt(Q - A)
    return 0.5 * (u + v), 0.5 * (u - v)


def _plus_component(A_plus: float, N_plus: float, r_plus: float) -> Component | None:
    amps = _split_amplitudes(A_plus, N_plus - math.sinh(r_plus) ** 2)
    if amps is None:
        return None
    return gaussian_component(amps[0], amps[1], r_signal=r_plus)


@dataclass(frozen=True)
class GaussianSettings:
    window: float = 1.0
    restarts: int = 8
    seed: int = 0
    apply_mixing: bool = True


def _expit(z: float) -> float:
    return 1.0 / (1.0 + math.exp(-z)) if z > -700 else 0.0


class _TwoComponentProblem:
    """Constraint bookkeeping shared by the Gaussian variants.

    The weight p is a logistic fraction of the largest value that keeps the
    high-intensity component below (1 + window) n; its intensity and
    amplitudes then follow from the intensity and <S2> constraints.
    """

    def __init__(self, record: MeasurementRecord, settings: GaussianSettings):
        self.n = record.mean_S0
        self.e = min_error_probability(record.overlap_s) if settings.apply_mixing else 0.0
        if 1 - 2 * self.e <= 0:
            raise AttackError("identical signals cannot produce separated means")
        self.M = record.mean_S2_0 / (1 - 2 * self.e)
        self.span = settings.window * self.n

    def weight(self, n_minus: float, z: float) -> float:
        """p as a fraction of the largest weight the intensity window allows."""
        p_max = self.span / (self.n + self.span - n_minus)
        return p_max * _expit(z)

    def solve(self, minus: Component, z: float, r_plus: float):
        n_minus = minus.mean0[0]
        if not n_minus < self.n:
            return None
        p = self.weight(n_minus, z)
        if not 0.0 < p < 1.0:
            return None
        N_plus = (self.n - p * n_minus) / (1 - p)
        A_plus = (self.M - p * minus.mean0[2]) / (1 - p)
        amps = _split_amplitudes(A_plus, N_plus - math.sinh(r_plus) ** 2)
        if amps is None:
            return None
        plus = gaussian_component(amps[0], amps[1], r_signal=r_plus)
        mean, second = bob_moments([(p, minus), (1 - p, plus)], self.e)
        return p, N_plus, amps, mean, second

    def score(self, minus: Component, z: float, r_plus: float) -> float:
        got = self.solve(minus, z, r_plus)
        return 1e12 if got is None else float(max(_variances(got[3], got[4])[2:]))


_NM = {"xatol": 1e-9, "fatol": 1e-10, "maxiter": 4000, "maxfev": 8000}


def gaussian_simplified_attack(
    record: MeasurementRecord,
    variant: str = QUAD_SQUEEZED_PLUS,
    settings: GaussianSettings = GaussianSettings(),
) -> AttackResult:
    """Two-component attack with Gaussian stand-ins for one or both components.

    quad-squeezed-plus keeps the twisted spin state for the low-intensity
    component and uses D_lo D_s(+-) S_s |0,0> for the high one;
    two-mode-squeezed-both also replaces the low one by
    D_lo(b) D_s(+-b) S_{lo,s}(r) |0,0>.
    """
    if record.mode != "stokes-with-S0":
        raise AttackError(f"Gaussian attack needs a stokes-with-S0 record, got {record.mode}")
    if variant not in (QUAD_SQUEEZED_PLUS, TWO_MODE_BOTH):
        raise ValueError(f"unknown variant {variant!r}")
    prob = _TwoComponentProblem(record, settings)
    unit = _sobol(4, settings.restarts, settings.seed)

    if variant == TWO_MODE_BOTH:
        def minus_of(u):
            return gaussian_component(u[0], u[0], r_two_mode=u[1])

        def obj(u):
            return prob.score(minus_of(u), u[2], u[3])

        b0 = math.sqrt(max(prob.M, 1e-9) / 2)
        best = None
        for w in unit:
            x0 = np.array([b0 * (0.7 + 0.6 * w[0]), 0.6 * w[1] - 0.3, 6 * w[2] - 3, w[3] - 0.5])
            res = minimize(obj, x0, method="Nelder-Mead", options=_NM)
            if best is None or res.fun < best.fun:
                best = res
        u = best.x
        minus = minus_of(u)
        z, r_plus = u[2], u[3]
        params = {"beta_tilde": u[0], "r_minus": u[1]}
    else:
        hi = min(int(math.ceil(prob.n)) - 1, int(2 * spin.J_MAX))
        lo = max(2, int(prob.n - prob.span))
        if lo > hi:
            raise AttackError("no admissible photon number for the spin component")
        # twist enters as u = mu * n_minus, which keeps its useful range O(1)
        def solve_at(nm, starts):
            def obj(u):
                return prob.score(spin_component(nm, u[0] / nm, math.pi / 2), u[1], u[2])

            return min((minimize(obj, x0, method="Nelder-Mead", options=_NM) for x0 in starts),
                       key=lambda r: r.fun)

        # both components must carry <S2> close to M, so the useful spin
        # sizes sit near M; walk outwards from there with warm starts
        centre = int(np.clip(round(prob.M), lo, hi))
        found = {centre: solve_at(centre, [np.array([3.0, 0.0, 0.1]), np.array([0.5, 2.0, 0.3]),
                                           np.array([6.0, -2.0, 0.0])])}
        stride = max(1, int(round(0.02 * prob.M)))
        for step in (stride, -stride):
            nm, prev = centre + step, found[centre]
            while lo <= nm <= hi and abs(nm - centre) <= prob.M:
                found[nm] = solve_at(nm, [prev.x])
                if found[nm].fun > found[centre].fun + 0.05 * prob.n:
                    break
                prev = found[nm]
                nm += step
        best_nm = min(found, key=lambda k: found[k].fun)
        for nm in range(max(lo, best_nm - stride + 1), min(hi, best_nm + stride - 1) + 1):
            if nm not in found:
                found[nm] = solve_at(nm, [found[best_nm].x])
        nm = min(found, key=lambda k: found[k].fun)
        best = found[nm]

        def obj(u):
            return prob.score(spin_component(nm, u[0] / nm, math.pi / 2), u[1], u[2])

        for w in unit:
            x0 = np.array([6 * w[0] - 1, 6 * w[2] - 3, w[3] - 0.3])
            res = minimize(obj, x0, method="Nelder-Mead", options=_NM)
            if res.fun < best.fun:
                best = res
        u = best.x
        minus = spin_component(nm, u[0] / nm, math.pi / 2)
        z, r_plus = u[1], u[2]
        params = {"n_minus": nm, "mu": u[0] / nm}

    got = prob.solve(minus, z, r_plus)
    if got is None:
        raise AttackError("optimizer ended outside the feasible region")
    p, n_plus, amps, mean, second = got
    params.update({
        "p": p, "n_plus": n_plus, "r_plus": r_plus, "e": prob.e,
        "alpha_lo_tilde": amps[0], "alpha_s_tilde": amps[1], "variant": variant,
    })
    return _stokes_result(GAUSSIAN_SIMPLIFIED, params, mean, second, record)
