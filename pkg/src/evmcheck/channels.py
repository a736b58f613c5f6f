"""Loss-and-noise channel model producing measurement records."""

from __future__ import annotations

import math
from dataclasses import dataclass

from .records import MeasurementRecord


def alpha_from_overlap(s: float) -> float:
    """Real amplitude with <-a|a> = exp(-2 a^2) = s."""
    if not (0.0 < s <= 1.0):
        raise ValueError(f"overlap {s} must lie in (0, 1]")
    return math.sqrt(-math.log(s) / 2.0)


def overlap_from_alpha(alpha: float) -> float:
    return math.exp(-2.0 * alpha * alpha)


@dataclass(frozen=True)
class ChannelParams:
    eta: float = 1.0
    excess_x: float = 0.0
    excess_p: float = 0.0

    def __post_init__(self):
        if not (0.0 <= self.eta <= 1.0):
            raise ValueError(f"eta={self.eta} outside [0, 1]")
        if self.excess_x < 0 or self.excess_p < 0:
            raise ValueError("excess noise must be non-negative")


def simulate_quadrature_record(s: float, channel: ChannelParams, heterodyne: bool = False) -> MeasurementRecord:
    """Quadrature record for signals |+-a> through the channel."""
    mx = math.sqrt(channel.eta) * math.sqrt(2.0) * alpha_from_overlap(s)
    extra = {}
    if heterodyne:
        # symmetrized <xp> = <x><p> + Cov(x, p), zero for this channel
        extra = {"sym_xp_0": 0.0, "sym_xp_1": 0.0}
    return MeasurementRecord(
        mode="quadrature-heterodyne" if heterodyne else "quadrature",
        overlap_s=s,
        eta=channel.eta,
        mean_x_0=mx,
        mean_x_1=-mx,
        mean_p_0=0.0,
        mean_p_1=0.0,
        var_x=0.5 + channel.excess_x,
        var_p=0.5 + channel.excess_p,
        **extra,
    )


def quadrature_record_at(s: float, eta: float, var_x: float, var_p: float | None = None, heterodyne=False):
    """Record on the total-variance axis (var_p defaults to var_x)."""
    rec = simulate_quadrature_record(s, ChannelParams(eta), heterodyne)
    return rec.with_values(var_x=var_x, var_p=var_x if var_p is None else var_p)


def stokes_floor(s: float, alpha_lo: float, eta: float = 1.0) -> float:
    """Coherent-state Stokes variance eta (a_lo^2 + a^2)."""
    return eta * (alpha_lo**2 + alpha_from_overlap(s) ** 2)


def simulate_stokes_record(
    s: float,
    alpha_lo: float,
    channel: ChannelParams,
    mode: str = "stokes-bare",
) -> MeasurementRecord:
    """Stokes record; ``excess_x``/``excess_p`` broaden S2/S3 (and S1 like S2)."""
    a = alpha_from_overlap(s)
    eta = channel.eta
    m2 = 2.0 * eta * a * alpha_lo
    floor = eta * (alpha_lo**2 + a**2)
    vals = dict(
        mode=mode,
        overlap_s=s,
        eta=eta,
        alpha_lo=alpha_lo,
        mean_S2_0=m2,
        mean_S2_1=-m2,
        mean_S3_0=0.0,
        mean_S3_1=0.0,
        var_S2=floor + channel.excess_x,
        var_S3=floor + channel.excess_p,
    )
    if mode == "stokes-with-S1":
        m1 = eta * (a**2 - alpha_lo**2)
        vals.update(mean_S1_0=m1, mean_S1_1=m1, var_S1=floor + channel.excess_x)
    elif mode == "stokes-with-S0":
        vals.update(mean_S0=floor)
    elif mode != "stokes-bare":
        raise ValueError(f"not a Stokes mode: {mode}")
    return MeasurementRecord(**vals)


def stokes_record_at(s: float, alpha_lo: float, eta: float, variance: float, mode: str = "stokes-bare"):
    """Stokes record whose S2 and S3 variances equal ``variance``.

    For the S1 mode the S1 variance receives the same excess over the floor.
    """
    rec = simulate_stokes_record(s, alpha_lo, ChannelParams(eta), mode)
    changes = {"var_S2": variance, "var_S3": variance}
    if mode == "stokes-with-S1":
        changes["var_S1"] = variance
    return rec.with_values(**changes)


def existence_bound(s: float, mean_s2: float) -> float:
    """Smallest S2 variance compatible with a PSD bare-Stokes EVM."""
    return s * s * mean_s2 * mean_s2 / (1.0 - s * s)
