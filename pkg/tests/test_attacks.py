import math

import numpy as np
import pytest

from evmcheck import attacks
from evmcheck.channels import (
    ChannelParams,
    alpha_from_overlap,
    existence_bound,
    quadrature_record_at,
    simulate_quadrature_record,
    simulate_stokes_record,
    stokes_floor,
)
from evmcheck.feasibility import SEPARABLE, boundary_search, verdict_for_record
from evmcheck.records import MeasurementRecord
from evmcheck.sweeps import lo_intensity_for

from oracles import COHERENT_FLOOR_HALF, MIN_ERROR_HALF, QUAD_ATTACK_HALF, QUAD_ATTACK_ONE, analytic_quadrature_boundary


def _s0_record(s, n):
    rec = simulate_stokes_record(s, lo_intensity_for(n, s, 1.0), ChannelParams(), "stokes-with-S0")
    return rec.with_values(mean_S0=float(n))


@pytest.fixture(scope="module")
def two_axis_half():
    rec = _s0_record(0.5, 100)
    return rec, attacks.two_axis_attack(rec, 100)


# --- quadrature ---------------------------------------------------------

def test_min_error_probability_values():
    assert attacks.min_error_probability(0.0) == 0
    assert attacks.min_error_probability(1.0) == 0.5
    assert attacks.min_error_probability(0.5) == pytest.approx(MIN_ERROR_HALF, abs=1e-6)
    with pytest.raises(ValueError):
        attacks.min_error_probability(1.2)


def test_analytic_attack_values():
    assert attacks.quadrature_attack_analytic(0.0) == 0.5
    assert attacks.quadrature_attack_analytic(1e-9) == pytest.approx(0.5, abs=1e-9)
    assert attacks.quadrature_attack_analytic(0.5) == pytest.approx(QUAD_ATTACK_HALF, abs=1e-4)
    assert attacks.quadrature_attack_analytic(1.0) == pytest.approx(QUAD_ATTACK_ONE, abs=1e-12)
    assert attacks.quadrature_attack_analytic(1 - 1e-7) == pytest.approx(QUAD_ATTACK_ONE, abs=1e-6)


@pytest.mark.parametrize("s", [round(0.1 * k, 1) for k in range(1, 10)])
@pytest.mark.parametrize("eta", [1.0, 0.5])
def test_numeric_attack_matches_analytic(s, eta):
    res = attacks.quadrature_attack_numeric(simulate_quadrature_record(s, ChannelParams(eta)))
    assert res.achieved_variance == pytest.approx(analytic_quadrature_boundary(s, eta), abs=1e-6)
    assert res.variances["x"] == pytest.approx(res.variances["p"], abs=1e-12)
    assert res.max_residual < 1e-12


def test_orthogonal_signals_attack():
    rec = MeasurementRecord("quadrature", 0.0, 1.0, mean_x_0=1.3, mean_x_1=-1.3, mean_p_0=0.0, mean_p_1=0.0,
                            var_x=0.5, var_p=0.5)
    res = attacks.quadrature_attack_numeric(rec)
    assert res.params["beta_re"] == pytest.approx(1.3 / math.sqrt(2))
    assert res.params["r"] == 0
    assert res.notes["excess_over_target"] == pytest.approx(0, abs=1e-15)


def test_asymmetric_targets_meet_boundary():
    """Excess 0.1 on x and 0.3 on p: the attack lands on the verification boundary."""
    s, d = 0.5, (0.1, 0.3)
    k, vx, vp = attacks.quadrature_attack_along(s, 1.0, d)
    res = boundary_search(lambda t: quadrature_record_at(s, 1.0, 0.5 + t * d[0], 0.5 + t * d[1]), 0.0, 5.0,
                          abs_width=1e-7)
    bx, bp = 0.5 + res.variance * d[0], 0.5 + res.variance * d[1]
    assert abs(vx - bx) < 1e-2 and abs(vp - bp) < 1e-2
    # the attack reproduces the asymmetric pair through the generic entry point too
    direct = attacks.quadrature_attack_numeric(quadrature_record_at(s, 1.0, vx, vp))
    assert direct.variances["x"] == pytest.approx(vx, abs=1e-9)
    assert direct.variances["p"] == pytest.approx(vp, abs=1e-9)


def test_quadrature_attack_rejects_wrong_mode():
    with pytest.raises(attacks.AttackError):
        attacks.quadrature_attack_numeric(simulate_stokes_record(0.5, 10, ChannelParams(), "stokes-bare"))


# --- equal amplitude ------------------------------------------------------

def test_equal_amplitude_below_floor():
    rec = simulate_stokes_record(0.5, 100.0, ChannelParams(), "stokes-bare")
    res = attacks.equal_amplitude_attack(rec)
    assert res.status == "ok"
    assert res.achieved_variance < COHERENT_FLOOR_HALF
    assert res.achieved_variance > existence_bound(0.5, rec.mean_S2_0)
    assert res.means["S2"] == pytest.approx(rec.mean_S2_0, rel=1e-9)


def test_equal_amplitude_small_overlap():
    s = 1e-6
    rec = simulate_stokes_record(s, 100.0, ChannelParams(), "stokes-bare")
    res = attacks.equal_amplitude_attack(rec)
    assert res.params["beta"] == pytest.approx(math.sqrt(rec.mean_S2_0 / 2), rel=1e-9)
    # no mixing left: Bob sees the resent state's own variance
    comp = attacks.equal_amplitude_components(res.params["beta"], res.params["r"])
    own = np.diag(comp.second0) - comp.mean0**2
    assert res.achieved_variance == pytest.approx(max(own[2:]), rel=1e-9)


def test_equal_amplitude_relative_gap_shrinks():
    gaps = []
    for lo in (10.0, 30.0, 100.0):
        rec = simulate_stokes_record(0.5, lo, ChannelParams(), "stokes-bare")
        bound = existence_bound(0.5, rec.mean_S2_0)
        gaps.append((attacks.equal_amplitude_attack(rec).achieved_variance - bound) / bound)
    assert gaps[0] > gaps[1] > gaps[2] > 0


# --- family nesting and mixtures -------------------------------------------

def test_gaussian_family_contains_equal_amplitude():
    b = 4.2
    ref = attacks.equal_amplitude_components(b, 0.0)
    two_mode = attacks.gaussian_component(b, b, r_two_mode=0.0)
    # the high-intensity stand-in at matching intensity and <S2> splits back to equal amplitudes
    plus = attacks._plus_component(2 * b * b, 2 * b * b, 0.0)
    for c in (two_mode, plus):
        for a, r in ((c.mean0, ref.mean0), (c.mean1, ref.mean1), (c.second0, ref.second0), (c.second1, ref.second1)):
            assert np.allclose(a, r, atol=1e-8, rtol=0)


def test_split_amplitudes():
    a_lo, a_s = attacks._split_amplitudes(2 * 3.0 * 0.5, 9.25)
    assert (a_lo, a_s) == pytest.approx((3.0, 0.5))
    assert attacks._split_amplitudes(10.0, 5.0) is None


def test_between_component_variance_closed_form():
    """Mixing +-beta with weights (1-e, e) adds 4 e (1-e) <S2>^2 / (1-2e)^2 on S2."""
    e = 0.07
    comp = attacks.gaussian_component(5.0, 5.0)
    mean, second = attacks.bob_moments([(1.0, comp)], e)
    own = comp.second0[2, 2] - comp.mean0[2] ** 2
    var = second[2, 2] - mean[2] ** 2
    assert var - own == pytest.approx(4 * e * (1 - e) * comp.mean0[2] ** 2, rel=1e-10)


# --- two-axis ----------------------------------------------------------------

def test_rotated_poles_conserve_intensity():
    n = 40
    comp = attacks.spin_component(n, 0.0, math.pi / 2)
    for p in (0.0, 0.3, 1.0):
        mean, _ = attacks.bob_moments([(p, comp), (1 - p, comp)], 0.1)
        assert mean[0] == n
    assert comp.mean0[2] == pytest.approx(n, rel=1e-12)
    assert comp.mean1[2] == pytest.approx(-n, rel=1e-12)


def test_two_axis_contract(two_axis_half):
    rec, res = two_axis_half
    assert res.status == "ok"
    assert abs(res.means["S0"] - 100) <= 1e-6 * 100
    assert res.params["n_minus"] < 100 < res.params["n_plus"]
    assert abs(res.params["zeta"]) <= math.pi / 4
    assert 0 < res.params["p"] < 1
    assert res.max_residual <= attacks.RESIDUAL_TOL


def test_two_axis_deterministic(two_axis_half):
    rec, res = two_axis_half
    again = attacks.two_axis_attack(rec, 100)
    assert again.achieved_variance == res.achieved_variance
    assert again.params == res.params


def test_two_axis_rejects_bad_inputs():
    rec = _s0_record(0.5, 100)
    with pytest.raises(attacks.AttackError):
        attacks.two_axis_attack(rec, 1000)
    with pytest.raises(attacks.AttackError):
        attacks.two_axis_attack(simulate_stokes_record(0.5, 10, ChannelParams(), "stokes-bare"), 100)


def test_mixing_flag_changes_mixture():
    rec = _s0_record(0.5, 20)
    off = attacks.two_axis_attack(rec, 20, attacks.TwoAxisSettings(apply_mixing=False, restarts=2, refine_pairs=2))
    assert off.params["e"] == 0.0


# --- Gaussian simplifications ---------------------------------------------------

@pytest.mark.parametrize("variant", [attacks.QUAD_SQUEEZED_PLUS, attacks.TWO_MODE_BOTH])
def test_gaussian_variants_contract(variant):
    rec = _s0_record(0.5, 100)
    res = attacks.gaussian_simplified_attack(rec, variant)
    assert res.max_residual <= attacks.RESIDUAL_TOL
    assert res.params["variant"] == variant
    assert res.params["n_plus"] > 100


def test_gaussian_rejects_unknown_variant():
    with pytest.raises(ValueError):
        attacks.gaussian_simplified_attack(_s0_record(0.5, 100), "squeezed-everything")


@pytest.mark.parametrize("s", [0.3, 0.5, 0.7])
def test_simplifications_do_not_help(s):
    """At n=100: two-axis <= quad-squeezed <= two-mode-squeezed in achieved variance."""
    rec = _s0_record(s, 100)
    twist = attacks.two_axis_attack(rec, 100)
    quad = attacks.gaussian_simplified_attack(rec, attacks.QUAD_SQUEEZED_PLUS)
    both = attacks.gaussian_simplified_attack(rec, attacks.TWO_MODE_BOTH)
    for r in (twist, quad, both):
        assert r.status == "ok"
    assert twist.achieved_variance <= quad.achieved_variance <= both.achieved_variance


# --- constructive certificates -------------------------------------------------

def test_quadrature_attack_feeds_back_separable():
    for s in (0.2, 0.5, 0.8):
        res = attacks.quadrature_attack_numeric(simulate_quadrature_record(s, ChannelParams()))
        back = quadrature_record_at(s, 1.0, res.variances["x"] + 1e-5, res.variances["p"] + 1e-5)
        assert verdict_for_record(back).status == SEPARABLE


def test_stokes_attacks_feed_back_separable(two_axis_half):
    rec = simulate_stokes_record(0.5, 100.0, ChannelParams(), "stokes-bare")
    v = attacks.equal_amplitude_attack(rec).achieved_variance
    assert verdict_for_record(rec.with_values(var_S2=v, var_S3=v)).status == SEPARABLE
    rec, res = two_axis_half
    v = res.achieved_variance
    assert verdict_for_record(rec.with_values(var_S2=v, var_S3=v)).status == SEPARABLE
