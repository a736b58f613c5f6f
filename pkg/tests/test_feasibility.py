import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from evmcheck.channels import (
    ChannelParams,
    alpha_from_overlap,
    existence_bound,
    quadrature_record_at,
    simulate_stokes_record,
    stokes_record_at,
)
from evmcheck.evm import build_evm
from evmcheck.feasibility import (
    ENTANGLED,
    SEPARABLE,
    UNDECIDED,
    UNPHYSICAL,
    AffineMatrixFamily,
    BoundaryError,
    SolverConfig,
    boundary_search,
    congruence_scaling,
    decide,
    min_eigen,
    real_embedding,
    solve_feasibility,
    verdict_for_record,
    witness_min_eigs,
)

from oracles import EXISTENCE_HALF, QUAD_ATTACK_HALF


def _regression_set():
    """50 records mixing modes, overlaps, loss and variances on both sides of the boundaries."""
    rng = np.random.default_rng(11)
    out = []
    for k in range(50):
        s = float(rng.uniform(0.1, 0.9))
        eta = float(rng.choice([1.0, 0.5]))
        if k % 2 == 0:
            out.append(quadrature_record_at(s, eta, float(rng.uniform(0.45, 0.9)), float(rng.uniform(0.45, 0.9))))
        else:
            m = 2 * eta * alpha_from_overlap(s) * 30.0
            v = existence_bound(s, m) * float(rng.choice([0.7, 1.3]))
            out.append(stokes_record_at(s, 30.0, eta, v, "stokes-bare"))
    return out


# --- min_eigen ------------------------------------------------------------

def test_min_eigen_identity():
    lam, v = min_eigen(np.eye(3))
    assert lam == 1 and np.linalg.norm(v) == pytest.approx(1)


def test_min_eigen_diagonal():
    lam, v = min_eigen(np.diag([3.0, -2.0, 5.0]))
    assert lam == -2
    assert abs(abs(v[1]) - 1) < 1e-14


@given(st.integers(0, 2**31))
@settings(max_examples=25, deadline=None)
def test_min_eigen_random(seed):
    rng = np.random.default_rng(seed)
    A = rng.normal(size=(8, 8)) + 1j * rng.normal(size=(8, 8))
    H = A + A.conj().T
    lam, v = min_eigen(H)
    assert abs(lam - np.linalg.eigvalsh(H)[0]) < 1e-10
    assert np.linalg.norm(H @ v - lam * v) <= 1e-9 * np.linalg.norm(H, 2)


def test_min_eigen_rejects_non_hermitian():
    with pytest.raises(ValueError):
        min_eigen(np.array([[0.0, 1.0], [0.0, 0.0]]))


def test_real_embedding_doubles_spectrum():
    rng = np.random.default_rng(0)
    A = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
    H = A + A.conj().T
    w = np.linalg.eigvalsh(H)
    assert np.allclose(np.sort(np.repeat(w, 2)), np.linalg.eigvalsh(real_embedding(H)))


# --- verdicts -------------------------------------------------------------

@pytest.mark.parametrize("var,status", [(0.5 + 1e-4, ENTANGLED), (0.80, SEPARABLE), (0.40, UNPHYSICAL)])
def test_quadrature_verdicts(var, status):
    assert verdict_for_record(quadrature_record_at(0.5, 1.0, var)).status == status


def test_uncertainty_product_below_quarter_is_unphysical():
    assert verdict_for_record(quadrature_record_at(0.5, 1.0, 0.45, 0.5)).status == UNPHYSICAL
    # a displaced coherent state with extra p noise reproduces this record
    assert verdict_for_record(quadrature_record_at(0.5, 1.0, 0.5, 0.6)).status != UNPHYSICAL


def test_squeezing_limited_by_overlap():
    """The conditional states must keep fidelity s, so strong x squeezing is excluded."""
    # pure squeezed states with Var(x) = 0.3 at these means overlap by only about 0.31 < 0.5
    assert verdict_for_record(quadrature_record_at(0.5, 1.0, 0.3, 1.0)).status == UNPHYSICAL


def test_witness_validity_and_json():
    cfg = SolverConfig()
    v = verdict_for_record(quadrature_record_at(0.5, 1.0, 0.7), cfg)
    assert v.status == SEPARABLE
    lo = witness_min_eigs(build_evm(quadrature_record_at(0.5, 1.0, 0.7)), v.witness_params, cfg)
    assert min(lo) >= -2 * cfg.tolerance
    js = v.to_json_dict()
    assert set(js) == {"status", "margin", "witness_params", "diagnostics"}
    assert set(js["diagnostics"]) == {"eig_chi", "eig_chi_pt"}


def test_entangled_verdict_has_certificate():
    v = verdict_for_record(quadrature_record_at(0.5, 1.0, 0.55))
    assert v.status == ENTANGLED
    assert v.witness_params is None
    assert v.lower_bound > SolverConfig().tolerance


def test_regression_set_properties():
    """Rescaling changes no verdict; witnesses are valid; repeated solves are identical."""
    cfg = SolverConfig()
    plain = SolverConfig(rescale=False)
    for rec in _regression_set():
        v = verdict_for_record(rec, cfg)
        assert v.status != UNDECIDED
        assert verdict_for_record(rec, plain).status == v.status
        again = verdict_for_record(rec, cfg)
        assert again.status == v.status and again.margin == v.margin
        if v.status == SEPARABLE:
            assert min(witness_min_eigs(build_evm(rec), v.witness_params, cfg)) >= -2 * cfg.tolerance


def test_midpoint_of_witnesses_is_feasible():
    cfg = SolverConfig()
    rec = quadrature_record_at(0.4, 1.0, 0.9)
    tpl = build_evm(rec)
    a = verdict_for_record(rec, cfg).witness_params
    b = verdict_for_record(quadrature_record_at(0.4, 1.0, 0.9), SolverConfig(seed=3, rescale=False)).witness_params
    for w in (a, b):
        assert min(witness_min_eigs(tpl, w, cfg)) >= -2 * cfg.tolerance
    assert min(witness_min_eigs(tpl, 0.5 * (a + b), cfg)) >= -2 * cfg.tolerance


def test_congruence_scaling_positive():
    tpl = build_evm(simulate_stokes_record(0.5, 100.0, ChannelParams(), "stokes-with-S0"))
    D = congruence_scaling(tpl)
    assert np.all(D > 0) and np.all(D <= 1)


def test_single_member_family():
    tpl = build_evm(quadrature_record_at(0.5, 1.0, 0.55))
    alone = solve_feasibility(AffineMatrixFamily.from_template(tpl, with_transpose=False))
    assert alone.status == SEPARABLE
    assert decide(tpl).status == ENTANGLED


def test_config_validation():
    with pytest.raises(ValueError):
        SolverConfig(tolerance=0)


@pytest.mark.parametrize("factor,status", [(0.999, UNPHYSICAL), (1.001, SEPARABLE)])
def test_existence_bound_consistency(factor, status):
    s, lo = 0.5, 100.0
    m = 2 * alpha_from_overlap(s) * lo
    rec = stokes_record_at(s, lo, 1.0, factor * existence_bound(s, m), "stokes-bare")
    assert verdict_for_record(rec).status == status


# --- boundary search --------------------------------------------------------

def test_quadrature_boundary_reference():
    res = boundary_search(lambda v: quadrature_record_at(0.5, 1.0, v), 0.3, 2.0)
    assert res.variance == pytest.approx(QUAD_ATTACK_HALF, abs=1e-3)
    assert res.verdict_low == ENTANGLED and res.verdict_high == SEPARABLE


def test_small_overlap_boundary_near_vacuum():
    res = boundary_search(lambda v: quadrature_record_at(0.01, 1.0, v), 0.3, 2.0)
    assert res.variance == pytest.approx(0.5, abs=0.03)
    assert res.variance > 0.5


def test_stokes_bare_boundary_reference():
    s, lo = 0.5, 100.0
    res = boundary_search(lambda v: stokes_record_at(s, lo, 1.0, v), 2000.0, 9000.0, abs_width=None, rel_width=1e-5)
    assert res.variance == pytest.approx(EXISTENCE_HALF, rel=1e-3)
    assert res.verdict_low == UNPHYSICAL


def test_boundary_rejects_unbracketed():
    with pytest.raises(BoundaryError, match="not bracketing"):
        boundary_search(lambda v: quadrature_record_at(0.5, 1.0, v), 0.7, 2.0)
