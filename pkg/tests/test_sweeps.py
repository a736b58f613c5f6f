import io

import pytest

from evmcheck import attacks
from evmcheck.figures import format_value, write_rows
from evmcheck.sweeps import (
    WORKERS_ENV,
    Grid,
    SweepSpec,
    attack_row,
    boundary_row,
    lo_intensity_for,
    parallel_map,
    renormalized_quadrature_curve,
    worker_count,
)


def test_default_grid():
    vals = Grid().values()
    assert len(vals) == 19 and vals[0] == 0.05 and vals[-1] == 0.95
    assert 0.15 in vals


@pytest.mark.parametrize("text", ["0.5:0.1:0.1", "0.1:0.5:-1", "0.1:0.5:0", "1:2"])
def test_grid_validation(text):
    with pytest.raises(ValueError):
        Grid.parse(text)


def test_single_point_grid():
    assert Grid.parse("0.5:0.5:0.1").values() == [0.5]


def test_spec_validation_and_widths():
    with pytest.raises(ValueError):
        SweepSpec("polarimetry")
    with pytest.raises(ValueError):
        SweepSpec(eta=0)
    assert SweepSpec("quadrature").widths() == (1e-5, None)
    assert SweepSpec("stokes-bare").widths() == (None, 1e-5)
    assert SweepSpec("stokes-bare", abs_width=0.1).widths() == (0.1, None)


def test_worker_env(monkeypatch):
    monkeypatch.setenv(WORKERS_ENV, "3")
    assert worker_count() == 3
    monkeypatch.setenv(WORKERS_ENV, "many")
    with pytest.raises(ValueError):
        worker_count()


def _square(x):
    return x * x


def test_parallel_map_keeps_order():
    assert parallel_map(_square, range(6), workers=2) == [0, 1, 4, 9, 16, 25]
    assert parallel_map(_square, range(3), workers=1) == [0, 1, 4]


def test_boundary_row_failure_reported(monkeypatch):
    from evmcheck import sweeps

    # both ends on the separable side
    monkeypatch.setattr(sweeps, "bracket", lambda spec, s: (0.7, 2.0))
    row = boundary_row(SweepSpec("quadrature"), 0.5)
    assert row["boundary_variance"] is None
    assert "not bracketing" in row["status"]


def test_attack_row_error_becomes_status():
    # 1000 photons exceed the spin backend
    row = attack_row(attacks.TWO_AXIS, SweepSpec("stokes-with-S0", photons=1000), 0.5)
    assert row["achieved_variance"] is None
    assert "exceeds" in row["status"]


def test_lo_intensity():
    assert lo_intensity_for(100, 0.5, 1.0) ** 2 == pytest.approx(100 - 0.5 * 0.6931471805599453 / 1.0, rel=1e-12)
    with pytest.raises(ValueError):
        lo_intensity_for(0.1, 0.01, 1.0)


def test_renormalized_curve_scaling():
    rows = renormalized_quadrature_curve(Grid(0.5, 0.5, 0.1), 100.0)
    lo2 = lo_intensity_for(100.0, 0.5, 1.0) ** 2
    assert rows[0]["variance"] == pytest.approx(2 * lo2 * 0.6287, rel=2e-4)


def test_write_rows_status_column():
    buf = io.StringIO()
    write_rows(None, ("a", "b"), [{"a": 1.0, "b": None, "status": "ok"}], stream=buf)
    assert buf.getvalue() == "a,b\n1,\n"
    buf = io.StringIO()
    write_rows(None, ("a",), [{"a": 0.1, "status": "undecided at 3"}], stream=buf)
    assert buf.getvalue() == "a,status\n0.1,undecided at 3\n"
    assert format_value(float("nan")) == "nan"
    assert format_value(1 / 3) == "0.333333333333"
