import csv
import io
import json

import pytest

from evmcheck import attacks
from evmcheck.cli import main
from evmcheck.sweeps import ATTACK_COLUMNS, BOUNDARY_COLUMNS

from oracles import analytic_quadrature_boundary


def _run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


@pytest.mark.parametrize("var,status,code", [(0.51, "entangled", 2), (0.80, "separable-compatible", 0),
                                             (0.40, "unphysical-data", 3)])
def test_verify_exit_codes(capsys, var, status, code):
    got, out, _ = _run(capsys, "verify", "--mode", "quadrature", "--overlap", "0.5", "--var", str(var), "--eta", "1")
    assert got == code
    js = json.loads(out)
    assert js["status"] == status
    assert set(js) == {"status", "margin", "witness_params", "diagnostics"}
    assert (js["witness_params"] is None) == (status != "separable-compatible")


def test_verify_record_file(capsys, tmp_path):
    path = tmp_path / "rec.json"
    path.write_text(json.dumps({"mode": "quadrature", "overlap_s": 0.5, "eta": 1.0, "mean_x_0": 0.83255,
                                "mean_x_1": -0.83255, "mean_p_0": 0, "mean_p_1": 0, "var_x": 0.7, "var_p": 0.7}))
    assert _run(capsys, "verify", "--record", str(path))[0] == 0


def test_verify_malformed_record_names_field(capsys, tmp_path):
    path = tmp_path / "rec.json"
    path.write_text(json.dumps({"mode": "quadrature", "overlap_s": 0.5, "mean_x_0": 1, "mean_x_1": -1,
                                "mean_p_0": 0, "mean_p_1": 0, "var_x": 0.7}))
    code, _, err = _run(capsys, "verify", "--record", str(path))
    assert code == 1 and "var_p" in err


def test_verify_missing_variance(capsys):
    code, _, err = _run(capsys, "verify", "--mode", "stokes-bare", "--overlap", "0.5")
    assert code == 1 and "var_S2" in err


def test_verify_stokes_inline(capsys):
    code, out, _ = _run(capsys, "verify", "--mode", "stokes-bare", "--overlap", "0.5", "--var", "10000.35",
                        "--alpha-lo", "100")
    assert code == 0


def test_boundary_csv(capsys, tmp_path):
    out = tmp_path / "b.csv"
    code, _, _ = _run(capsys, "boundary", "--mode", "quadrature", "--grid", "0.2:0.4:0.1", "--out", str(out))
    assert code == 0
    rows = list(csv.DictReader(out.open()))
    assert tuple(rows[0]) == BOUNDARY_COLUMNS
    assert [float(r["overlap"]) for r in rows] == [0.2, 0.3, 0.4]
    for r in rows:
        s = float(r["overlap"])
        assert abs(float(r["boundary_variance"]) - analytic_quadrature_boundary(s)) < 1e-3
        assert r["verdict_high"] == "separable-compatible"


def test_boundary_to_stdout(capsys):
    code, out, _ = _run(capsys, "boundary", "--mode", "quadrature", "--grid", "0.5:0.5:0.1", "--eta", "1")
    assert code == 0
    rows = list(csv.DictReader(io.StringIO(out)))
    assert len(rows) == 1 and "status" not in rows[0]


def test_boundary_is_byte_stable(capsys):
    args = ("boundary", "--mode", "stokes-bare", "--grid", "0.3:0.6:0.3", "--seed", "4")
    first = _run(capsys, *args)[1]
    second = _run(capsys, *args)[1]
    assert first == second and first.count("\n") == 3


@pytest.mark.parametrize("grid", ["0.5:0.4:0.1", "0.1:0.5:0", "0.1:0.5", "a:b:c"])
def test_bad_grid_exits_1(capsys, grid):
    assert _run(capsys, "boundary", "--grid", grid)[0] == 1


def test_attack_csv(capsys):
    code, out, _ = _run(capsys, "attack", "--family", attacks.MIN_ERROR, "--grid", "0.1:0.9:0.4")
    assert code == 0
    rows = list(csv.DictReader(io.StringIO(out)))
    assert tuple(rows[0]) == ATTACK_COLUMNS
    for r in rows:
        s = float(r["overlap"])
        assert abs(float(r["achieved_variance"]) - analytic_quadrature_boundary(s)) < 1e-6
        assert json.loads(r["params_json"])["e"] >= 0


def test_attack_equal_amplitude_below_floor(capsys):
    code, out, _ = _run(capsys, "attack", "--family", attacks.EQUAL_AMPLITUDE, "--grid", "0.2:0.8:0.3")
    rows = list(csv.DictReader(io.StringIO(out)))
    from evmcheck.channels import stokes_floor

    assert code == 0
    assert all(float(r["achieved_variance"]) < stokes_floor(float(r["overlap"]), 100.0) for r in rows)


def test_attack_unknown_family(capsys):
    code, _, err = _run(capsys, "attack", "--family", "telepathy")
    assert code == 1 and attacks.MIN_ERROR in err


def test_unknown_figure_lists_names(capsys, tmp_path):
    code, _, err = _run(capsys, "figure", "fig2", "--out-dir", str(tmp_path))
    assert code == 1
    for name in ("fig1", "fig3", "fig4", "fig5", "fig6"):
        assert name in err


def test_figure1_small_grid(capsys, tmp_path):
    code, out, _ = _run(capsys, "figure", "fig1", "--grid", "0.2:0.6:0.2", "--out-dir", str(tmp_path))
    assert code == 0
    names = sorted(p.name for p in tmp_path.iterdir())
    assert names == ["fig1.svg", "fig1_attack.csv", "fig1_boundary.csv", "fig1_floor.csv"]
    assert (tmp_path / "fig1.svg").read_text().startswith("<svg")


def test_config_file_and_flag_precedence(capsys, tmp_path):
    cfg = tmp_path / "c.toml"
    cfg.write_text('mode = "quadrature"\noverlap = 0.5\nvar = 0.80\n')
    assert _run(capsys, "verify", "--config", str(cfg))[0] == 0
    assert _run(capsys, "verify", "--config", str(cfg), "--var", "0.51")[0] == 2


def test_config_unknown_key(capsys, tmp_path):
    cfg = tmp_path / "c.toml"
    cfg.write_text("colour = 3\n")
    code, _, err = _run(capsys, "verify", "--config", str(cfg))
    assert code == 1 and "colour" in err


def test_selftest_single_suite(capsys):
    code, out, _ = _run(capsys, "selftest", "--suite", "unitarity")
    assert code == 0 and out.startswith("[PASS] unitarity")
    assert _run(capsys, "selftest", "--suite", "nope")[0] == 1
