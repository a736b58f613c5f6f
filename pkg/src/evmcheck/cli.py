"""Command-line entry point: verify, boundary, attack, figure, selftest."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import attacks
from .channels import quadrature_record_at, stokes_record_at
from .feasibility import ENTANGLED, SEPARABLE, UNDECIDED, UNPHYSICAL, SolverConfig, verdict_for_record
from .figures import FIGURES, FigureOptions, build_figure, write_rows
from .records import MODES, RecordError, load_record
from .sweeps import ATTACK_COLUMNS, BOUNDARY_COLUMNS, FAMILIES, Grid, SweepSpec, attack_curve, boundary_curve

try:
    import tomllib
except ModuleNotFoundError:  # python < 3.11
    import tomli as tomllib

EXIT_CODES = {SEPARABLE: 0, ENTANGLED: 2, UNPHYSICAL: 3, UNDECIDED: 4}
EXIT_MALFORMED = 1

# keys a config file may set; command-line flags take precedence
DEFAULTS = {
    "mode": None,
    "overlap": None,
    "eta": 1.0,
    "var": None,
    "var_x": None,
    "var_p": None,
    "var_s1": None,
    "mean_s0": None,
    "alpha_lo": 100.0,
    "grid": "0.05:0.95:0.05",
    "photons": None,
    "family": None,
    "variant": attacks.QUAD_SQUEEZED_PLUS,
    "tolerance": 1e-7,
    "seed": 0,
    "abs_width": None,
    "rel_width": None,
    "out": None,
    "out_dir": "figures",
}


class UsageError(Exception):
    pass


def _resolve(args: argparse.Namespace) -> dict:
    conf = {}
    if getattr(args, "config", None):
        try:
            conf = tomllib.loads(Path(args.config).read_text())
        except (OSError, tomllib.TOMLDecodeError) as exc:
            raise UsageError(f"config: cannot read {args.config}: {exc}") from None
        unknown = set(conf) - set(DEFAULTS)
        if unknown:
            raise UsageError(f"config: unknown key {sorted(unknown)[0]!r}")
    out = dict(DEFAULTS)
    out.update(conf)
    for k in DEFAULTS:
        v = getattr(args, k, None)
        if v is not None:
            out[k] = v
    return out


def _solver(opts: dict) -> SolverConfig:
    return SolverConfig(tolerance=float(opts["tolerance"]), seed=int(opts["seed"]))


def _grid(opts: dict) -> Grid:
    try:
        return Grid.parse(str(opts["grid"]))
    except ValueError as exc:
        raise UsageError(f"grid: {exc}") from None


def _inline_record(opts: dict):
    mode = opts["mode"]
    if mode is None:
        raise RecordError("mode: required without --record")
    if mode not in MODES:
        raise RecordError(f"mode: unknown mode {mode!r}; expected one of {', '.join(MODES)}")
    if opts["overlap"] is None:
        raise RecordError("overlap_s: required (--overlap)")
    s, eta = float(opts["overlap"]), float(opts["eta"])
    if not 0 < s <= 1:
        raise RecordError(f"overlap_s: {s} outside (0, 1]")
    if not 0 < eta <= 1:
        raise RecordError(f"eta: {eta} outside (0, 1]")
    if mode.startswith("quadrature"):
        vx = opts["var_x"] if opts["var_x"] is not None else opts["var"]
        vp = opts["var_p"] if opts["var_p"] is not None else opts["var"]
        if vx is None or vp is None:
            raise RecordError("var_x: required (--var or --var-x/--var-p)")
        return quadrature_record_at(s, eta, vx, vp, heterodyne=mode == "quadrature-heterodyne")
    if opts["var"] is None:
        raise RecordError("var_S2: required (--var)")
    rec = stokes_record_at(s, float(opts["alpha_lo"]), eta, opts["var"], mode)
    changes = {}
    if mode == "stokes-with-S1" and opts["var_s1"] is not None:
        changes["var_S1"] = opts["var_s1"]
    if mode == "stokes-with-S0" and opts["mean_s0"] is not None:
        changes["mean_S0"] = opts["mean_s0"]
    return rec.with_values(**changes) if changes else rec


def cmd_verify(args) -> int:
    opts = _resolve(args)
    try:
        record = load_record(args.record) if args.record else _inline_record(opts)
    except (RecordError, OSError) as exc:
        print(f"malformed record: {exc}", file=sys.stderr)
        return EXIT_MALFORMED
    verdict = verdict_for_record(record, _solver(opts))
    print(json.dumps(verdict.to_json_dict(), indent=2))
    return EXIT_CODES[verdict.status]


def cmd_boundary(args) -> int:
    opts = _resolve(args)
    mode = opts["mode"] or "quadrature"
    spec = SweepSpec(mode, _grid(opts), float(opts["eta"]), float(opts["alpha_lo"]), solver=_solver(opts),
                     abs_width=opts["abs_width"], rel_width=opts["rel_width"])
    rows = boundary_curve(spec)
    write_rows(opts["out"], BOUNDARY_COLUMNS, rows, stream=sys.stdout)
    return 0


def cmd_attack(args) -> int:
    opts = _resolve(args)
    family = opts["family"]
    if family not in FAMILIES:
        raise UsageError(f"family: expected one of {', '.join(FAMILIES)}, got {family!r}")
    photons = None if opts["photons"] is None else float(opts["photons"])
    spec = SweepSpec("quadrature", _grid(opts), float(opts["eta"]), float(opts["alpha_lo"]), photons=photons,
                     variant=opts["variant"], solver=_solver(opts))
    rows = attack_curve(family, spec)
    write_rows(opts["out"], ATTACK_COLUMNS, rows, stream=sys.stdout)
    return 0


def cmd_figure(args) -> int:
    opts = _resolve(args)
    if args.name not in FIGURES:
        raise UsageError(f"figure: unknown name {args.name!r}; valid names: {', '.join(FIGURES)}")
    photons = None if opts["photons"] is None else float(opts["photons"])
    fo = FigureOptions(_grid(opts), float(opts["alpha_lo"]), photons, _solver(opts))
    for path in build_figure(args.name, opts["out_dir"], fo):
        print(path)
    return 0


def cmd_selftest(args) -> int:
    from .selftest import SUITES, run_all

    names = args.suite or list(SUITES)
    bad = [n for n in names if n not in SUITES]
    if bad:
        raise UsageError(f"suite: unknown {bad[0]!r}; valid: {', '.join(SUITES)}")
    results = run_all(names)
    for r in results:
        print(r.line())
    return 0 if all(r.passed for r in results) else 1


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="evm-verify", description="Effective-entanglement verification from EVMs.")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--config", help="TOML file with default values for the flags")
        sp.add_argument("--eta", type=float, help="channel transmission")
        sp.add_argument("--alpha-lo", dest="alpha_lo", type=float, help="local oscillator amplitude")
        sp.add_argument("--tolerance", type=float, help="feasibility tolerance")
        sp.add_argument("--seed", type=int)

    v = sub.add_parser("verify", help="verdict for one measurement record")
    common(v)
    v.add_argument("--record", help="flat JSON record file")
    v.add_argument("--mode", help=", ".join(MODES))
    v.add_argument("--overlap", type=float)
    v.add_argument("--var", type=float, help="variance (both quadratures, or S2 and S3)")
    v.add_argument("--var-x", dest="var_x", type=float)
    v.add_argument("--var-p", dest="var_p", type=float)
    v.add_argument("--var-s1", dest="var_s1", type=float)
    v.add_argument("--mean-s0", dest="mean_s0", type=float)
    v.set_defaults(func=cmd_verify)

    b = sub.add_parser("boundary", help="verification boundary over an overlap grid (CSV)")
    common(b)
    b.add_argument("--mode", help=", ".join(MODES))
    b.add_argument("--grid", help="start:stop:step")
    b.add_argument("--abs-width", dest="abs_width", type=float)
    b.add_argument("--rel-width", dest="rel_width", type=float)
    b.add_argument("--out", help="CSV path (default stdout)")
    b.set_defaults(func=cmd_boundary)

    a = sub.add_parser("attack", help="intercept-resend attack curve (CSV)")
    common(a)
    a.add_argument("--family", help=", ".join(FAMILIES))
    a.add_argument("--variant", help=f"{attacks.QUAD_SQUEEZED_PLUS} or {attacks.TWO_MODE_BOTH}")
    a.add_argument("--photons", type=float, help="total intensity for the S0-monitored families")
    a.add_argument("--grid", help="start:stop:step")
    a.add_argument("--out", help="CSV path (default stdout)")
    a.set_defaults(func=cmd_attack)

    f = sub.add_parser("figure", help="curves and SVG for one figure")
    common(f)
    f.add_argument("name", help=", ".join(FIGURES))
    f.add_argument("--photons", type=float)
    f.add_argument("--grid", help="start:stop:step")
    f.add_argument("--out-dir", dest="out_dir")
    f.set_defaults(func=cmd_figure)

    t = sub.add_parser("selftest", help="run the randomized property suites")
    t.add_argument("--suite", action="append", help="run only this suite (repeatable)")
    t.set_defaults(func=cmd_selftest)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (UsageError, ValueError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_MALFORMED


if __name__ == "__main__":
    sys.exit(main())
