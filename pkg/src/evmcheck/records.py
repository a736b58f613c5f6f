"""Measurement records and their flat JSON form."""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, fields
from pathlib import Path

MODES = (
    "quadrature",
    "quadrature-heterodyne",
    "stokes-bare",
    "stokes-with-S1",
    "stokes-with-S0",
)

_QUAD = ("mean_x_0", "mean_x_1", "mean_p_0", "mean_p_1", "var_x", "var_p")
_STOKES = ("mean_S2_0", "mean_S2_1", "mean_S3_0", "mean_S3_1", "var_S2", "var_S3")

# measured entries per mode, beyond mode/overlap_s/eta
REQUIRED = {
    "quadrature": _QUAD,
    "quadrature-heterodyne": _QUAD + ("sym_xp_0", "sym_xp_1"),
    "stokes-bare": ("alpha_lo",) + _STOKES,
    "stokes-with-S1": ("alpha_lo",) + _STOKES + ("mean_S1_0", "mean_S1_1", "var_S1"),
    "stokes-with-S0": ("alpha_lo",) + _STOKES + ("mean_S0",),
}


class RecordError(ValueError):
    """Malformed or inconsistent measurement record."""


@dataclass(frozen=True)
class MeasurementRecord:
    mode: str
    overlap_s: float
    eta: float = 1.0
    alpha_lo: float | None = None
    mean_x_0: float | None = None
    mean_x_1: float | None = None
    mean_p_0: float | None = None
    mean_p_1: float | None = None
    var_x: float | None = None
    var_p: float | None = None
    sym_xp_0: float | None = None
    sym_xp_1: float | None = None
    mean_S2_0: float | None = None
    mean_S2_1: float | None = None
    mean_S3_0: float | None = None
    mean_S3_1: float | None = None
    var_S2: float | None = None
    var_S3: float | None = None
    mean_S1_0: float | None = None
    mean_S1_1: float | None = None
    var_S1: float | None = None
    mean_S0: float | None = None

    def __post_init__(self):
        if self.mode not in MODES:
            raise RecordError(f"mode: unknown mode {self.mode!r}; expected one of {', '.join(MODES)}")
        if not (0.0 <= self.overlap_s <= 1.0):
            raise RecordError(f"overlap_s: {self.overlap_s} outside [0, 1]")
        if not (0.0 <= self.eta <= 1.0):
            raise RecordError(f"eta: {self.eta} outside [0, 1]")
        need = set(REQUIRED[self.mode])
        for f in fields(self):
            if f.name in ("mode", "overlap_s", "eta"):
                continue
            val = getattr(self, f.name)
            if f.name in need and val is None:
                raise RecordError(f"{f.name}: required for mode {self.mode} but missing")
            if f.name not in need and val is not None:
                raise RecordError(f"{f.name}: not measured in mode {self.mode}")
            if val is not None and not math.isfinite(val):
                raise RecordError(f"{f.name}: not finite")
        for name in ("var_x", "var_p", "var_S1", "var_S2", "var_S3"):
            v = getattr(self, name)
            if v is not None and v < 0:
                raise RecordError(f"{name}: variance must be non-negative")

    # conditional moments used by the EVM builder
    def first(self, obs: str, bit: int) -> float | None:
        if obs == "S0":
            return self.mean_S0
        return getattr(self, f"mean_{obs}_{bit}", None)

    def second(self, obs: str, bit: int) -> float | None:
        var = getattr(self, f"var_{obs}", None)
        mean = self.first(obs, bit)
        if var is None or mean is None:
            return None
        return var + mean**2

    def sym_product(self, a: str, b: str, bit: int) -> float | None:
        if {a, b} == {"x", "p"}:
            return getattr(self, f"sym_xp_{bit}", None)
        return None

    def to_dict(self) -> dict:
        return {k: v for k, v in asdict(self).items() if v is not None}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    def with_values(self, **changes) -> "MeasurementRecord":
        d = asdict(self)
        d.update(changes)
        return MeasurementRecord(**d)


def record_from_dict(data: dict) -> MeasurementRecord:
    known = {f.name for f in fields(MeasurementRecord)}
    extra = set(data) - known
    if extra:
        raise RecordError(f"{sorted(extra)[0]}: unknown field")
    for key in ("mode", "overlap_s"):
        if key not in data:
            raise RecordError(f"{key}: missing")
    clean = {}
    for k, v in data.items():
        if k == "mode":
            clean[k] = v
            continue
        try:
            clean[k] = float(v)
        except (TypeError, ValueError):
            raise RecordError(f"{k}: expected a number, got {v!r}") from None
    return MeasurementRecord(**clean)


def load_record(path: str | Path) -> MeasurementRecord:
    try:
        data = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise RecordError(f"record file is not valid JSON: {exc}") from None
    if not isinstance(data, dict):
        raise RecordError("record file must hold a flat JSON object")
    return record_from_dict(data)
