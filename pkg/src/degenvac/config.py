"""Line-oriented ``section.key = value`` run configuration."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path

from .errors import DegenvacError, ParseError, ValidationError
from .model import IsolatedMassGroupSpec, Parameters
from .runner import INITIAL_KINDS, Setup
from .scheme import SchemeConfig

FORMATS = ("csv", "json", "txt")


def _float(v: str) -> float:
    return float(v)


def _int(v: str) -> int:
    f = float(v)
    if f != int(f):
        raise ValueError(f"not an integer: {v}")
    return int(f)


def _auto_float(v: str):
    return None if v.lower() == "auto" else float(v)


def _levels(v: str) -> tuple[int, ...]:
    return tuple(_int(s.strip()) for s in v.split(",") if s.strip())


def _formats(v: str) -> tuple[str, ...]:
    out = tuple(s.strip().lower() for s in v.split(",") if s.strip())
    bad = [f for f in out if f not in FORMATS]
    if bad:
        raise ValueError(f"unknown format(s) {bad}; choose from {FORMATS}")
    return out


# key -> (parser, default)
KEYS = {
    "params.gamma": (_float, None),
    "params.delta": (_float, None),
    "spec.c": (_float, None),
    "spec.k1": (_float, None),
    "spec.k2": (_float, None),
    "grid.L": (_auto_float, None),
    "grid.n_cells": (_int, 2000),
    "scheme.cfl": (_float, 0.4),
    "scheme.rho_vac": (_auto_float, None),
    "scheme.dt_max": (_float, 1e-2),
    "sampling.t_final": (_float, 1.0),
    "sampling.n_samples": (_int, 101),
    "sampling.tracers": (_int, 16),
    "outputs.directory": (str, "out"),
    "outputs.formats": (_formats, ("csv", "json", "txt")),
    "initial.kind": (str, "isolated-mass-group"),
    "predict.t_max": (_float, 1e6),
    "verify.levels": (_levels, (200, 400, 800)),
}
REQUIRED = ("params.gamma", "params.delta", "spec.c", "spec.k1", "spec.k2")


@dataclass(frozen=True)
class RunConfig:
    params: Parameters
    spec: IsolatedMassGroupSpec
    half_width: float | None
    n_cells: int
    cfl: float
    rho_vac: float | None
    dt_max: float
    t_final: float
    n_samples: int
    n_tracers: int
    directory: str
    formats: tuple[str, ...]
    initial: str = "isolated-mass-group"
    t_max: float = 1e6
    levels: tuple[int, ...] = (200, 400, 800)
    source: str | None = field(default=None, compare=False)

    def setup(self, n_cells: int | None = None) -> Setup:
        return Setup(
            params=self.params,
            spec=self.spec,
            n_cells=self.n_cells if n_cells is None else int(n_cells),
            t_final=self.t_final,
            half_width=self.half_width,
            cfl=self.cfl,
            rho_vac=self.rho_vac,
            dt_max=self.dt_max,
            n_samples=self.n_samples,
            n_tracers=self.n_tracers,
            initial=self.initial,
        )


def parse_text(text: str, source: str | None = None) -> RunConfig:
    values: dict[str, object] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ParseError(f"expected 'key = value', got {raw.strip()!r}", lineno)
        key, value = (s.strip() for s in line.split("=", 1))
        if key not in KEYS:
            raise ParseError(f"unknown key {key!r}", lineno)
        if key in values:
            raise ParseError(f"duplicate key {key!r}", lineno)
        if not value:
            raise ParseError(f"empty value for {key!r}", lineno)
        parser = KEYS[key][0]
        try:
            values[key] = parser(value)
        except ValueError as exc:
            raise ParseError(f"bad value for {key!r}: {exc}", lineno) from None
    missing = [k for k in REQUIRED if k not in values]
    if missing:
        raise ParseError(f"missing required key(s): {', '.join(missing)}")
    get = {k: values.get(k, d) for k, (_, d) in KEYS.items()}
    return _validate(get, source)


def parse_config(path) -> RunConfig:
    """Read and validate a configuration file."""
    p = Path(path)
    try:
        text = p.read_text(encoding="utf-8")
    except OSError as exc:
        raise ParseError(f"cannot read {p}: {exc.strerror}") from None
    return parse_text(text, str(p))


def _require(ok: bool, constraint: str, detail: str) -> None:
    if not ok:
        raise ValidationError(f"constraint violated: {constraint} ({detail})", constraint)


def _validate(v: dict, source: str | None) -> RunConfig:
    g, d = v["params.gamma"], v["params.delta"]
    _require(math.isfinite(g) and g > 1.0, "gamma > 1", f"gamma = {g:g}")
    _require(math.isfinite(d) and d > 1.0, "delta > 1", f"delta = {d:g}")
    _require(min(g, d) <= 3.0, "1 < min(gamma, delta) <= 3", f"min = {min(g, d):g}")
    params = Parameters(g, d)

    spec = IsolatedMassGroupSpec(v["spec.c"], v["spec.k1"], v["spec.k2"])
    k1_min = max(1.0, 1.0 / (g - 1.0), 1.0 / (d - 1.0))
    _require(spec.c > 0.0, "c > 0", f"c = {spec.c:g}")
    _require(spec.k1 > k1_min, "k1 > max(1, 1/(gamma-1), 1/(delta-1))",
             f"k1 = {spec.k1:g}, bound = {k1_min:g}")
    _require(spec.k2 > 0.5, "k2 > 1/2", f"k2 = {spec.k2:g}")

    L = v["grid.L"]
    _require(L is None or (math.isfinite(L) and L > 0.0), "grid.L > 0 or auto", f"L = {L}")
    _require(v["grid.n_cells"] >= 2, "grid.n_cells >= 2", f"n_cells = {v['grid.n_cells']}")
    _require(v["sampling.t_final"] >= 0.0 and math.isfinite(v["sampling.t_final"]),
             "t_final >= 0", f"t_final = {v['sampling.t_final']:g}")
    _require(v["sampling.n_samples"] >= 1, "n_samples >= 1", f"n_samples = {v['sampling.n_samples']}")
    _require(v["sampling.tracers"] >= 0, "tracers >= 0", f"tracers = {v['sampling.tracers']}")
    _require(v["initial.kind"] in INITIAL_KINDS, f"initial.kind in {INITIAL_KINDS}", v["initial.kind"])
    _require(v["predict.t_max"] > 0.0, "predict.t_max > 0", f"t_max = {v['predict.t_max']:g}")
    lv = v["verify.levels"]
    _require(len(lv) >= 3 and all(b == 2 * a for a, b in zip(lv[:-1], lv[1:])),
             "at least 3 doubling verify.levels", f"levels = {list(lv)}")
    try:
        SchemeConfig(cfl=v["scheme.cfl"], rho_vac=v["scheme.rho_vac"] or 1e-10, dt_max=v["scheme.dt_max"])
        cfg = RunConfig(
            params=params,
            spec=spec,
            half_width=L,
            n_cells=v["grid.n_cells"],
            cfl=v["scheme.cfl"],
            rho_vac=v["scheme.rho_vac"],
            dt_max=v["scheme.dt_max"],
            t_final=v["sampling.t_final"],
            n_samples=v["sampling.n_samples"],
            n_tracers=v["sampling.tracers"],
            directory=v["outputs.directory"],
            formats=v["outputs.formats"],
            initial=v["initial.kind"],
            t_max=v["predict.t_max"],
            levels=lv,
            source=source,
        )
        if cfg.initial != "zero":
            spec.validate(params)
            # domain sizing errors surface here rather than mid-run
            cfg.setup().initial_state()
    except ValidationError:
        raise
    except DegenvacError as exc:
        raise ValidationError(str(exc), type(exc).__name__) from None
    return cfg
