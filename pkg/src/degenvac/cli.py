"""Command-line entry points: ``run``, ``predict``, ``verify``, ``mms-order``."""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

import numpy as np

from .config import RunConfig, parse_config
from .errors import DegenvacError, NoCrossing
from .functionals import BlowUpReport, dissipation_bound, predict_blowup_bound
from .runner import RunResult, initial_blowup_inputs, simulate
from .verify import VerificationReport, convergence_study, run_invariant_suite

SERIES_COLUMNS = (
    "t", "m", "M2", "F", "eps", "I", "I_alt", "dIdt_rhs", "sup_rho",
    "rho_bound", "area_A", "dissipation", "energy_residual",
)
PATH_COLUMNS = ("t", "path_id", "x", "u", "xi", "monotone_q")

EXIT_OK = 0
EXIT_ERROR = 2
EXIT_CHECK_FAILED = 1
EXIT_NO_CROSSING = 3


def fmt(v) -> str:
    """17 significant digits, locale independent, with ``-0`` folded to ``0``."""
    if isinstance(v, (int, np.integer)) and not isinstance(v, bool):
        return str(int(v))
    f = float(v)
    if f == 0.0:
        f = 0.0
    return format(f, ".17g")


def _write_csv(path: Path, header, rows) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(fmt(v) for v in row) + "\n")


def snapshot_name(t: float) -> str:
    return f"snapshot_{t:.6f}.csv"


def write_run(result: RunResult, out: Path) -> list[Path]:
    out.mkdir(parents=True, exist_ok=True)
    written = []
    series = out / "series.csv"
    _write_csv(series, SERIES_COLUMNS,
               ([getattr(r, c) for c in SERIES_COLUMNS] for r in result.records))
    written.append(series)

    rows = []
    for k, t in enumerate(result.times):
        for j, p in enumerate(result.paths):
            rows.append((t, j, p.positions[k], result.path_u[k, j], result.path_xi[k, j], result.path_q[k, j]))
    paths = out / "paths.csv"
    _write_csv(paths, PATH_COLUMNS, rows)
    written.append(paths)

    for s in result.snapshots:
        f = out / snapshot_name(s.t)
        _write_csv(f, ("x", "rho", "u"), zip(s.x, s.rho, s.u))
        written.append(f)
    return written


def cmd_run(config: RunConfig, out: Path) -> int:
    result = simulate(config.setup(), keep_snapshots=True)
    write_run(result, out)
    print(f"run: {result.n_steps} steps, {len(result.records)} samples -> {out}")
    return EXIT_OK


def blowup_inputs(config: RunConfig) -> dict:
    """Initial-data constants feeding the crossing bound, including ``M_const``."""
    inputs = initial_blowup_inputs(config.setup())
    inputs["M_const"] = dissipation_bound(inputs["area_A0"], inputs["rho_bound"], config.params)
    return inputs


def cmd_predict(config: RunConfig, out: Path, constants: dict | None = None) -> int:
    """``constants`` replaces the computed ``I0, M_const, area_A0, m0``
    (for checking the envelope logic on synthetic inputs)."""
    inputs = blowup_inputs(config) if constants is None else dict(constants)
    out.mkdir(parents=True, exist_ok=True)
    try:
        report = predict_blowup_bound(
            inputs["I0"], inputs["M_const"], inputs["area_A0"], inputs["m0"], config.params, config.t_max
        )
    except NoCrossing as exc:
        payload = {"error": "no-crossing", "t_max": exc.t_max, "inputs": inputs}
        (out / "blowup.json").write_text(_dumps(payload), encoding="utf-8")
        print(f"predict: {exc}", file=sys.stderr)
        return EXIT_NO_CROSSING
    payload = {**report.as_dict(), "inputs": inputs}
    (out / "blowup.json").write_text(_dumps(payload), encoding="utf-8")
    print(f"predict: gamma_case={report.gamma_case} t_cross={report.t_cross:.10g}")
    return EXIT_OK


def read_blowup(path: Path) -> BlowUpReport:
    data = json.loads(Path(path).read_text(encoding="utf-8"))
    data.pop("inputs", None)
    return BlowUpReport(**data)


def _dumps(obj) -> str:
    def clean(v):
        if isinstance(v, dict):
            return {k: clean(x) for k, x in v.items()}
        if isinstance(v, (float, np.floating)):
            f = float(v)
            return f if math.isfinite(f) else str(f)
        return v

    return json.dumps(clean(obj), indent=2, sort_keys=True) + "\n"


def _write_report(report: VerificationReport, out: Path) -> None:
    out.mkdir(parents=True, exist_ok=True)
    (out / "report.txt").write_text(report.to_text(), encoding="utf-8")
    (out / "report.json").write_text(report.to_json(), encoding="utf-8")


def cmd_verify(config: RunConfig, out: Path, tamper=None) -> int:
    report = run_invariant_suite(config.setup(), tamper=tamper)
    _write_report(report, out)
    sys.stdout.write(report.to_text())
    return EXIT_OK if report.passed else EXIT_CHECK_FAILED


def cmd_mms_order(config: RunConfig, out: Path) -> int:
    report = convergence_study(config.setup(), list(config.levels))
    _write_report(report, out)
    sys.stdout.write(report.to_text())
    return EXIT_OK if report.passed else EXIT_CHECK_FAILED


COMMANDS = {
    "run": cmd_run,
    "predict": cmd_predict,
    "verify": cmd_verify,
    "mms-order": cmd_mms_order,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="degenvac", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)
    helps = {
        "run": "simulate and write series, paths and snapshots as CSV",
        "predict": "compute the lifetime upper bound from the initial data",
        "verify": "run the invariant suite",
        "mms-order": "manufactured-solution order and residual decay across levels",
    }
    for name, text in helps.items():
        p = sub.add_parser(name, help=text)
        p.add_argument("--config", required=True, type=Path, help="configuration file")
        p.add_argument("--out", type=Path, default=None, help="output directory (default: outputs.directory)")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        config = parse_config(args.config)
        out = args.out if args.out is not None else Path(config.directory)
        return COMMANDS[args.command](config, out)
    except DegenvacError as exc:
        print(f"degenvac {args.command}: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
