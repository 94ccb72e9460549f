"""Command-line front end: one subcommand per experiment, CSV or JSON output."""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Sequence

import numpy as np

from . import estimation as est
from . import protocols as proto
from .fock import BasisSizeError, fidelity, mach_zehnder
from .qubits import make_ghz, phased_ghz, rosetta_table
from .sampling import scaling_experiment

SCHEMA_VERSION = "1"
SIG_DIGITS = 12

SENSITIVITY_SCHEMES = ("separable", "noon", "yurke", "dual-fock")
SCALING_SCHEMES = {"separable": "separable_qubits", "single-fock": "single_fock_mz", "noon": "noon"}


@dataclass
class Report:
    """Scalar fields plus an optional table."""

    fields: dict[str, Any] = field(default_factory=dict)
    columns: list[str] = field(default_factory=list)
    rows: list[list[Any]] = field(default_factory=list)


@dataclass(frozen=True)
class RunConfig:
    subcommand: str
    photons: int = 2
    phase_points: int = 101
    reflectivity: float | None = None
    trials: int = 100
    repetitions: int = 10_000
    seed: int = 0
    output_format: str = "json"
    output_path: str | None = None

    def validate(self) -> None:
        for name in ("photons", "phase_points", "trials", "repetitions"):
            if getattr(self, name) < 1:
                raise ValueError(f"--{name.replace('_', '-')} must be positive")
        if self.seed < 0:
            raise ValueError("--seed must be non-negative")
        if self.reflectivity is not None and not 0.0 < self.reflectivity < 1.0:
            raise ValueError("--reflectivity must lie in (0, 1)")


def _num(x: Any) -> Any:
    """Round floats to 12 significant digits; non-finite values become None."""
    if isinstance(x, bool) or x is None or isinstance(x, str):
        return x
    if isinstance(x, (int, np.integer)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        x = float(x)
        if not math.isfinite(x):
            return None
        return float(f"{x:.{SIG_DIGITS}g}")
    if isinstance(x, dict):
        return {str(k): _num(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_num(v) for v in x]
    raise TypeError(f"cannot serialize {type(x).__name__}")


def _cell(x: Any) -> str:
    if isinstance(x, (float, np.floating)):
        return f"{float(x):.{SIG_DIGITS}g}"
    return str(x)


def render(report: Report, fmt: str) -> str:
    if fmt == "json":
        obj: dict[str, Any] = {"schema_version": SCHEMA_VERSION}
        obj.update(_num(report.fields))
        if report.columns:
            obj["columns"] = list(report.columns)
            obj["rows"] = _num(report.rows)
        return json.dumps(obj, indent=2) + "\n"
    if fmt == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(report.columns)
        for row in report.rows:
            writer.writerow([_cell(v) for v in row])
        for key, value in report.fields.items():
            if value is None or isinstance(value, (dict, list, tuple)):
                continue
            buf.write(f"# {key}={_cell(value)}\n")
        return buf.getvalue()
    raise ValueError(f"unknown format {fmt!r}")


def emit(report: Report, fmt: str, path: str | None = None) -> None:
    text = render(report, fmt)
    if path is None:
        sys.stdout.write(text)
    else:
        Path(path).write_text(text, encoding="utf-8", newline="\n")


# --- subcommands ------------------------------------------------------------------


def _phase_grid(points: int) -> np.ndarray:
    return np.linspace(0.0, 2 * math.pi, points)


def cmd_variance_catalog(cfg: RunConfig) -> Report:
    cat = est.variance_catalog(cfg.photons)
    return Report(fields=cat.as_dict())


def _sensitivity_family(scheme: str, n: int):
    """(state family, observable, copies) for a sensitivity scheme."""
    if scheme == "separable":
        return (lambda phi: phased_ghz(1, phi)), est.SumA, n
    if scheme == "noon":
        return (lambda phi: phased_ghz(n, phi)), est.AN, 1
    if scheme == "yurke":
        return (lambda phi: mach_zehnder(proto.yurke(n), phi)), est.Jz, 1
    if scheme == "dual-fock":
        return (lambda phi: mach_zehnder(proto.dual_fock(n), phi)), est.Jz, 1
    raise ValueError(f"unknown scheme {scheme!r}")


def cmd_sensitivity(cfg: RunConfig, scheme: str) -> Report:
    family, obs, copies = _sensitivity_family(scheme, cfg.photons)
    # the grid stops short of 2 pi so the finite difference never leaves one period
    grid = np.linspace(0.0, 2 * math.pi, cfg.phase_points, endpoint=False)
    reports = [est.sensitivity(family, obs, float(p), copies=copies) for p in grid]
    rows = [[r.phi, r.expectation, r.std_dev, r.derivative, r.delta_phi] for r in reports]
    finite = [r for r in reports if not r.divergent]
    fields: dict[str, Any] = {"scheme": scheme, "N": cfg.photons, "observable": str(obs)}
    if finite:
        best = min(finite, key=lambda r: r.delta_phi)
        fields.update(best_phi=best.phi, best_delta_phi=best.delta_phi)
    else:
        fields.update(best_phi=None, best_delta_phi=None)
    fields.update(shot_noise_limit=1 / math.sqrt(cfg.photons), heisenberg_limit=1 / cfg.photons)
    return Report(fields, ["phi", "expectation", "std_dev", "derivative", "delta_phi"], rows)


def cmd_rosetta(cfg: RunConfig) -> Report:
    grid = _phase_grid(cfg.phase_points)
    qubit, optical, offset = rosetta_table(grid)
    rows = [[p, q, o] for p, q, o in zip(grid, qubit, optical)]
    fields = {"offset": offset, "max_abs_difference": float(np.max(np.abs(qubit - optical)))}
    return Report(fields, ["phi", "qubit_circuit", "mach_zehnder"], rows)


def cmd_ghz(cfg: RunConfig) -> Report:
    reg = make_ghz(cfg.photons)
    analytic = np.zeros(2**reg.n, dtype=complex)
    analytic[0] = analytic[-1] = 1 / math.sqrt(2)
    fid = abs(np.vdot(analytic, reg.amplitudes)) ** 2
    rows = []
    for idx in np.flatnonzero(np.abs(reg.amplitudes) > 1e-15):
        amp = reg.amplitudes[idx]
        rows.append([format(idx, f"0{reg.n}b"), amp.real, amp.imag])
    return Report({"N": reg.n, "fidelity_with_analytic": fid}, ["basis", "re", "im"], rows)


def _amplitude_rows(state) -> list[list[Any]]:
    return [[" ".join(map(str, occ)), a.real, a.imag] for occ, a in state.amplitudes.items()]


def cmd_hom(cfg: RunConfig) -> Report:
    out = proto.hom_entangle()
    fields = {
        "coincidence_probability": abs(out[(1, 1)]) ** 2,
        "fidelity_noon2": fidelity(out, proto.noon(2)),
    }
    return Report(fields, ["occupation", "re", "im"], _amplitude_rows(out))


def cmd_lithography(cfg: RunConfig) -> Report:
    grid = _phase_grid(cfg.phase_points)
    curve = proto.deposition_rate(proto.noon(cfg.photons), grid)
    rows = [[p, r] for p, r in zip(curve.phi_grid, curve.normalized_rate)]
    return Report({"N": cfg.photons, "period": curve.period()}, ["phi", "rate"], rows)


def cmd_peel_off(cfg: RunConfig, optimize: bool) -> Report:
    n = cfg.photons
    r2 = 1.0 / n if cfg.reflectivity is None else cfg.reflectivity
    res = proto.peel_off(n, r2)
    fields: dict[str, Any] = {
        "N": n,
        "reflectivity_r2": r2,
        "success_probability": res.success_probability,
        "closed_form_probability": proto.peel_off_probability(n, r2),
        "amplitude_A": res.amplitude_A,
        "target_fidelity": res.target_fidelity(),
        "relative_phase": res.relative_phase,
    }
    if optimize:
        opt = proto.optimal_reflectivity(n)
        fields.update(
            r2_numeric=opt.r2_star,
            probability_numeric=opt.probability_star,
            r2_analytic=opt.r2_analytic,
            probability_analytic=opt.probability_analytic,
            asymptote=proto.asymptotic_success_probability(),
        )
    return Report(fields, ["occupation", "re", "im"], _amplitude_rows(res.conditional_state))


def cmd_scaling(cfg: RunConfig, scheme: str, photons_list: Sequence[int]) -> Report:
    res = scaling_experiment(
        SCALING_SCHEMES[scheme],
        photons_list,
        trials=cfg.trials,
        repetitions=cfg.repetitions,
        seed=cfg.seed,
    )
    fields = {
        "scheme": scheme,
        "exponent": res.fitted_exponent,
        "exponent_stderr": res.exponent_stderr,
    }
    return Report(fields, ["N", "delta_phi"], res.as_rows())


# --- argument parsing --------------------------------------------------------------

_DEFAULT_FORMAT = {
    "variance-catalog": "json",
    "sensitivity": "csv",
    "rosetta": "csv",
    "ghz": "json",
    "hom": "json",
    "lithography": "csv",
    "peel-off": "json",
    "scaling": "csv",
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("csv", "json"), default=None, help="output format")
    common.add_argument("--output", default=None, help="write here instead of stdout")

    parser = argparse.ArgumentParser(
        prog="rosetta-sim", description="Quantum interferometry experiments."
    )
    sub = parser.add_subparsers(dest="subcommand", required=True)

    p = sub.add_parser("variance-catalog", parents=[common], help="Jz variances of three test states")
    p.add_argument("--photons", type=int, default=2)

    p = sub.add_parser("sensitivity", parents=[common], help="phase sensitivity on a phase grid")
    p.add_argument("--scheme", choices=SENSITIVITY_SCHEMES, required=True)
    p.add_argument("--photons", type=int, default=4)
    p.add_argument("--phase-points", type=int, default=73)

    p = sub.add_parser("rosetta", parents=[common], help="qubit vs Mach-Zehnder fringes")
    p.add_argument("--phase-points", type=int, default=101)

    p = sub.add_parser("ghz", parents=[common], help="GHZ state from H + CNOT chain")
    p.add_argument("--photons", type=int, default=3)

    sub.add_parser("hom", parents=[common], help="Hong-Ou-Mandel two-photon entangler")

    p = sub.add_parser("lithography", parents=[common], help="NOON deposition fringes")
    p.add_argument("--photons", type=int, default=2)
    p.add_argument("--phase-points", type=int, default=proto.DEFAULT_GRID_POINTS)

    p = sub.add_parser("peel-off", parents=[common], help="projective peel-off device")
    p.add_argument("--photons", type=int, default=2)
    p.add_argument("--reflectivity", type=float, default=None, help="tap reflectivity r^2")
    p.add_argument("--optimize", action="store_true", help="also optimize r^2 numerically")

    p = sub.add_parser("scaling", parents=[common], help="Monte Carlo scaling of delta phi")
    p.add_argument("--scheme", choices=sorted(SCALING_SCHEMES), required=True)
    p.add_argument("--photons-list", type=int, nargs="+", required=True)
    p.add_argument("--trials", type=int, default=100)
    p.add_argument("--repetitions", type=int, default=10_000)
    p.add_argument("--seed", type=int, default=0)
    return parser


def run(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    fmt = args.format or _DEFAULT_FORMAT[args.subcommand]
    cfg = RunConfig(
        subcommand=args.subcommand,
        photons=getattr(args, "photons", 2),
        phase_points=getattr(args, "phase_points", 101),
        reflectivity=getattr(args, "reflectivity", None),
        trials=getattr(args, "trials", 100),
        repetitions=getattr(args, "repetitions", 10_000),
        seed=getattr(args, "seed", 0),
        output_format=fmt,
        output_path=args.output,
    )
    try:
        cfg.validate()
        if args.subcommand == "scaling" and any(n < 1 for n in args.photons_list):
            raise ValueError("--photons-list entries must be positive")
    except ValueError as exc:
        parser.error(str(exc))

    try:
        if cfg.subcommand == "variance-catalog":
            report = cmd_variance_catalog(cfg)
        elif cfg.subcommand == "sensitivity":
            report = cmd_sensitivity(cfg, args.scheme)
        elif cfg.subcommand == "rosetta":
            report = cmd_rosetta(cfg)
        elif cfg.subcommand == "ghz":
            report = cmd_ghz(cfg)
        elif cfg.subcommand == "hom":
            report = cmd_hom(cfg)
        elif cfg.subcommand == "lithography":
            report = cmd_lithography(cfg)
        elif cfg.subcommand == "peel-off":
            report = cmd_peel_off(cfg, args.optimize)
        else:
            report = cmd_scaling(cfg, args.scheme, args.photons_list)
        emit(report, cfg.output_format, cfg.output_path)
    except (ValueError, ArithmeticError, BasisSizeError, OSError) as exc:
        print(f"rosetta-sim: error: {exc}", file=sys.stderr)
        return 1
    return 0


def main() -> None:
    sys.exit(run())
