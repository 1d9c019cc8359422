"""Command-line entry point: ``python -m phasecov <command> ...``.

Commands: region, simulate, divisibility, kernel, family-list.
Exit codes: 0 success, 2 configuration or domain error, 3 numerical failure.
Errors are reported as a single JSON object on stderr.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import platform
import sys
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .dynamics import classify_intervals, population, rates_from_spec, trajectory_from_rates
from .errors import ConfigError, DomainError, PhaseCovError
from .families import FamilySpec, family_catalog
from .kernels import (KernelSpec, example_kernel, invert_params, laplace_params_from_kernel,
                      kernel_admissible)
from .rational import RationalLaplace
from .scan import AXES, SCHEMA, AxisRange, ScanConfig, csv_text, scan_region, write_svg
from .verdict import EPS

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC = 0, 2, 3
OUTPUTS = ("trajectory", "rates", "population")


class CliError(Exception):
    def __init__(self, code, payload):
        super().__init__(payload.get("message"))
        self.code = code
        self.payload = payload


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise CliError(EXIT_CONFIG, {"error": "ConfigError", "message": message})


@dataclass
class RunConfig:
    family: FamilySpec | None = None
    rates: dict | None = None
    t_max: float = 10.0
    n_grid: int = 101
    outputs: tuple = ("trajectory", "rates")
    rho0_z: tuple = ()
    tol: float = EPS

    def validate(self) -> "RunConfig":
        if (self.family is None) == (self.rates is None):
            raise ConfigError("give exactly one of 'family' or 'rates'", field="family")
        if not (np.isfinite(self.t_max) and self.t_max > 0):
            raise ConfigError(f"t_max must be positive, got {self.t_max}", field="t_max")
        if self.n_grid < 2:
            raise ConfigError(f"n_grid must be >= 2, got {self.n_grid}", field="n_grid")
        bad = [o for o in self.outputs if o not in OUTPUTS]
        if bad:
            raise ConfigError(f"unknown outputs {bad}; choose from {list(OUTPUTS)}", field="outputs")
        if any(abs(z) > 1 for z in self.rho0_z):
            raise ConfigError("rho0_z values must lie in [-1, 1]", field="rho0_z")
        return self

    def build(self):
        """``(Trajectory, RateTriple)`` for the configured dynamics."""
        if self.family is not None:
            return self.family.build()
        rates = rates_from_spec(self.rates)
        return trajectory_from_rates(rates), rates

    def grid(self) -> np.ndarray:
        return np.linspace(0.0, self.t_max, self.n_grid)

    def to_dict(self) -> dict:
        return {"family": self.family.to_dict() if self.family else None, "rates": self.rates,
                "t_max": self.t_max, "n_grid": self.n_grid, "outputs": list(self.outputs),
                "rho0_z": list(self.rho0_z), "tol": self.tol}

    @classmethod
    def from_dict(cls, data: dict) -> "RunConfig":
        known = {"family", "rates", "t_max", "n_grid", "outputs", "rho0_z", "tol"}
        extra = set(data) - known
        if extra:
            raise ConfigError(f"unknown run config keys {sorted(extra)}", field=sorted(extra)[0])
        fam = data.get("family")
        return cls(
            family=FamilySpec.from_dict(fam) if fam else None,
            rates=data.get("rates"),
            t_max=float(data.get("t_max", 10.0)),
            n_grid=int(data.get("n_grid", 101)),
            outputs=tuple(data.get("outputs", ("trajectory", "rates"))),
            rho0_z=tuple(float(z) for z in data.get("rho0_z", ())),
            tol=float(data.get("tol", EPS)),
        )


# --- helpers -------------------------------------------------------------------------

def _load_json(path):
    try:
        return json.loads(Path(path).read_text())
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}", field="config") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}", field="config") from None


def _parse_value(text):
    try:
        return json.loads(text)
    except json.JSONDecodeError:
        return text


def _parse_params(pairs) -> dict:
    out = {}
    for item in pairs or ():
        key, sep, value = item.partition("=")
        if not sep:
            raise ConfigError(f"--param expects key=value, got {item!r}", field="param")
        out[key] = _parse_value(value)
    return out


def _dump_json(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=False, allow_nan=True) + "\n"


def _table_csv(kind: str, columns: list, rows) -> str:
    buf = io.StringIO()
    buf.write(f"# {SCHEMA} {kind} columns={','.join(columns)}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([repr(float(v)) for v in row])
    return buf.getvalue()


def _emit(text: str, out):
    if out is None:
        sys.stdout.write(text)
    else:
        Path(out).write_text(text)


# --- commands ------------------------------------------------------------------------

def _scan_config(args) -> ScanConfig:
    cfg = ScanConfig.from_dict(_load_json(args.config)) if args.config else ScanConfig()
    if args.grid is not None:
        for ax in (cfg.lam, cfg.lambda_z, cfg.t_z):
            ax.steps = args.grid
    if args.predicates:
        cfg.predicates = tuple(args.predicates.split(","))
    if args.slice:
        cfg.slices = tuple(args.slice)
    if args.tol is not None:
        cfg.tol = args.tol
    if args.threads is not None:
        cfg.threads = args.threads
    if args.point:
        lam, lz, tz = args.point
        cfg.lam, cfg.lambda_z, cfg.t_z = AxisRange(lam, lam, 1), AxisRange(lz, lz, 1), AxisRange(tz, tz, 1)
    return cfg.validate()


def cmd_region(args) -> dict:
    cfg = _scan_config(args)
    result = scan_region(cfg)
    fmt = args.format or "csv"
    if fmt == "svg":
        if args.out is None:
            raise ConfigError("svg output needs --out", field="out")
        write_svg(result, args.out)
    elif fmt == "json":
        _emit(_dump_json(result.to_json_dict()), args.out)
    else:
        _emit(csv_text(result), args.out)
    return {"config": cfg.to_dict(), "counts": result.counts(),
            "containment_violations": result.containment_violations()}


def _run_config(args) -> RunConfig:
    cfg = RunConfig.from_dict(_load_json(args.config)) if args.config else RunConfig()
    if args.family:
        cfg.family, cfg.rates = FamilySpec(args.family, _parse_params(args.param)), None
    elif args.param:
        raise ConfigError("--param needs --family", field="param")
    if args.t_max is not None:
        cfg.t_max = args.t_max
    if args.grid is not None:
        cfg.n_grid = args.grid
    if args.tol is not None:
        cfg.tol = args.tol
    if getattr(args, "rho0_z", None):
        cfg.rho0_z = tuple(args.rho0_z)
        if "population" not in cfg.outputs:
            cfg.outputs = cfg.outputs + ("population",)
    return cfg.validate()


def simulate_table(cfg: RunConfig):
    """Columns and rows of the time series requested by ``cfg``."""
    tr, rates = cfg.build()
    columns = ["t"]
    if "trajectory" in cfg.outputs:
        columns += list(AXES)
    if "rates" in cfg.outputs:
        columns += ["gamma_plus", "gamma_minus", "gamma_z"]
    if "population" in cfg.outputs:
        columns += [f"p[rho0_z={z:g}]" for z in cfg.rho0_z]
    rows = []
    for t in cfg.grid():
        t = float(t)
        row = [t]
        if "trajectory" in cfg.outputs:
            row += list(tr.values(t))
        if "rates" in cfg.outputs:
            row += list(rates(t))
        if "population" in cfg.outputs:
            row += [population(tr, z, t) for z in cfg.rho0_z]
        rows.append(row)
    return columns, rows


def cmd_simulate(args) -> dict:
    cfg = _run_config(args)
    columns, rows = simulate_table(cfg)
    if (args.format or "csv") == "json":
        data = {"schema": SCHEMA, "config": cfg.to_dict(), "columns": columns,
                "rows": [[float(v) for v in r] for r in rows]}
        _emit(_dump_json(data), args.out)
    elif args.format == "svg":
        raise ConfigError("simulate supports csv or json", field="format")
    else:
        _emit(_table_csv("simulate", columns, rows), args.out)
    return {"config": cfg.to_dict(), "rows": len(rows)}


def cmd_divisibility(args) -> dict:
    cfg = _run_config(args)
    if args.format not in (None, "json"):
        raise ConfigError("divisibility emits json only", field="format")
    _, rates = cfg.build()
    report = classify_intervals(rates, cfg.t_max, cfg.n_grid, cfg.tol)
    data = report.to_dict()
    data["config"] = cfg.to_dict()
    _emit(_dump_json(data), args.out)
    return {"config": cfg.to_dict(), "crossings": report.crossings}


def _kernel_from_args(args):
    """``(KernelSpec, example params or None, spec dict)``."""
    if args.example:
        a, ap, am = args.example
        f_s = RationalLaplace.from_dict(json.loads(args.f_s)) if args.f_s else RationalLaplace([1.0], [1.0, 1.0])
        return example_kernel(a, ap, am, f_s), {"a": a, "a_plus": ap, "a_minus": am, "f_s": f_s.to_dict()}
    if args.config:
        return KernelSpec.from_dict(_load_json(args.config)), None
    if args.zero:
        return KernelSpec.zero(), None
    raise ConfigError("kernel needs --example, --config or --zero", field="kernel")


def cmd_kernel(args) -> dict:
    if args.format not in (None, "json"):
        raise ConfigError("kernel emits json only", field="format")
    kernel, example = _kernel_from_args(args)
    grid = np.logspace(np.log10(args.s_min), np.log10(args.s_max), args.s_points)
    params = laplace_params_from_kernel(kernel)
    verdict, reports = kernel_admissible(kernel, depth=args.depth, grid=grid,
                                        tol=EPS if args.tol is None else args.tol)
    t = np.linspace(0.0, args.t_max if args.t_max is not None else 10.0, args.grid or 101)
    try:
        traj = {"t": t.tolist(), **{k: v.tolist() for k, v in invert_params(params, t).items()}}
        inversion = None
    except ArithmeticError as exc:
        traj, inversion = None, str(exc)
    data = {
        "schema": SCHEMA,
        "kernel": kernel.to_dict(),
        "example": example,
        "laplace_params": {name: p.to_dict() for name, p in zip(AXES, params)},
        "admissibility": {"overall": verdict.to_dict(), "functions": [
            {k: v for k, v in r.to_dict().items() if k != "grid"} for r in reports]},
        "cm_grid": grid.tolist(),
        "cm_depth": args.depth,
        "trajectory": traj,
        "inversion_error": inversion,
    }
    _emit(_dump_json(data), args.out)
    return {"overall": verdict.to_dict()}


def cmd_family_list(args) -> dict:
    _emit(_dump_json({"schema": SCHEMA, "families": family_catalog()}), args.out)
    return {}


# --- parser --------------------------------------------------------------------------

def _common(p, formats=("csv", "json", "svg")):
    p.add_argument("--out", help="output path (default: stdout)")
    p.add_argument("--format", choices=formats)
    p.add_argument("--config", help="JSON config file")
    p.add_argument("--tol", type=float, help="classification tolerance (default 1e-9)")
    p.add_argument("--grid", type=int, help="grid points per axis or along t")
    p.add_argument("--threads", type=int)
    p.add_argument("--t-max", type=float, dest="t_max")


def _dynamics_args(p):
    p.add_argument("--family", help="built-in family name (see family-list)")
    p.add_argument("--param", action="append", metavar="KEY=VALUE",
                   help="family parameter; values are parsed as JSON when possible")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="phasecov", description="Phase covariant qubit dynamical maps.")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("region", help="scan the (lambda, lambda_z, t_z) box")
    _common(p)
    p.add_argument("--predicates", help="comma-separated subset of cp,positive,polyhedron,"
                                        "class_l,class_l_rotated,class_cp")
    p.add_argument("--slice", type=float, action="append", help="t_z value of an SVG slice (repeatable)")
    p.add_argument("--point", type=float, nargs=3, metavar=("LAMBDA", "LAMBDA_Z", "T_Z"),
                   help="classify a single channel")
    p.set_defaults(func=cmd_region)

    p = sub.add_parser("simulate", help="trajectory, rates and populations on a time grid")
    _common(p, ("csv", "json"))
    _dynamics_args(p)
    p.add_argument("--rho0-z", type=float, action="append", dest="rho0_z",
                   help="initial z Bloch component for a population curve (repeatable)")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("divisibility", help="CP-, P-divisibility and distinguishability intervals")
    _common(p, ("json",))
    _dynamics_args(p)
    p.set_defaults(func=cmd_divisibility)

    p = sub.add_parser("kernel", help="Laplace-domain kernel analysis")
    _common(p, ("json",))
    p.add_argument("--example", type=float, nargs=3, metavar=("A", "A_PLUS", "A_MINUS"))
    p.add_argument("--f-s", dest="f_s", help='f_s as JSON {"num": [...], "den": [...]} (default 1/(s+1))')
    p.add_argument("--zero", action="store_true", help="the zero kernel")
    p.add_argument("--depth", type=int, default=8)
    p.add_argument("--s-min", type=float, default=1e-3)
    p.add_argument("--s-max", type=float, default=1e3)
    p.add_argument("--s-points", type=int, default=64)
    p.set_defaults(func=cmd_kernel)

    p = sub.add_parser("family-list", help="list built-in families")
    p.add_argument("--out")
    p.set_defaults(func=cmd_family_list)
    return parser


def _error_payload(exc) -> tuple[int, dict]:
    payload = {"error": type(exc).__name__, "message": str(exc)}
    if isinstance(exc, ConfigError) and exc.field is not None:
        payload["field"] = exc.field
    if isinstance(exc, (DomainError, ValueError, TypeError)) and not isinstance(exc, ArithmeticError):
        return EXIT_CONFIG, payload
    return EXIT_NUMERIC, payload


def _write_meta(args, argv, started, elapsed, summary):
    meta = {
        "schema": SCHEMA,
        "command": args.command,
        "argv": list(argv),
        "version": __version__,
        "started": time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime(started)),
        "elapsed_s": elapsed,
        "python": platform.python_version(),
        "numpy": np.__version__,
        "summary": summary,
    }
    Path(str(args.out) + ".meta.json").write_text(json.dumps(meta, indent=2, default=str) + "\n")


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    started = time.time()
    try:
        args = build_parser().parse_args(argv)
        summary = args.func(args)
    except CliError as exc:
        sys.stderr.write(json.dumps(exc.payload) + "\n")
        return exc.code
    except (PhaseCovError, ArithmeticError, ValueError, TypeError) as exc:
        code, payload = _error_payload(exc)
        sys.stderr.write(json.dumps(payload) + "\n")
        return code
    if getattr(args, "out", None):
        _write_meta(args, argv, started, time.time() - started, summary)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
