"""Command-line front end.

    ricci-willmore <command> --config <path> [--out <dir>] [--tol <float>]

Each command writes ``<command>.csv`` into the output directory and exits
with 0 when every check passes, 2 when some inequality is violated beyond
tolerance, and 1 on configuration or precondition errors.
"""
from __future__ import annotations

import argparse
import csv
import io
import itertools
import json
import math
import os
import re
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, fields, replace
from pathlib import Path

import numpy as np

from . import __version__
from .errors import (
    AdmissibilityError,
    ConfigurationError,
    DomainError,
    PreconditionError,
    RangeError,
    UnsupportedProfileError,
)
from .lemma31 import (
    Lemma31Params,
    constant_C,
    critical_slope,
    numerical_sup,
    vanishing_limit,
    verify_pointwise,
)
from .manifold import GeodesicBallDomain, RotSymManifold
from .ode import (
    MAX_STEP,
    check_lemma21,
    check_lemma22,
    focal_bound_check,
    psi_zero_crossing,
    ratio,
    solve_psi_pair,
    wronskian,
)
from .profiles import DecayProfile
from .tube import evolve_riccati_free, evolve_tube
from .willmore import verify_thm11, verify_thm12

COMMANDS = ("lemma21", "lemma22", "lemma31", "riccati-blowup", "thm11", "thm12", "sweep")
SWEEPABLE = ("thm11", "thm12")
THM_COLUMNS = ("theorem", "n", "p", "r0", "profile", "lhs", "rhs", "margin",
               "rv", "rv_spread", "b", "rho_norm", "C_total", "pass")
CHECK_COLUMNS = ("check", "case", "value", "tolerance", "pass")
CSV_SCHEMA_VERSION = 1

SLACK_TOL = 1e-9
WRONSKIAN_TOL = 1e-8
RESIDUAL_TOL = 1e-6
SUP_ORACLE_TOL = 1e-8
VANISHING_RATIO = 1e-3
DEFAULT_EPS_GRID = (1.0, 0.1, 0.01, 1e-4, 1e-6)

_ERRORS = (ConfigurationError, PreconditionError, DomainError, RangeError,
           UnsupportedProfileError, AdmissibilityError)


@dataclass(frozen=True)
class RunConfig:
    """One verification run, built from a flat JSON document."""

    command: str
    n: int = 2
    warp: object = "hyperbolic"
    profile: object = None
    r0: float = 1.0
    p: float = 2.0
    q: float = 3.0
    d0: float = 0.0
    H_over_n: tuple = ()
    eps_grid: tuple = DEFAULT_EPS_GRID
    b_grid: tuple = ()
    r_max: float = 45.0
    step: float = 1e-3
    t_max: float = 20.0
    r_eval: float = 40.0
    r_cut: float = 30.0
    tol: float = 1e-6
    out: str = "."
    plot: bool = False
    grid: dict = field(default_factory=dict)
    sweep_command: str = "thm11"

    def __post_init__(self):
        if self.command not in COMMANDS:
            raise ConfigurationError(f"unknown command {self.command!r}")
        for name in ("r0", "p", "q", "r_max", "step", "t_max", "r_eval", "r_cut", "tol"):
            value = getattr(self, name)
            if isinstance(value, bool) or not isinstance(value, (int, float)):
                raise ConfigurationError(f"{name} must be a number")
            if not (math.isfinite(value) and value > 0):
                raise ConfigurationError(f"{name} must be positive and finite")
        if not 0 < self.step <= MAX_STEP:
            raise ConfigurationError(f"step must not exceed {MAX_STEP}")
        if isinstance(self.n, bool) or not isinstance(self.n, int) or self.n < 1:
            raise ConfigurationError("n must be a positive integer")
        if not (isinstance(self.d0, (int, float)) and self.d0 >= 0):
            raise ConfigurationError("d0 must be >= 0")
        if self.sweep_command not in SWEEPABLE:
            raise ConfigurationError(f"sweep_command must be one of {SWEEPABLE}")
        if self.command == "sweep" and not self.grid:
            raise ConfigurationError("sweep needs a non-empty 'grid'")
        for key, values in self.grid.items():
            if key in ("command", "grid", "sweep_command", "out", "plot"):
                raise ConfigurationError(f"grid key {key!r} cannot be swept")
            if key not in _FIELD_NAMES:
                raise ConfigurationError(f"unknown grid key {key!r}")
            if not isinstance(values, list) or not values:
                raise ConfigurationError(f"grid entry {key!r} must be a non-empty list")

    @classmethod
    def from_mapping(cls, data, command=None):
        if not isinstance(data, dict):
            raise ConfigurationError("config must be a JSON object")
        data = dict(data)
        if command is not None:
            if data.get("command", command) != command:
                raise ConfigurationError(
                    f"config is for {data['command']!r} but {command!r} was requested"
                )
            data["command"] = command
        if "command" not in data:
            raise ConfigurationError("no command given")
        unknown = sorted(set(data) - set(_FIELD_NAMES))
        if unknown:
            raise ConfigurationError(f"unknown config key {unknown[0]!r}", )
        for key in ("H_over_n", "eps_grid", "b_grid"):
            if key in data:
                data[key] = _number_tuple(key, data[key])
        if "grid" in data and not isinstance(data["grid"], dict):
            raise ConfigurationError("grid must be an object of lists")
        return cls(**data)

    def manifold(self):
        return RotSymManifold.from_config(
            {"n": self.n, "warp": self.warp, "r_max": self.r_max, "step": self.step}
        )

    def profiles(self):
        spec = self.profile
        if spec is None:
            return [DecayProfile.zero()]
        if spec == "zero":
            return [DecayProfile.zero()]
        if isinstance(spec, list):
            return [DecayProfile.zero() if s == "zero" else DecayProfile.from_dict(s) for s in spec]
        return [DecayProfile.from_dict(spec)]


_FIELD_NAMES = tuple(f.name for f in fields(RunConfig))


def _number_tuple(key, value):
    if isinstance(value, (int, float)) and not isinstance(value, bool):
        value = [value]
    if not isinstance(value, list) or not all(
        isinstance(v, (int, float)) and not isinstance(v, bool) for v in value
    ):
        raise ConfigurationError(f"{key} must be a number or a list of numbers")
    return tuple(float(v) for v in value)


def load_config(path, command=None):
    """Read a JSON config; parse errors are reported with line and column."""
    text = Path(path).read_text()
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigurationError(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}") from None
    try:
        return RunConfig.from_mapping(data, command)
    except ConfigurationError as exc:
        raise ConfigurationError(_locate(path, text, exc)) from None
    except TypeError as exc:
        raise ConfigurationError(f"{path}: {exc}") from None


def _locate(path, text, exc):
    # point at the first line mentioning the offending key, when there is one
    match = re.search(r"'([^']+)'", str(exc))
    if match:
        needle = f'"{match.group(1)}"'
        for lineno, line in enumerate(text.splitlines(), 1):
            if needle in line:
                return f"{path}:{lineno}: {exc}"
    return f"{path}: {exc}"


# -- output -------------------------------------------------------------

def _fmt(value):
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    return str(value)


def format_csv(kind, columns, rows):
    buf = io.StringIO()
    buf.write(f"# ricci-willmore {__version__} csv-schema={kind}/v{CSV_SCHEMA_VERSION}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([_fmt(row.get(c)) for c in columns])
    return buf.getvalue()


def emit_plot_data(series, out_dir):
    """Write two-column text files, one per named series.

    ``series`` maps a file stem to ``(x_name, y_name, x, y)``.  Values are
    written with 17 significant digits below a single header line.
    """
    if not series:
        raise ValueError("no series to write")
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = []
    for stem, (x_name, y_name, x, y) in series.items():
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        if x.size == 0:
            raise ValueError(f"series {stem!r} is empty")
        if x.shape != y.shape:
            raise ValueError(f"series {stem!r} has columns of unequal length")
        lines = [f"# {x_name} {y_name}"]
        lines += [f"{a:.17g} {b:.17g}" for a, b in zip(x, y)]
        path = out / f"{_slug(stem)}.dat"
        path.write_text("\n".join(lines) + "\n")
        paths.append(path)
    return paths


def _slug(text):
    return re.sub(r"[^A-Za-z0-9.-]+", "_", text).strip("_")


def _check_row(check, case, value, tolerance, passed):
    return {"check": check, "case": case, "value": float(value),
            "tolerance": float(tolerance), "pass": bool(passed)}


def _slack_rows(report, case):
    rows = [_check_row(f"slack:{k}", case, v, SLACK_TOL, v >= -SLACK_TOL)
            for k, v in report.slacks.items()]
    rows += [_check_row(f"residual:{k}", case, v, RESIDUAL_TOL, v <= RESIDUAL_TOL)
             for k, v in report.residuals.items()]
    return rows


def _thm_row(report):
    c = report.constants
    return {
        "theorem": report.theorem, "n": report.n, "p": report.p, "r0": float(report.r0),
        "profile": report.profile, "lhs": report.lhs, "rhs": report.rhs,
        "margin": report.margin, "rv": report.rv_estimate, "rv_spread": report.rv_spread,
        "b": c.get("b"), "rho_norm": c.get("rho_norm"), "C_total": c.get("C_total"),
        "pass": report.passed,
    }


# -- commands -----------------------------------------------------------

def _lemma_ode(cfg, which):
    rows, series = [], {}
    for prof in cfg.profiles():
        sol1, sol2 = solve_psi_pair(prof, cfg.t_max, cfg.step)
        case = prof.label
        if which == "lemma21":
            rows += _slack_rows(check_lemma21(sol1, lambda_mass=prof.mass()), case)
            t = sol1.grid[1:]
            series[f"psi1_over_sinh_{case}"] = ("t", "psi1/sinh", t, sol1.psi[1:] / np.sinh(t))
        else:
            rows += _slack_rows(check_lemma22(sol1, sol2), case)
            hi, lo = ratio(sol2, sol1)
            series[f"psi2_over_psi1_{case}"] = ("t", "psi2/psi1", sol1.grid[1:], hi[1:] + lo[1:])
        drift = float(np.max(np.abs(wronskian(sol1, sol2) - 1.0)))
        rows.append(_check_row("residual:wronskian", case, drift, WRONSKIAN_TOL, drift <= WRONSKIAN_TOL))
    return "check", rows, series


def _lemma31(cfg):
    b_grid = cfg.b_grid or tuple(np.logspace(-8, 8, 60))
    rows = []
    for eps in cfg.eps_grid:
        params = Lemma31Params(cfg.p, cfg.q, eps)
        case = f"p={cfg.p!r},q={cfg.q!r},eps={eps!r}"
        pw = verify_pointwise(params, b_grid)
        rows.append(_check_row("pointwise_relative_margin", case, pw.relative, SLACK_TOL, pw.relative >= -SLACK_TOL))
        c = constant_C(params)
        sup_err = abs(numerical_sup(params) - c) / c
        rows.append(_check_row("sup_oracle_relative_error", case, sup_err, SUP_ORACLE_TOL, sup_err <= SUP_ORACLE_TOL))
        slope = abs(critical_slope(params))
        rows.append(_check_row("critical_point_slope", case, slope, RESIDUAL_TOL, slope <= RESIDUAL_TOL))
    values = vanishing_limit(cfg.p, cfg.q, cfg.eps_grid)
    ratio = float(values[-1] / values[0])
    limit = VANISHING_RATIO if min(cfg.eps_grid) <= 1e-6 else 1.0
    rows.append(_check_row("vanishing_ratio", f"p={cfg.p!r},q={cfg.q!r}", ratio, limit, ratio <= limit))
    series = {"lemma_constant_vs_eps": ("eps", "C(p,q,eps)", np.array(cfg.eps_grid), values)}
    return "check", rows, series


def _riccati_blowup(cfg):
    if not cfg.H_over_n:
        raise ConfigurationError("riccati-blowup needs H_over_n values")
    rows, series = [], {}
    for prof in cfg.profiles():
        lam = prof.along_geodesic(cfg.d0)
        two_b = 2.0 * prof.mass()
        for k in cfg.H_over_n:
            case = f"{prof.label},d0={cfg.d0!r},H/n={k!r}"
            t0 = focal_bound_check(two_b, k)
            evo = evolve_riccati_free(lam, cfg.n * k, cfg.n, cfg.t_max, cfg.step)
            crossing = psi_zero_crossing(lam, k, min(cfg.t_max, t0 + 1.0), cfg.step)
            if evo.blow_up is None or crossing is None:
                rows.append(_check_row("blow_up_found", case, math.inf, cfg.t_max, False))
                continue
            slack = t0 + 1e-6 - evo.blow_up
            rows.append(_check_row("t0_minus_blow_up", case, slack, 0.0, slack >= 0))
            slack = t0 - crossing
            rows.append(_check_row("t0_minus_psi_zero", case, slack, 0.0, slack >= 0))
            gap = abs(crossing - evo.blow_up)
            rows.append(_check_row("psi_zero_vs_blow_up", case, gap, 1e-5 * cfg.n, gap <= 1e-5 * cfg.n))
            series[f"riccati_m_{case}"] = ("t", "m", evo.grid, evo.m)
    return "check", rows, series


def _domain(cfg):
    return GeodesicBallDomain(cfg.manifold(), cfg.r0)


def _tube_series(domain, cfg):
    evo = evolve_tube(domain, min(cfg.r_eval, domain.manifold.r_max - domain.r0), cfg.step)
    return {"tube_mean_curvature": ("t", "m", evo.grid, evo.m),
            "tube_log_jacobian": ("t", "logJ", evo.grid, evo.logJ)}


def _thm11(cfg):
    domain = _domain(cfg)
    prof = cfg.profiles()[0] if cfg.profile is not None else domain.manifold.profile
    report = verify_thm11(domain, prof, cfg.r_eval, cfg.tol)
    series = _tube_series(domain, cfg) if cfg.plot else {}
    return "thm", [_thm_row(report)], series


def _thm12(cfg):
    domain = _domain(cfg)
    report = verify_thm12(domain, cfg.p, cfg.r_eval, cfg.r_cut, cfg.tol)
    series = _tube_series(domain, cfg) if cfg.plot else {}
    return "thm", [_thm_row(report)], series


def sweep_points(cfg):
    """Configs for every point of the grid, in grid order (last key varies fastest)."""
    keys = list(cfg.grid)
    points = []
    for combo in itertools.product(*(cfg.grid[k] for k in keys)):
        data = {k: v for k, v in zip(keys, combo)}
        points.append(replace(cfg, command=cfg.sweep_command, grid={}, plot=False, **data))
    return points


def _thread_cap():
    raw = os.environ.get("TOOL_THREADS")
    if raw:
        try:
            value = int(raw)
        except ValueError:
            raise ConfigurationError("TOOL_THREADS must be a positive integer") from None
        if value < 1:
            raise ConfigurationError("TOOL_THREADS must be a positive integer")
        return value
    return os.cpu_count() or 1


def _sweep(cfg):
    points = sweep_points(cfg)
    runner = _DISPATCH[cfg.sweep_command]
    workers = max(1, min(_thread_cap(), len(points)))
    with ThreadPoolExecutor(max_workers=workers) as pool:
        results = list(pool.map(runner, points))
    rows = [row for _, rs, _ in results for row in rs]
    return "thm", rows, {}


_DISPATCH = {
    "lemma21": lambda c: _lemma_ode(c, "lemma21"),
    "lemma22": lambda c: _lemma_ode(c, "lemma22"),
    "lemma31": _lemma31,
    "riccati-blowup": _riccati_blowup,
    "thm11": _thm11,
    "thm12": _thm12,
    "sweep": _sweep,
}


def execute(cfg):
    """Run one config; returns ``(csv_text, all_passed, plot_series)``."""
    kind, rows, series = _DISPATCH[cfg.command](cfg)
    columns = THM_COLUMNS if kind == "thm" else CHECK_COLUMNS
    return format_csv(kind, columns, rows), all(r["pass"] for r in rows), series


def run(cfg):
    """Execute a config, write its outputs and return the exit code."""
    try:
        text, ok, series = execute(cfg)
        out = Path(cfg.out)
        out.mkdir(parents=True, exist_ok=True)
        (out / f"{cfg.command}.csv").write_text(text)
        if cfg.plot and series:
            emit_plot_data(series, out / "plot_data")
    except _ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0 if ok else 2


def build_parser():
    parser = argparse.ArgumentParser(prog="ricci-willmore", description=__doc__.splitlines()[0])
    parser.add_argument("command", choices=COMMANDS)
    parser.add_argument("--config", help="JSON config file")
    parser.add_argument("--out", help="output directory (overrides the config)")
    parser.add_argument("--tol", type=float, help="relative pass tolerance (overrides the config)")
    group = parser.add_argument_group("lemma31 options")
    group.add_argument("--p", type=float)
    group.add_argument("--q", type=float)
    group.add_argument("--eps-grid", type=_float_list)
    group.add_argument("--b-grid", type=_float_list)
    return parser


def _float_list(text):
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a comma-separated list of numbers: {text!r}") from None


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        if args.config:
            cfg = load_config(args.config, args.command)
        elif args.command == "lemma31":
            cfg = RunConfig(command="lemma31")
        else:
            raise ConfigurationError(f"{args.command} needs --config")
        overrides = {k: v for k, v in (("out", args.out), ("tol", args.tol)) if v is not None}
        if args.command == "lemma31":
            for key in ("p", "q", "eps_grid", "b_grid"):
                value = getattr(args, key)
                if value is not None:
                    overrides[key] = tuple(value) if isinstance(value, list) else value
        cfg = replace(cfg, **overrides)
    except _ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return run(cfg)
