"""Batch command-line front end.

Every subcommand resolves its settings from built-in defaults, then the
``[common]`` and ``[<subcommand>]`` sections of an optional INI file, then
command-line flags.  Artifacts land in ``<outdir>/<subcommand>/<label>/``
(label defaults to a UTC timestamp) next to ``config.json``, the resolved
configuration.  Exit status: 0 success, 1 invalid input, 2 numerical failure.
"""

from __future__ import annotations

import argparse
import configparser
import csv
import hashlib
import io
import json
import logging
import math
import os
import sys
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import __version__
from .analysis import (
    NamedConstants,
    fractal_identity_check,
    phase_shift_correlation,
    rao_spacing_statistic,
    unfold,
    IDENTITY_FACTOR,
)
from .cbc import QuadratureConfig, adjust_turning_point, cbc_ratio_series, fmt
from .fractal import FractalParams, PhiSquared, affine_weierstrass, weierstrass_real
from .optimizer import (
    FitProblem,
    differential_evolution,
    fit_phases_fixed_x,
    iterate_two_step,
    potential_covering,
    replay,
)
from .potential import SmoothPotential, dominici_series
from .presets import FIFTEEN_A_PHASES, FIFTEEN_B_PHASES, REFERENCE_SETS
from .zeta_zeros import compute_zeros, ingest_zeros, reference_zeros

log = logging.getLogger("susyzeta")

THREADS_ENV = "SUSYZETA_THREADS"
# keys that only steer where output goes; excluded from the config hash
_LOCATION_KEYS = ("outdir", "label", "config", "command", "threads")


class ValidationError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ValidationError(f"{self.prog}: {message}")


def _floats(text: str) -> list[float]:
    try:
        return [float(v) for v in str(text).replace(";", ",").split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _ints(text: str) -> list[int]:
    try:
        return [int(v) for v in str(text).split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _bool(text) -> bool:
    if isinstance(text, bool):
        return text
    t = str(text).strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise argparse.ArgumentTypeError(f"expected a boolean, got {text!r}")


# --- parser -------------------------------------------------------------------

COMMON_DEFAULTS = {"outdir": "runs", "label": None, "zeros": None, "threads": None}


def _add_common(p):
    S = argparse.SUPPRESS
    p.add_argument("--config", default=S, help="INI file with [common] and per-subcommand sections")
    p.add_argument("--outdir", default=S, help="output root (default: runs)")
    p.add_argument("--label", default=S, help="run directory name (default: UTC timestamp)")
    p.add_argument("--zeros", default=S, help="zero table path (default: shipped reference table)")
    p.add_argument("--threads", type=int, default=S, help=f"worker threads (default: ${THREADS_ENV} or 1)")


def _add_params(p):
    S = argparse.SUPPRESS
    p.add_argument("--preset", choices=sorted(REFERENCE_SETS), default=S, help="named reference parameter set")
    p.add_argument("--gamma", type=float, default=S)
    p.add_argument("--sigma", default=S, help="scale factor (fit: 'free', 'fixed_1' or a number)")
    p.add_argument("--phases", type=_floats, default=S, help="scaled phases alpha_k in [0,1]")
    p.add_argument("--phases-rad", type=_floats, default=S, help="physical phases in radians")
    p.add_argument("--D", type=float, default=S)


SUBCOMMANDS = {
    "zeros": {"count": 300, "method": "compute", "grid_step": 0.1, "corrections": 4},
    "turning-points": {"n": 8},
    "weier": {"gamma": 1.41119, "sigma": "1", "phases": None, "phases_rad": None, "preset": None, "D": 1.5,
              "x_min": -4.0, "x_max": 4.0, "points": 801, "scale": 1.0, "offset": 0.0},
    "cbc-ratios": {"n": 1, "x": None, "gamma": 2.0, "sigma": "0", "phases": None, "phases_rad": None,
                   "preset": None, "D": 1.5, "rel_tol": 1e-8},
    "adjust": {"j": None, "n": 1, "gamma": 2.0, "sigma": "0", "phases": None, "phases_rad": None,
               "preset": None, "D": 1.5, "grid": 400, "search_factor": 1.05},
    "fit": {"n": 7, "m": 7, "sigma": "fixed_1", "gamma": None, "phase_mode": "free", "phase_values": None,
            "x_mode": "free_increasing", "x": None, "weights": [1.0, 1.0], "seed": 0, "population": None,
            "generations": 500, "F": 0.7, "CR": 0.9, "D": 1.5, "phase_bounds": [0.0, 1.0],
            "gamma_bounds": [1.0, 5.0], "sigma_bounds": [0.1, 10.0]},
    "replay": {"preset": None, "gamma": None, "sigma": "1", "phases": None, "phases_rad": None, "x": None,
               "D": 1.5, "weights": [1.0, 1.0]},
    "iterate": {"n": 8, "m": 8, "gamma": 3.0, "sigma": "1", "iterations": 1, "initial_phases": None,
                "seed": 0, "population": None, "generations": 300, "D": 1.5},
    "analyze": {"kind": "correlation", "angles": None, "preset": None, "a": None, "b": None,
                "points": 1024, "result": None, "values": None},
    "identities": {"ids": [1, 2, 3, 4, 5]},
    "dominici": {"x_max": 0.1, "points": 101, "terms": 3, "check_domain": True},
}


def build_parser() -> _Parser:
    S = argparse.SUPPRESS
    parser = _Parser(prog="susyzeta", description="Fractal SUSY-QM model of the Riemann zeros")
    parser.add_argument("--version", action="version", version=f"susyzeta {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("zeros", help="compute or ingest the zero table")
    _add_common(p)
    p.add_argument("--count", type=int, default=S)
    p.add_argument("--method", choices=("compute", "ingest"), default=S)
    p.add_argument("--grid-step", type=float, default=S)
    p.add_argument("--corrections", type=int, default=S)

    p = sub.add_parser("turning-points", help="smooth-potential turning points")
    _add_common(p)
    p.add_argument("--n", type=int, default=S)

    p = sub.add_parser("weier", help="tabulate the Weierstrass term and Phi^2")
    _add_common(p)
    _add_params(p)
    p.add_argument("--x-min", type=float, default=S)
    p.add_argument("--x-max", type=float, default=S)
    p.add_argument("--points", type=int, default=S)
    p.add_argument("--scale", type=float, default=S)
    p.add_argument("--offset", type=float, default=S)

    p = sub.add_parser("cbc-ratios", help="CBC integrals and ratios at given turning points")
    _add_common(p)
    _add_params(p)
    p.add_argument("--n", type=int, default=S)
    p.add_argument("--x", type=_floats, default=S, help="turning points (default: smooth ones)")
    p.add_argument("--rel-tol", type=float, default=S)

    p = sub.add_parser("adjust", help="per-level turning points with CBC ratio nearest 1")
    _add_common(p)
    _add_params(p)
    p.add_argument("--j", type=_ints, default=S, help="levels (default: 1..n)")
    p.add_argument("--n", type=int, default=S)
    p.add_argument("--grid", type=int, default=S)
    p.add_argument("--search-factor", type=float, default=S)

    p = sub.add_parser("fit", help="differential-evolution fit")
    _add_common(p)
    p.add_argument("--n", type=int, default=S)
    p.add_argument("--m", type=int, default=S)
    p.add_argument("--sigma", default=S)
    p.add_argument("--gamma", type=float, default=S, help="hold gamma fixed")
    p.add_argument("--phase-mode", choices=("free", "zero_fixed", "monotone", "fixed_values"), default=S)
    p.add_argument("--phase-values", type=_floats, default=S)
    p.add_argument("--x-mode", choices=("free_increasing", "fixed_smooth", "fixed_values"), default=S)
    p.add_argument("--x", type=_floats, default=S)
    p.add_argument("--weights", type=_floats, default=S)
    p.add_argument("--seed", type=int, default=S)
    p.add_argument("--population", type=int, default=S)
    p.add_argument("--generations", type=int, default=S)
    p.add_argument("--F", type=float, default=S)
    p.add_argument("--CR", type=float, default=S)
    p.add_argument("--D", type=float, default=S)
    p.add_argument("--phase-bounds", type=_floats, default=S)
    p.add_argument("--gamma-bounds", type=_floats, default=S)
    p.add_argument("--sigma-bounds", type=_floats, default=S)

    p = sub.add_parser("replay", help="evaluate the objective at a given point")
    _add_common(p)
    _add_params(p)
    p.add_argument("--x", type=_floats, default=S)
    p.add_argument("--weights", type=_floats, default=S)

    p = sub.add_parser("iterate", help="alternate phase fits and turning-point adjustment")
    _add_common(p)
    p.add_argument("--n", type=int, default=S)
    p.add_argument("--m", type=int, default=S)
    p.add_argument("--gamma", type=float, default=S)
    p.add_argument("--sigma", default=S)
    p.add_argument("--iterations", type=int, default=S)
    p.add_argument("--initial-phases", type=_floats, default=S)
    p.add_argument("--seed", type=int, default=S)
    p.add_argument("--population", type=int, default=S)
    p.add_argument("--generations", type=int, default=S)
    p.add_argument("--D", type=float, default=S)

    p = sub.add_parser("analyze", help="Rao test, phase correlation, residuals, unfolding")
    _add_common(p)
    p.add_argument("--kind", choices=("rao", "correlation", "residuals", "unfold"), default=S)
    p.add_argument("--angles", type=_floats, default=S, help="angles in radians (rao)")
    p.add_argument("--preset", choices=sorted(REFERENCE_SETS), default=S, help="take rao angles from a set")
    p.add_argument("--a", type=_floats, default=S, help="first phase set, radians (correlation)")
    p.add_argument("--b", type=_floats, default=S, help="second phase set, radians (correlation)")
    p.add_argument("--points", type=int, default=S, help="theta grid size (correlation)")
    p.add_argument("--result", default=S, help="fit/replay result.json (residuals)")
    p.add_argument("--values", type=_floats, default=S, help="levels to unfold")

    p = sub.add_parser("identities", help="closed-form checks of quoted fractal turning points")
    _add_common(p)
    p.add_argument("--ids", type=_ints, default=S)

    p = sub.add_parser("dominici", help="series inverse of the potential near x = 0")
    _add_common(p)
    p.add_argument("--x-max", type=float, default=S)
    p.add_argument("--points", type=int, default=S)
    p.add_argument("--terms", type=int, default=S)
    p.add_argument("--check-domain", type=_bool, default=S)
    return parser


# --- configuration -------------------------------------------------------------

def _action_types(parser: _Parser, command: str) -> dict:
    sp = next(a for a in parser._actions if isinstance(a, argparse._SubParsersAction)).choices[command]
    return {a.dest: (a.type, a.choices) for a in sp._actions if a.dest != "help"}


def resolve_config(argv) -> dict:
    """Merge defaults, INI sections and flags (in increasing precedence)."""
    parser = build_parser()
    ns = vars(parser.parse_args(argv))
    command = ns["command"]
    resolved = {**COMMON_DEFAULTS, **SUBCOMMANDS[command]}
    cfg_path = ns.get("config")
    if cfg_path:
        cp = configparser.ConfigParser(inline_comment_prefixes=(";", "#"))
        try:
            with open(cfg_path, encoding="utf-8") as fh:
                cp.read_file(fh)
        except FileNotFoundError:
            raise ValidationError(f"config file {cfg_path} not found") from None
        except configparser.Error as exc:
            raise ValidationError(f"malformed config {cfg_path}: {exc}") from None
        types = _action_types(parser, command)
        for section in ("common", command):
            if not cp.has_section(section):
                continue
            for key, raw in cp.items(section):
                dest = key.replace("-", "_")
                if dest not in types:
                    raise ValidationError(f"{cfg_path}: unknown key {key!r} in [{section}]")
                typ, choices = types[dest]
                try:
                    val = typ(raw) if typ is not None else raw
                except (argparse.ArgumentTypeError, ValueError) as exc:
                    raise ValidationError(f"{cfg_path}: bad value for {key}: {exc}") from None
                if choices is not None and val not in choices:
                    raise ValidationError(f"{cfg_path}: {key} must be one of {sorted(choices)}")
                resolved[dest] = val
    resolved.update({k: v for k, v in ns.items() if k not in ("verbose",)})
    if resolved.get("threads") is None:
        env = os.environ.get(THREADS_ENV)
        try:
            resolved["threads"] = int(env) if env else 1
        except ValueError:
            raise ValidationError(f"{THREADS_ENV} must be an integer, got {env!r}") from None
    if resolved["threads"] < 1:
        raise ValidationError("threads must be >= 1")
    resolved["command"] = command
    return resolved


def config_hash(cfg: dict) -> str:
    core = {k: v for k, v in cfg.items() if k not in _LOCATION_KEYS}
    blob = json.dumps(core, sort_keys=True, default=str).encode()
    return hashlib.sha256(blob).hexdigest()


class Run:
    """Output directory plus artifact writers that stamp version and config hash."""

    def __init__(self, cfg: dict):
        self.cfg = cfg
        self.sha = config_hash(cfg)
        label = cfg.get("label") or datetime.now(timezone.utc).strftime("%Y%m%dT%H%M%S%fZ")
        self.dir = Path(cfg["outdir"]) / cfg["command"] / label
        self.dir.mkdir(parents=True, exist_ok=True)
        self.files: list[str] = []
        echo = {
            "tool": "susyzeta",
            "version": __version__,
            "config_sha256": self.sha,
            "timestamp": datetime.now(timezone.utc).isoformat(),
            "config": cfg,
        }
        (self.dir / "config.json").write_text(json.dumps(echo, indent=2, sort_keys=True, default=str) + "\n")

    @property
    def meta(self) -> dict:
        return {"tool": "susyzeta", "version": __version__, "config_sha256": self.sha}

    def csv(self, name: str, header, rows) -> Path:
        buf = io.StringIO()
        buf.write(f"# tool=susyzeta version={__version__} config_sha256={self.sha}\n")
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([fmt(v) if isinstance(v, (float, np.floating)) else v for v in row])
        return self._write(name, buf.getvalue())

    def csv_text(self, name: str, text: str) -> Path:
        return self._write(name, f"# tool=susyzeta version={__version__} config_sha256={self.sha}\n" + text)

    def json(self, name: str, payload: dict) -> Path:
        doc = {"meta": self.meta, **payload}
        return self._write(name, json.dumps(doc, indent=2, sort_keys=True) + "\n")

    def _write(self, name: str, text: str) -> Path:
        path = self.dir / name
        path.write_text(text, encoding="utf-8")
        self.files.append(str(path))
        return path


# --- helpers -----------------------------------------------------------------

def _zeros(cfg, count: int):
    if cfg.get("zeros"):
        return ingest_zeros(cfg["zeros"], count)
    return reference_zeros(count)


def _sigma_value(raw) -> float:
    try:
        return float(raw)
    except (TypeError, ValueError):
        if raw in ("fixed_1", "fixed"):
            return 1.0
        raise ValidationError(f"sigma must be a number here, got {raw!r}") from None


def _params(cfg) -> FractalParams:
    D = float(cfg.get("D") or 1.5)
    if cfg.get("preset"):
        return REFERENCE_SETS[cfg["preset"]].params(D)
    sigma = _sigma_value(cfg.get("sigma", 1.0))
    if cfg.get("phases_rad") is not None:
        return FractalParams.from_radians(cfg["gamma"], cfg["phases_rad"], sigma=sigma, D=D)
    return FractalParams(gamma=cfg["gamma"], phases=tuple(cfg.get("phases") or ()), sigma=sigma, D=D)


def _fmt_row(values):
    return [fmt(v) for v in values]


# --- subcommands -------------------------------------------------------------

def cmd_zeros(cfg, run: Run):
    if cfg["method"] == "ingest":
        if not cfg.get("zeros"):
            table = reference_zeros(cfg["count"])
        else:
            table = ingest_zeros(cfg["zeros"], cfg["count"])
    else:
        table = compute_zeros(cfg["count"], grid_step=cfg["grid_step"], corrections=cfg["corrections"])
    run.csv_text("zeros.txt", table.to_text())
    run.csv("zeros.csv", ["j", "lambda"], ([j, f"{v:.12f}"] for j, v in enumerate(table.values, 1)))


def cmd_turning_points(cfg, run: Run):
    n = cfg["n"]
    lams = _zeros(cfg, n).as_array()
    pot = SmoothPotential()
    x = np.atleast_1d(pot.smooth_turning_point(lams))
    run.csv("turning_points.csv", ["j", "lambda", "x"], ([j, float(l), float(v)] for j, (l, v) in enumerate(zip(lams, x), 1)))


def cmd_weier(cfg, run: Run):
    params = _params(cfg)
    pot = SmoothPotential()
    xs = np.linspace(cfg["x_min"], cfg["x_max"], cfg["points"])
    F = np.asarray(weierstrass_real(xs, params))
    aff = affine_weierstrass(xs, params, cfg["scale"], cfg["offset"])
    phi2 = PhiSquared(potential_for(pot, np.max(np.abs(xs))), params)(xs)
    run.csv("weier.csv", ["x", "F", "affine", "phi2"], zip(map(float, xs), map(float, F), map(float, aff), map(float, phi2)))


def potential_for(pot: SmoothPotential, x_max: float) -> SmoothPotential:
    return potential_covering(x_max * 1.01, pot)


def cmd_cbc_ratios(cfg, run: Run):
    params = _params(cfg)
    if cfg.get("preset") and cfg.get("x") is None:
        x = np.array(REFERENCE_SETS[cfg["preset"]].x)
    elif cfg.get("x") is not None:
        x = np.asarray(cfg["x"], dtype=float)
    else:
        x = None
    n = len(x) if x is not None else cfg["n"]
    lams = _zeros(cfg, n).as_array()
    pot = SmoothPotential()
    if x is None:
        x = np.atleast_1d(pot.smooth_turning_point(lams))
    if len(x) != n:
        raise ValidationError(f"{len(x)} turning points given for n={n}")
    pot = potential_for(pot, float(np.max(x)))
    qc = QuadratureConfig(beta=params.beta, rel_tol=cfg["rel_tol"])
    report = cbc_ratio_series(lams, x, pot, params, qc)
    run.csv_text("cbc_ratios.csv", report.to_csv())


def cmd_adjust(cfg, run: Run):
    params = _params(cfg)
    levels = cfg.get("j") or list(range(1, cfg["n"] + 1))
    if min(levels) < 1:
        raise ValidationError("levels start at 1")
    lams = _zeros(cfg, max(levels)).as_array()
    pot = SmoothPotential()
    pot = potential_for(pot, float(pot.smooth_turning_point(lams[-1])) * cfg["search_factor"])
    qc = QuadratureConfig(beta=params.beta)
    rows = []
    for j in levels:
        lam = float(lams[j - 1])
        xs = float(pot.smooth_turning_point(lam))
        xa, r = adjust_turning_point(j, lam, pot, params, qc, search=(0.0, cfg["search_factor"] * xs), grid=cfg["grid"])
        rows.append([j, lam, xs, xa, r])
    run.csv("adjust.csv", ["j", "lambda", "x_smooth", "x_adjusted", "ratio"], rows)


def _fit_problem(cfg, zeros, n, m) -> FitProblem:
    sigma = cfg.get("sigma", "fixed_1")
    if sigma == "free":
        sigma_mode, sigma_value = "free", 1.0
    else:
        sigma_mode, sigma_value = "fixed", _sigma_value(sigma)
    weights = tuple(cfg.get("weights") or (1.0, 1.0))
    if len(weights) != 2:
        raise ValidationError("weights takes two numbers: w_susy,w_cbc")
    kw = dict(
        zeros=zeros,
        n=n,
        m=m,
        sigma_mode=sigma_mode,
        sigma_value=sigma_value,
        weights=weights,
        seed=cfg.get("seed", 0),
        generations=cfg.get("generations", 500),
        population=cfg.get("population"),
        D=cfg.get("D", 1.5),
        workers=cfg["threads"],
    )
    for key, name in (("phase_bounds", "phase_bounds"), ("gamma_bounds", "gamma_bounds"), ("sigma_bounds", "sigma_bounds")):
        if cfg.get(key) is not None:
            if len(cfg[key]) != 2:
                raise ValidationError(f"{key} takes two numbers: low,high")
            kw[name] = tuple(cfg[key])
    for key in ("F", "CR", "phase_mode", "x_mode"):
        if cfg.get(key) is not None:
            kw[key] = cfg[key]
    if cfg.get("phase_values") is not None:
        kw["phase_values"] = cfg["phase_values"]
    if cfg.get("x") is not None:
        kw["x_values"] = cfg["x"]
    if cfg.get("gamma") is not None:
        kw["gamma_fixed"] = cfg["gamma"]
    return FitProblem(**kw)


def cmd_fit(cfg, run: Run):
    n, m = cfg["n"], cfg["m"]
    problem = _fit_problem(cfg, _zeros(cfg, n), n, m)
    if problem.weights[1] == 0 and problem.x_mode != "free_increasing" and problem.gamma_fixed is not None:
        result = fit_phases_fixed_x(problem)
    else:
        result = differential_evolution(problem)
    _write_result(run, result)
    run.csv_text("history.csv", result.history_csv())


def _write_result(run: Run, result):
    run.json("result.json", result.to_dict())
    if result.cbc_report is not None:
        run.csv_text("cbc_ratios.csv", result.cbc_report.to_csv())


def cmd_replay(cfg, run: Run):
    if cfg.get("preset"):
        ref = REFERENCE_SETS[cfg["preset"]]
        params = ref.params(cfg.get("D") or 1.5)
        x = cfg.get("x") or list(ref.x)
    else:
        if cfg.get("gamma") is None or cfg.get("x") is None:
            raise ValidationError("replay needs --preset or --gamma, --x and phases")
        params, x = _params(cfg), cfg["x"]
    n = len(x)
    problem = FitProblem(
        zeros=_zeros(cfg, n), n=n, m=params.m, x_mode="fixed_values", x_values=x,
        weights=tuple(cfg.get("weights") or (1.0, 1.0)), D=params.D,
    )
    _write_result(run, replay(params, x, problem))


def cmd_iterate(cfg, run: Run):
    n, m = cfg["n"], cfg["m"]
    if cfg.get("gamma") is None:
        raise ValidationError("iterate holds gamma fixed; pass --gamma")
    problem = FitProblem(
        zeros=_zeros(cfg, n), n=n, m=m, x_mode="fixed_smooth", gamma_fixed=cfg["gamma"],
        sigma_value=_sigma_value(cfg.get("sigma", 1)), seed=cfg["seed"], population=cfg.get("population"),
        generations=cfg["generations"], D=cfg["D"], workers=cfg["threads"], weights=(1.0, 1.0),
    )
    steps = iterate_two_step(problem, cfg["iterations"], initial_phases=cfg.get("initial_phases"))
    doc = {"iterations": [{"phase_fit": a.to_dict(), "adjusted": b.to_dict()} for a, b in steps]}
    run.json("iterations.json", doc)
    rows = []
    for it, (a, b) in enumerate(steps, 1):
        for j, (x0, x1, r) in enumerate(zip(a.x, b.x, b.cbc_report.ratios), 1):
            rows.append([it, j, float(x0), float(x1), float(r)])
    run.csv("iterations.csv", ["iteration", "j", "x_before", "x_adjusted", "ratio"], rows)


def cmd_analyze(cfg, run: Run):
    kind = cfg["kind"]
    if kind == "rao":
        if cfg.get("angles") is not None:
            angles = np.asarray(cfg["angles"])
        else:
            ref = REFERENCE_SETS[cfg.get("preset") or "n20"]
            angles = np.mod(np.asarray(ref.phases_rad), 2 * math.pi)
        res = rao_spacing_statistic(angles)
        run.json("rao.json", {"U_degrees": res.U, "significance": res.significance, "n": res.n})
    elif kind == "correlation":
        a = np.asarray(cfg.get("a") if cfg.get("a") is not None else FIFTEEN_A_PHASES)
        b = np.asarray(cfg.get("b") if cfg.get("b") is not None else FIFTEEN_B_PHASES)
        curve = phase_shift_correlation(a, b, np.linspace(0.0, 2 * math.pi, cfg["points"]))
        run.csv_text("correlation.csv", curve.to_csv())
        run.json("correlation.json", {"base": curve.base, "max": curve.max, "plateau": list(curve.plateau)})
    elif kind == "residuals":
        if not cfg.get("result"):
            raise ValidationError("residuals need --result pointing at a result.json")
        try:
            doc = json.loads(Path(cfg["result"]).read_text(encoding="utf-8"))
            lams, phi2 = np.asarray(doc["lambdas"]), np.asarray(doc["phi2_values"])
        except (OSError, ValueError, KeyError) as exc:
            raise ValidationError(f"cannot read fit result {cfg['result']}: {exc}") from None
        j = np.arange(1, len(lams) + 1)
        rel = (lams - phi2) / (j * math.pi)
        run.csv("residuals.csv", ["j", "lambda", "phi2", "relative_residual"], zip(j, map(float, lams), map(float, phi2), map(float, rel)))
    else:
        vals = cfg.get("values")
        if vals is None:
            vals = list(_zeros(cfg, 10).values)
        run.csv("unfolded.csv", ["lambda", "unfolded"], ([float(v), unfold(v)] for v in vals))


def cmd_identities(cfg, run: Run):
    zeros = _zeros(cfg, 9)
    c = NamedConstants()
    checks = []
    for i in cfg["ids"]:
        rec = fractal_identity_check(i, c, zeros).to_dict()
        rec["printed_factor"] = IDENTITY_FACTOR[i]
        rec["relative_difference"] = rec["multiplier"] / IDENTITY_FACTOR[i] - 1.0
        checks.append(rec)
    run.json("identities.json", {"checks": checks})


def cmd_dominici(cfg, run: Run):
    pot = SmoothPotential()
    xs = np.linspace(0.0, cfg["x_max"], cfg["points"])
    series = dominici_series(xs, cfg["terms"], check_domain=cfg["check_domain"])
    exact = np.array([pot.V_of_x_direct(float(x)) for x in xs])
    rel = np.abs(series - exact) / exact
    run.csv("dominici.csv", ["x", "series", "numerical", "relative_error"], zip(map(float, xs), map(float, series), exact, map(float, rel)))


COMMANDS = {
    "zeros": cmd_zeros,
    "turning-points": cmd_turning_points,
    "weier": cmd_weier,
    "cbc-ratios": cmd_cbc_ratios,
    "adjust": cmd_adjust,
    "fit": cmd_fit,
    "replay": cmd_replay,
    "iterate": cmd_iterate,
    "analyze": cmd_analyze,
    "identities": cmd_identities,
    "dominici": cmd_dominici,
}


def run(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    logging.basicConfig(level=logging.DEBUG if ("-v" in argv or "--verbose" in argv) else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = resolve_config(argv)
        out = Run(cfg)
        COMMANDS[cfg["command"]](cfg, out)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (ValueError, TypeError, OSError, KeyError) as exc:
        print(f"error: invalid input: {exc}", file=sys.stderr)
        return 1
    except (RuntimeError, ArithmeticError) as exc:
        print(f"error: numerical failure: {exc}", file=sys.stderr)
        return 2
    for f in out.files:
        print(f)
    return 0


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
