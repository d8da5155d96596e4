"""Command-line front end: JSON configuration in, CSV on standard output.

Exit status: 0 on success, 2 for configuration errors (unreadable JSON,
unknown keys, unusable mesh), 3 for invalid model/weight/task values,
4 for numerical failures.
"""
from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
from typing import Callable

import numpy as np

from .errors import ConfigurationError, DomainError, NumericalError
from .exit import GerberShiu, down_exit_laplace, exit_laplace, h_function, up_exit_laplace
from .mc import DEFAULT_DT, estimate_exit_laplace
from .models import BrownianDrift, model_from_dict
from .omega import DEFAULT_MESH, solve_omega_scale
from .scale import make_scale_eval
from .weights import weight_from_dict

log = logging.getLogger("drawdown_occupation")

EXIT_CONFIG = 2
EXIT_DOMAIN = 3
EXIT_NUMERICAL = 4

TASK_KEYS = {
    "x", "b", "c", "q", "points", "stride", "paths", "seed", "dt", "workers",
    "delta", "z_points", "y_points", "y_max",
}
TOP_KEYS = {"model", "omega", "numerics", "task"}
NUMERIC_KEYS = {"mesh", "x_max"}

COLUMNS = {
    "scale": ["x", "W", "Wprime", "Z"],
    "omega-scale": ["x", "y", "W_omega", "W2", "Zhat", "Zhat1", "Zhat2", "dual_residual"],
    "exit": ["x", "b", "c", "up", "down", "residual"],
    "gerber-shiu": ["x", "z", "z_node", "y", "density"],
    "mc-validate": ["engine", "n", "mean_up", "se_up", "mean_down", "se_down",
                    "analytic_up", "analytic_down", "z_up", "z_down"],
    "table": ["x", "up", "down"],
}


class Run:
    """Parsed configuration with command-line overrides applied."""

    def __init__(self, config: dict, overrides: dict):
        unknown = set(config) - TOP_KEYS
        if unknown:
            raise ConfigurationError(f"unknown config keys {sorted(unknown)}")
        if "model" not in config:
            raise ConfigurationError("config needs a 'model' descriptor")
        numerics = config.get("numerics", {})
        task = config.get("task", {})
        if not isinstance(numerics, dict) or not isinstance(task, dict):
            raise ConfigurationError("'numerics' and 'task' must be objects")
        if set(numerics) - NUMERIC_KEYS:
            raise ConfigurationError(f"unknown numerics keys {sorted(set(numerics) - NUMERIC_KEYS)}")
        if set(task) - TASK_KEYS:
            raise ConfigurationError(f"unknown task keys {sorted(set(task) - TASK_KEYS)}")
        self.model = model_from_dict(config["model"])
        self.omega = weight_from_dict(config.get("omega", {"type": "constant", "q": 0.0}))
        self.mesh = float(overrides.pop("mesh", None) or numerics.get("mesh", DEFAULT_MESH))
        self.x_max = numerics.get("x_max")
        self.task = dict(task)
        self.task.update({k: v for k, v in overrides.items() if v is not None})

    def get(self, key: str, default=None, kind: Callable = float):
        if key in self.task:
            try:
                return kind(self.task[key])
            except (TypeError, ValueError) as exc:
                raise ConfigurationError(f"bad value for {key!r}: {self.task[key]!r}") from exc
        if default is None:
            raise ConfigurationError(f"missing task parameter {key!r}")
        return default

    def span(self, default: float) -> float:
        return float(self.x_max) if self.x_max is not None else default


def _fmt(v) -> str:
    if isinstance(v, str):
        return v
    if isinstance(v, (int, np.integer)) and not isinstance(v, bool):
        return str(int(v))
    return "%.12g" % float(v)


def _lattice(lo: float, hi: float, points: int) -> np.ndarray:
    if points < 2:
        raise DomainError("need at least 2 lattice points")
    return lo + (hi - lo) * np.arange(points) / (points - 1)


def cmd_scale(run: Run):
    q = run.get("q", 0.0)
    se = make_scale_eval(run.model, q)
    for x in _lattice(0.0, run.span(2.0), run.get("points", 101, int)):
        yield [x, float(se.W(x)), float(se.w_prime_right(x)), float(se.Z(x))]


def cmd_omega_scale(run: Run):
    grid = solve_omega_scale(run.model, run.omega, run.span(2.0), run.mesh)
    grid.check_residual()
    stride = run.get("stride", max(1, grid.n // 100), int)
    if stride < 1:
        raise DomainError("stride must be >= 1")
    idx = range(0, grid.n + 1, stride)
    W, W2, Zh, Z2, R = grid.W, grid.W2, grid.Zhat, grid.Zhat2, grid.residual
    for i in idx:
        for j in idx:
            if j > i:
                break
            yield [grid.x[i], grid.x[j], W[i, j], W2[i, j], Zh[i, j],
                   grid.om_plus[i] * W[i, j], Z2[i, j], R[i, j]]


def cmd_exit(run: Run):
    b = run.get("b")
    x = run.get("x")
    c = run.get("c", 0.0)
    rep = exit_laplace(run.model, run.omega, x, b, c, run.mesh)
    yield [rep.x, rep.b, rep.c, rep.up, rep.down, rep.dual_residual]


def cmd_table(run: Run):
    b = run.get("b")
    c = run.get("c", 0.0)
    points = run.get("points", 21, int)
    xs = _lattice(c, b, points)
    spacing = (b - c) / (points - 1)
    span = max(b - c, 1.0)
    grid = solve_omega_scale(run.model, run.omega, span, run.mesh, align=(spacing, b - c, 1.0))
    grid.check_residual()
    hf = h_function(grid)
    for k, x in enumerate(xs):
        u = c + k * spacing if k < points - 1 else b
        yield [x, up_exit_laplace(hf, u - c, b - c), down_exit_laplace(grid, hf, u - c, b - c)]


def cmd_gerber_shiu(run: Run):
    x, b = run.get("x"), run.get("b")
    delta = run.get("delta", 0.0)
    nz = run.get("z_points", 20, int)
    ny = run.get("y_points", 20, int)
    y_max = run.get("y_max", 5.0)
    if nz < 1 or ny < 1 or not y_max > 0:
        raise DomainError("need z_points, y_points >= 1 and y_max > 0")
    zs = b * np.arange(1, nz + 1) / (nz + 1)
    ys = y_max * np.arange(1, ny + 1) / ny
    if isinstance(run.model, BrownianDrift):
        log.warning("Brownian model has no jumps; every density is 0")
        for z in zs:
            for y in ys:
                yield [x, z, z, y, 0.0]
        return
    gs = GerberShiu(run.model, run.omega, x, b, delta, run.mesh)
    for z in zs:
        z_node = gs.node_of(z)
        for y in ys:
            yield [x, z, z_node, y, gs.density(z, y)]


def cmd_mc_validate(run: Run):
    x, b = run.get("x"), run.get("b")
    paths = run.get("paths", 100_000, int)
    seed = run.get("seed", 42, int)
    workers = run.get("workers", 1, int)
    rep = exit_laplace(run.model, run.omega, x, b, 0.0, run.mesh)
    if isinstance(run.model, BrownianDrift):
        dt = run.get("dt", DEFAULT_DT)
        runs = [(f"euler_brownian_dt={dt:g}", dt), (f"euler_brownian_dt={dt / 4:g}", dt / 4)]
    else:
        runs = [("exact_cl", DEFAULT_DT)]
    for name, dt in runs:
        up, down = estimate_exit_laplace(run.model, run.omega, x, b, paths, seed, dt=dt, workers=workers)
        z_up = (up.mean - rep.up) / up.stderr if up.stderr > 0 else 0.0
        z_down = (down.mean - rep.down) / down.stderr if down.stderr > 0 else 0.0
        yield [name, paths, up.mean, up.stderr, down.mean, down.stderr, rep.up, rep.down, z_up, z_down]


COMMANDS = {
    "scale": cmd_scale,
    "omega-scale": cmd_omega_scale,
    "exit": cmd_exit,
    "gerber-shiu": cmd_gerber_shiu,
    "mc-validate": cmd_mc_validate,
    "table": cmd_table,
}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="drawdown-occupation",
                                description="Exit transforms of drawdown-weighted occupation times.")
    p.add_argument("command", choices=sorted(COMMANDS))
    p.add_argument("--config", required=True, help="JSON file with model, omega, numerics, task")
    for flag in ("x", "b", "c", "q", "dt", "delta", "y-max"):
        p.add_argument(f"--{flag}", type=float)
    p.add_argument("--mesh", type=float)
    for flag in ("paths", "seed", "points", "stride", "workers", "z-points", "y-points"):
        p.add_argument(f"--{flag}", type=int)
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def _load_config(path: str) -> dict:
    try:
        with open(path, encoding="utf-8") as fh:
            cfg = json.load(fh)
    except OSError as exc:
        raise ConfigurationError(f"cannot read config: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigurationError(f"config is not valid JSON: {exc}") from exc
    if not isinstance(cfg, dict):
        raise ConfigurationError("config must be a JSON object")
    return cfg


def main(argv: list[str] | None = None, out=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s: %(message)s", stream=sys.stderr)
    out = out or sys.stdout
    overrides = {k: v for k, v in vars(args).items() if k not in ("command", "config", "verbose")}
    try:
        run = Run(_load_config(args.config), overrides)
        rows = list(COMMANDS[args.command](run))
    except ConfigurationError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except DomainError as exc:
        print(f"invalid input: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    except (NumericalError, FloatingPointError, OverflowError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(COLUMNS[args.command])
    for row in rows:
        writer.writerow([_fmt(v) for v in row])
    return 0


def entry() -> None:
    sys.exit(main())
