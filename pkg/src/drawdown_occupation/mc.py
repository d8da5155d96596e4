"""Monte Carlo estimates of the exit transforms by direct path simulation.

Two engines:

* ``simulate_cl_exact``: event-driven and exact for the Cramer-Lundberg
  model.  Between jumps the surplus climbs linearly, so the drawdown is
  piecewise linear and its weighted occupation time integrates in closed form.
* ``simulate_brownian_euler``: Euler-Maruyama for Brownian motion with drift;
  barrier crossings are detected at step endpoints, which biases exits by
  O(sqrt(dt)).

Every path draws from its own counter-based stream, ``Philox`` keyed by
``(seed, path_index)``, so a path's outcome does not depend on how paths
are grouped into blocks or threads.  Per-path contributions are stored in
index order and reduced once, so the estimates are bit-identical for any
number of workers.
"""
from __future__ import annotations

import bisect
import enum
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .errors import DomainError
from .models import BrownianDrift, CramerLundbergExp, LevyModel
from .weights import WeightFunction

MAX_EVENTS = 10_000_000
BLOCK_SIZE = 4096
DEFAULT_DT = 1e-4
_CL_CHUNK = 16
_EULER_CHUNK = 512


class ExitKind(enum.Enum):
    UP = "up"
    DOWN = "down"
    CENSORED = "censored"


class Engine(enum.Enum):
    EXACT_CL = "exact_cl"
    EULER_BROWNIAN = "euler_brownian"


@dataclass(frozen=True)
class PathOutcome:
    exit_kind: ExitKind
    L_at_exit: float
    exit_time: float
    S_at_exit: float


@dataclass(frozen=True)
class McEstimate:
    n_paths: int
    mean: float
    stderr: float
    up_fraction: float
    down_fraction: float
    seed: int
    engine: Engine

    @property
    def censored_fraction(self) -> float:
        return 1.0 - self.up_fraction - self.down_fraction


def path_generator(seed: int, index: int) -> np.random.Generator:
    """The random stream of path ``index`` under root ``seed``."""
    if not 0 <= seed < 2**64 or not 0 <= index < 2**64:
        raise DomainError("seed and path index must fit in an unsigned 64-bit integer")
    return np.random.Generator(np.random.Philox(key=np.array([seed, index], dtype=np.uint64)))


class _StepIntegral:
    """Fast scalar omega(y) and int_0^y omega for a step weight."""

    def __init__(self, omega: WeightFunction):
        bps, vals = omega.steps()
        self.bps = list(bps)
        self.vals = list(vals)
        cum = [0.0]
        prev = 0.0
        for k, bp in enumerate(self.bps):
            cum.append(cum[-1] + self.vals[k] * (bp - prev))
            prev = bp
        self.cum = cum
        self.w0 = self.vals[0]

    def __call__(self, y: float) -> float:
        return self.vals[bisect.bisect_right(self.bps, y)]

    def cumulative(self, y: float) -> float:
        k = bisect.bisect_right(self.bps, y)
        start = self.bps[k - 1] if k else 0.0
        return self.cum[k] + self.vals[k] * (y - start)


def _check_xb(x: float, b: float) -> None:
    if not 0 <= x <= b or b <= 0:
        raise DomainError(f"need 0 <= x <= b and b > 0, got x={x}, b={b}")


def _cl_path(model: CramerLundbergExp, om: _StepIntegral, x: float, b: float,
             rng: np.random.Generator, max_events: int) -> PathOutcome:
    if x >= b:
        return PathOutcome(ExitKind.UP, 0.0, 0.0, b)
    mu, lam, beta = model.mu, model.lam, model.beta
    X, S, Y, L, T = x, x, 0.0, 0.0, 0.0
    buf = rng.standard_exponential(2 * _CL_CHUNK)
    pos = 0
    for _ in range(max_events):
        if pos == len(buf):
            buf = rng.standard_exponential(2 * _CL_CHUNK)
            pos = 0
        s = buf[pos] / lam
        jump = buf[pos + 1] / beta
        pos += 2
        t_up = (b - X) / mu
        climb = min(s, t_up)
        # Y falls linearly to 0 at rate mu and then stays at 0
        s1 = min(climb, Y / mu)
        L += (om.cumulative(Y) - om.cumulative(Y - mu * s1)) / mu + om.w0 * (climb - s1)
        if t_up <= s:
            return PathOutcome(ExitKind.UP, L, T + t_up, b)
        T += s
        X += mu * s
        S = max(S, X)
        X -= jump
        Y = S - X
        if X < 0:
            return PathOutcome(ExitKind.DOWN, L, T, S)
    return PathOutcome(ExitKind.CENSORED, L, T, S)


def simulate_cl_exact(model: CramerLundbergExp, omega: WeightFunction, x: float, b: float, seed: int,
                      path_index: int = 0, max_events: int = MAX_EVENTS) -> PathOutcome:
    """One exact path of the Cramer-Lundberg surplus, started at x with S_0 = x, Y_0 = 0."""
    if not isinstance(model, CramerLundbergExp):
        raise DomainError("exact engine needs a CramerLundbergExp model")
    _check_xb(x, b)
    return _cl_path(model, _StepIntegral(omega), x, b, path_generator(seed, path_index), max_events)


def _euler_block(model: BrownianDrift, omega: WeightFunction, x: float, b: float, dt: float, seed: int,
                 indices: range, max_steps: int) -> list[PathOutcome]:
    n = len(indices)
    if x >= b:
        return [PathOutcome(ExitKind.UP, 0.0, 0.0, b)] * n
    if x <= 0:
        return [PathOutcome(ExitKind.DOWN, 0.0, 0.0, x)] * n
    rngs = [path_generator(seed, i) for i in indices]
    drift, vol = model.mu * dt, model.sigma * math.sqrt(dt)
    X = np.full(n, float(x))
    S = X.copy()
    L = np.zeros(n)
    kind = np.full(n, -1)          # -1 running, 0 up, 1 down, 2 censored
    steps = np.zeros(n, dtype=np.int64)
    active = np.arange(n)
    while active.size:
        noise = np.stack([rngs[k].standard_normal(_EULER_CHUNK) for k in active])
        Xa, Sa, La = X[active], S[active], L[active]
        done_at = np.full(active.size, -1)
        alive = np.ones(active.size, dtype=bool)
        for c in range(_EULER_CHUNK):
            idx = np.nonzero(alive)[0]
            if idx.size == 0:
                break
            La[idx] += omega(Sa[idx] - Xa[idx]) * dt
            Xa[idx] += drift + vol * noise[idx, c]
            Sa[idx] = np.maximum(Sa[idx], Xa[idx])
            up = idx[Xa[idx] >= b]
            down = idx[Xa[idx] < 0]
            kind[active[up]] = 0
            kind[active[down]] = 1
            done_at[up] = c + 1
            done_at[down] = c + 1
            alive[up] = False
            alive[down] = False
        X[active], S[active], L[active] = Xa, Sa, La
        steps[active] += np.where(done_at > 0, done_at, _EULER_CHUNK)
        over = (kind[active] == -1) & (steps[active] >= max_steps)
        kind[active[over]] = 2
        active = active[kind[active] == -1]
    out = []
    for k in range(n):
        ek = (ExitKind.UP, ExitKind.DOWN, ExitKind.CENSORED)[kind[k]]
        s_exit = b if ek is ExitKind.UP else float(S[k])
        out.append(PathOutcome(ek, float(L[k]), float(steps[k] * dt), min(s_exit, b)))
    return out


def simulate_brownian_euler(model: BrownianDrift, omega: WeightFunction, x: float, b: float, dt: float,
                            seed: int, path_index: int = 0, max_steps: int = MAX_EVENTS) -> PathOutcome:
    """One Euler path of Brownian motion with drift; L uses the left-endpoint rule."""
    if not isinstance(model, BrownianDrift):
        raise DomainError("Euler engine needs a BrownianDrift model")
    if not dt > 0:
        raise DomainError("dt must be positive")
    _check_xb(x, b)
    return _euler_block(model, omega, x, b, dt, seed, range(path_index, path_index + 1), max_steps)[0]


def _simulate_block(model: LevyModel, omega: WeightFunction, x: float, b: float, seed: int, start: int,
                    stop: int, dt: float) -> list[PathOutcome]:
    if isinstance(model, CramerLundbergExp):
        om = _StepIntegral(omega)
        return [_cl_path(model, om, x, b, path_generator(seed, i), MAX_EVENTS) for i in range(start, stop)]
    return _euler_block(model, omega, x, b, dt, seed, range(start, stop), MAX_EVENTS)


def _summarise(values: np.ndarray, n_up: int, n_down: int, seed: int, engine: Engine) -> McEstimate:
    n = values.size
    return McEstimate(n, float(np.mean(values)), float(np.std(values, ddof=1) / math.sqrt(n)),
                      n_up / n, n_down / n, seed, engine)


def estimate_exit_laplace(model: LevyModel, omega: WeightFunction, x: float, b: float, n_paths: int,
                          seed: int, dt: float = DEFAULT_DT, workers: int = 1
                          ) -> tuple[McEstimate, McEstimate]:
    """MC estimates of E_x[e^{-L}; up exit] and E_x[e^{-L}; down exit].

    ``dt`` is used by the Euler engine only.  The result does not depend on
    ``workers``.
    """
    if n_paths < 100:
        raise DomainError("need at least 100 paths")
    if workers < 1:
        raise DomainError("workers must be >= 1")
    if isinstance(model, BrownianDrift) and not dt > 0:
        raise DomainError("dt must be positive")
    _check_xb(x, b)
    engine = Engine.EXACT_CL if isinstance(model, CramerLundbergExp) else Engine.EULER_BROWNIAN
    starts = list(range(0, n_paths, BLOCK_SIZE))
    jobs = [(s, min(s + BLOCK_SIZE, n_paths)) for s in starts]

    def run(job):
        return _simulate_block(model, omega, x, b, seed, job[0], job[1], dt)

    if workers == 1:
        blocks = [run(j) for j in jobs]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            blocks = list(pool.map(run, jobs))
    up = np.zeros(n_paths)
    down = np.zeros(n_paths)
    n_up = n_down = 0
    k = 0
    for block in blocks:
        for o in block:
            w = math.exp(-o.L_at_exit)
            if o.exit_kind is ExitKind.UP:
                up[k] = w
                n_up += 1
            elif o.exit_kind is ExitKind.DOWN:
                down[k] = w
                n_down += 1
            k += 1
    return (_summarise(up, n_up, n_down, seed, engine), _summarise(down, n_up, n_down, seed, engine))
