"""Exit functionals driven by the weighted drawdown occupation time.

For a grid holding ``W^(omega)`` the central object is

    H(u) = exp(-int_1^u W_2(z, 0) / W^(omega)(z, 0) dz),

whose ratios give ``E_x[exp(-L(tau_b^+)); tau_b^+ < tau_0^-] = H(x)/H(b)``.
Near ``z = 0`` the integrand behaves like ``-W'(z)/W(z)``, which is not
integrable when ``W(0) = 0``.  We therefore integrate the regular remainder

    g(z) = W_2(z, 0)/W^(omega)(z, 0) + W'(z)/W(z)

numerically and add ``log W(u) - log W(1)`` exactly.  Everything is kept in
log space so that H may span many orders of magnitude.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import DomainError, NumericalError
from .models import BrownianDrift, CramerLundbergExp, LevyModel
from .omega import DEFAULT_MESH, OmegaScaleGrid, solve_omega_scale
from .scale import make_scale_eval
from .weights import WeightFunction

_NODE_TOL = 1e-8


@dataclass(frozen=True)
class ExitLaplaceReport:
    x: float
    b: float
    c: float
    up: float
    down: float
    h: float
    dual_residual: float


def _node(grid: OmegaScaleGrid, v: float) -> int:
    return grid.node_index(v)


@dataclass(frozen=True, eq=False)
class HFunction:
    """log H at every node of ``grid`` with H(base) = 1."""

    grid: OmegaScaleGrid
    base: float
    log_h: np.ndarray

    @property
    def x(self) -> np.ndarray:
        return self.grid.x

    @property
    def values(self) -> np.ndarray:
        return np.exp(self.log_h)

    def log_value(self, u: float) -> float:
        """log H(u); linear interpolation of H between nodes."""
        k = int(round(u / self.grid.h))
        if 0 <= k <= self.grid.n and abs(k * self.grid.h - u) <= _NODE_TOL * max(1.0, u):
            return float(self.log_h[k])
        if not 0 <= u <= self.grid.x_max:
            raise DomainError(f"u={u} outside [0, {self.grid.x_max}]")
        with np.errstate(divide="ignore"):
            return float(np.log(np.interp(u, self.x, self.values)))

    def __call__(self, u: float) -> float:
        return math.exp(self.log_value(u))

    def ratio(self, x: float, b: float) -> float:
        """H(x)/H(b), computed in log space."""
        lx, lb = self.log_value(x), self.log_value(b)
        if lx == -math.inf:
            return 0.0
        return math.exp(lx - lb)


def _regular_integrand(grid: OmegaScaleGrid) -> np.ndarray:
    Wc = grid.W[:, 0]
    if np.any(Wc[1:] <= 0):
        raise NumericalError("W^(omega)(z, 0) <= 0 at a node; the solve is corrupted")
    g = np.empty(grid.n + 1)
    g[1:] = grid.w2_col0[1:] / Wc[1:] + grid.Kp[1:] / grid.K[1:]
    if grid.W0 > 0:
        g[0] = grid.w2_col0[0] / Wc[0] + grid.Kp[0] / grid.K[0]
    else:
        # g is regular (O(z)) at 0; extrapolate
        g[0] = 2 * g[1] - g[2]
    return g


def h_function(grid: OmegaScaleGrid, base: float = 1.0) -> HFunction:
    """H^(omega) on the grid, normalised to 1 at ``base`` (which must be a node)."""
    kb = _node(grid, base)
    if kb == 0:
        raise DomainError("base point must be > 0")
    g = _regular_integrand(grid)
    G = np.concatenate(([0.0], np.cumsum(0.5 * grid.h * (g[:-1] + g[1:]))))
    with np.errstate(divide="ignore"):
        logK = np.log(grid.K)
    log_h = logK - logK[kb] - (G - G[kb])
    return HFunction(grid, float(grid.x[kb]), log_h)


def _check_xb(grid: OmegaScaleGrid, x: float, b: float) -> None:
    if not 0 <= x <= b:
        raise DomainError(f"need 0 <= x <= b, got x={x}, b={b}")
    if b > grid.x_max * (1 + 1e-12):
        raise DomainError(f"b={b} beyond grid range {grid.x_max}")
    if b <= 0:
        raise DomainError("b must be positive")


def up_exit_laplace(hf: HFunction, x: float, b: float) -> float:
    """E_x[exp(-L(tau_b^+)); tau_b^+ < tau_0^-] = H(x)/H(b)."""
    _check_xb(hf.grid, x, b)
    if x == b:
        return 1.0
    return hf.ratio(x, b)


def _ratio_row(hf: HFunction, i: int, kb: int) -> np.ndarray:
    """H(x_i)/H(x_k) for k = i..kb."""
    return np.exp(hf.log_h[i] - hf.log_h[i:kb + 1])


def down_exit_laplace(grid: OmegaScaleGrid, hf: HFunction, x: float, b: float) -> float:
    """E_x[exp(-L(tau_0^-)); tau_0^- < tau_b^+].

    Zhat(x) - (H(x)/H(b)) Zhat(b) + int_x^b (H(x)/H(z)) (Zhat_1(z) + Zhat_2(z)) dz,
    where the integrand jumps with omega; each trapezoid panel uses the
    one-sided weight values at its ends.
    """
    _check_xb(grid, x, b)
    if x == b:
        return 0.0
    i, kb = _node(grid, x), _node(grid, b)
    if i == 0 and grid.W0 == 0:
        # H(0+) = 0 and the integral term vanishes like x log(1/x)
        return 1.0
    r = _ratio_row(hf, i, kb)
    Wc = grid.W[i:kb + 1, 0]
    Z2 = grid.zhat2_col0[i:kb + 1]
    f_plus = r * (grid.om_plus[i:kb + 1] * Wc + Z2)
    f_minus = r * (grid.om_minus[i:kb + 1] * Wc + Z2)
    integral = 0.5 * grid.h * float(np.sum(f_plus[:-1] + f_minus[1:]))
    return float(grid.zhat_col0[i] - r[-1] * grid.zhat_col0[kb] + integral)


def shifted_exit_laplace(grid: OmegaScaleGrid, hf: HFunction, x: float, b: float,
                         c: float) -> tuple[float, float]:
    """Two-sided exit from [c, b]; the drawdown does not see the translation."""
    if not c <= x <= b:
        raise DomainError(f"need c <= x <= b, got c={c}, x={x}, b={b}")
    return up_exit_laplace(hf, x - c, b - c), down_exit_laplace(grid, hf, x - c, b - c)


def exit_grid(model: LevyModel, omega: WeightFunction, x: float, b: float, c: float = 0.0,
              h: float = DEFAULT_MESH) -> tuple[OmegaScaleGrid, HFunction]:
    """Grid and H for the interval [c, b] with x - c, b - c and the base point on nodes."""
    if not c <= x <= b or b <= c:
        raise DomainError(f"need c <= x <= b and c < b, got c={c}, x={x}, b={b}")
    span = max(b - c, 1.0)
    grid = solve_omega_scale(model, omega, span, h, align=(x - c, b - c, 1.0))
    return grid, h_function(grid)


def exit_laplace(model: LevyModel, omega: WeightFunction, x: float, b: float, c: float = 0.0,
                 h: float = DEFAULT_MESH) -> ExitLaplaceReport:
    grid, hf = exit_grid(model, omega, x, b, c, h)
    up, down = shifted_exit_laplace(grid, hf, x, b, c)
    return ExitLaplaceReport(x, b, c, up, down, grid.h, grid.check_residual())


# -- potential density ------------------------------------------------------
def _col0(grid: OmegaScaleGrid, arr: np.ndarray, v: float) -> float:
    k = int(round(v / grid.h))
    if 0 <= k <= grid.n and abs(k * grid.h - v) <= _NODE_TOL * max(1.0, v):
        return float(arr[k])
    return float(np.interp(v, grid.x, arr))


def occupation_potential_density(grid: OmegaScaleGrid, hf: HFunction, x: float, z: float,
                                  y: float, b: float) -> float:
    """Joint density at (S, Y) = (z, y) of the e^{-L}-discounted occupation measure before exit from [0, b].

    (H(x)/H(z)) * ((W_2(z)/W^(omega)(z)) W^(omega)(y) - W_2(y)), sections at second argument 0.
    The density does not depend on ``b`` beyond requiring z < b.
    """
    if not (0 <= x < z < b and 0 < y < z):
        raise DomainError("need 0 <= x < z < b and 0 < y < z")
    _check_xb(grid, x, b)
    Wc = grid.W[:, 0]
    rz = _col0(grid, grid.w2_col0, z) / _col0(grid, Wc, z)
    val = hf.ratio(x, z) * (rz * _col0(grid, Wc, y) - _col0(grid, grid.w2_col0, y))
    if val < -1e-10:
        raise NumericalError(f"negative potential density {val}")
    return max(val, 0.0)


def atom_at_zero(grid: OmegaScaleGrid, hf: HFunction, x: float, z: float) -> float:
    """Density in z of the same measure on {Y = 0}: (H(x)/H(z)) W(0)."""
    if not 0 <= x < z:
        raise DomainError("need 0 <= x < z")
    return hf.ratio(x, z) * grid.W0


def classical_sy_resolvent(model: LevyModel, x: float, z: float, y: float) -> float:
    """Zero-weight version from the scale function alone.

    Density (W(x)/W(z)) (W'(y) - W'(z) W(y)/W(z)) for y > 0 and the atom
    (W(x)/W(z)) W(0) for y = 0.
    """
    if not (z > x >= 0 and y >= 0):
        raise DomainError("need z > x >= 0 and y >= 0")
    if y >= z:
        raise DomainError("need y < z")
    se = make_scale_eval(model, 0.0)
    pre = float(se.W(x)) / float(se.W(z))
    if y == 0:
        return pre * se.w_at_zero
    return pre * (float(se.W_prime(y)) - float(se.W_prime(z)) * float(se.W(y)) / float(se.W(z)))


def closure_identity(grid: OmegaScaleGrid, hf: HFunction, x: float, b: float) -> tuple[float, float]:
    """(lhs, rhs) of the occupation identity on [x, b].

    lhs = int_x^b [int_0^z omega(y) density(z, y) dy + omega(0) atom(z)] dz by a
    two-dimensional trapezoid over the nodes; rhs = 1 - up - down.
    """
    _check_xb(grid, x, b)
    i, kb = _node(grid, x), _node(grid, b)
    h = grid.h
    Wc, W2c = grid.W[:, 0], grid.w2_col0
    zs = np.arange(i, kb + 1)
    with np.errstate(divide="ignore", invalid="ignore"):
        rz = np.where(Wc[zs] > 0, W2c[zs] / Wc[zs], 0.0)
    # D[m, k] = density at (z_m, y_k) without the H factor
    D = rz[:, None] * Wc[None, :kb + 1] - W2c[None, :kb + 1]
    inner = np.empty(len(zs))
    for m, k in enumerate(zs):
        if k == 0:
            inner[m] = 0.0
            continue
        row = D[m, :k + 1]
        inner[m] = 0.5 * h * float(np.sum(grid.om_plus[:k] * row[:k] + grid.om_minus[1:k + 1] * row[1:k + 1]))
    if i == 0 and grid.W0 == 0:
        ratio = np.zeros(len(zs))
    else:
        ratio = _ratio_row(hf, i, kb)
    outer = ratio * (inner + grid.om_plus[0] * grid.W0)
    lhs = 0.5 * h * float(np.sum(outer[:-1] + outer[1:]))
    up = up_exit_laplace(hf, x, b)
    down = down_exit_laplace(grid, hf, x, b)
    return lhs, 1.0 - up - down


# -- Gerber-Shiu -------------------------------------------------------------
class GerberShiu:
    """Discounted joint density of (X before ruin, deficit at ruin) for exponential jumps.

    With omega_d = omega + delta, for 0 < z < b and y > 0 the density at
    (X(tau_0^- -) in dz, -X(tau_0^-) in dy) is ``kernel(x, z) * Pi(y + z)`` where

        kernel(x, z) = (H(x)/H(b)) W(b - z) - W(x - z)
                       - int_x^b (H(x)/H(u)) (W_1 + W_2)(u - z) du

    and every W here is the (., 0) section of the omega_d-scale function.
    """

    def __init__(self, model: LevyModel, omega: WeightFunction, x: float, b: float, delta: float = 0.0,
                 h: float = DEFAULT_MESH):
        if delta < 0:
            raise DomainError("delta must be >= 0")
        if not 0 <= x <= b or b <= 0:
            raise DomainError("need 0 <= x <= b, b > 0")
        self.model, self.omega, self.x, self.b, self.delta = model, omega, x, b, delta
        self.grid, self.hf = exit_grid(model, omega.shifted(delta), x, b, 0.0, h)
        self.jumps = isinstance(model, CramerLundbergExp)

    @cached_property
    def _kernel(self) -> tuple[np.ndarray, np.ndarray]:
        """(right, left) limits in z of the kernel at every node z_j, j = 0..kb."""
        g = self.grid
        i, kb = _node(g, self.x), _node(g, self.b)
        Wc = g.W[:, 0]
        w1r, w1l = g.w1_col0
        Fr = w1r + g.w2_col0
        Fl = w1l + g.w2_col0
        logh = self.hf.log_h
        right = np.empty(kb + 1)
        left = np.empty(kb + 1)
        r_xb = self.hf.ratio(self.x, self.b)
        for j in range(kb + 1):
            lo = max(i, j)
            ks = np.arange(lo, kb + 1)
            if len(ks) > 1:
                r = np.exp(logh[i] - logh[ks]) if np.isfinite(logh[i]) else np.zeros(len(ks))
                seg = r[:-1] * Fr[ks[:-1] - j] + r[1:] * Fl[ks[1:] - j]
                integral = 0.5 * g.h * float(np.sum(seg))
            else:
                integral = 0.0
            base = r_xb * Wc[kb - j] - integral
            right[j] = base - (Wc[i - j] if j < i else 0.0)
            left[j] = base - (Wc[i - j] if j <= i else 0.0)
        return right, left

    def _snap(self, z: float) -> int:
        return min(max(int(round(z / self.grid.h)), 0), _node(self.grid, self.b))

    def node_of(self, z: float) -> float:
        """The grid node used for z."""
        return float(self.grid.x[self._snap(z)])

    def kernel(self, z: float) -> tuple[float, float]:
        """Kernel at the node nearest z and the snap distance."""
        j = self._snap(z)
        right, _ = self._kernel
        return float(right[j]), abs(float(self.grid.x[j]) - z)

    def density(self, z: float, y: float) -> float:
        if not (0 < z < self.b and y > 0):
            raise DomainError("need 0 < z < b and y > 0")
        if not self.jumps:
            warnings.warn("Brownian model has no jumps; Gerber-Shiu density is 0", stacklevel=2)
            return 0.0
        k, _ = self.kernel(z)
        m = self.model
        return max(k, 0.0) * m.lam * m.beta * math.exp(-m.beta * (y + z))

    def marginal(self) -> float:
        """int_0^b int_0^inf density dy dz, with the y-integral done exactly."""
        if not self.jumps:
            return 0.0
        g = self.grid
        kb = _node(g, self.b)
        m = self.model
        right, left = self._kernel
        e = m.lam * np.exp(-m.beta * g.x[:kb + 1])
        return 0.5 * g.h * float(np.sum(right[:-1] * e[:-1] + left[1:] * e[1:]))


def gerber_shiu_density(model: LevyModel, omega: WeightFunction, x: float, z: float, y: float,
                        b: float, delta: float = 0.0, h: float = DEFAULT_MESH) -> float:
    if isinstance(model, BrownianDrift):
        warnings.warn("Brownian model has no jumps; Gerber-Shiu density is 0", stacklevel=2)
        return 0.0
    if not (0 <= x <= b and 0 < z < b and y > 0):
        raise DomainError("need 0 <= x <= b, 0 < z < b, y > 0")
    return GerberShiu(model, omega, x, b, delta, h).density(z, y)
