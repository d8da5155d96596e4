"""Numerical omega-scale functions on a uniform triangular mesh.

``W^(omega)(x, y)`` is the solution of the second-kind Volterra equation

    W^(omega)(x, y) = W(x - y) + int_y^x W(x - z) omega(z) W^(omega)(z, y) dz

for the zero-killing scale function ``W``.  On a uniform mesh ``x_i = i h`` the
product trapezoidal rule for every column ``y_j`` couples the unknowns through
one lower-triangular matrix, so the whole triangle ``0 <= y <= x <= x_max`` is
obtained with a single triangular solve.  The diagonal term
``(h/2) W(0) omega(x_i-)`` is treated implicitly.

Breakpoints of omega are placed on mesh nodes.  Each sub-interval
``[z_k, z_{k+1}]`` of a trapezoid sum sees ``omega(z_k)`` at its left end and
``omega(z_{k+1}-)`` at its right end, which keeps the rule second order across
jumps.

Array layout: ``A[i, j]`` holds the value at ``(x_i, y_j)``; entries with
``i < j`` are zero (one for ``Zhat``).
"""
from __future__ import annotations

import logging
import math
from fractions import Fraction
from functools import cached_property, reduce
from typing import Iterable

import numpy as np
from scipy.linalg import solve_triangular, toeplitz

from .errors import ConfigurationError, DomainError, NumericalError
from .models import LevyModel
from .scale import ScaleEval, make_scale_eval
from .weights import WeightFunction

log = logging.getLogger(__name__)

DEFAULT_MESH = 1e-3
RESIDUAL_ALARM = 1e-4
MAX_NODES = 6001
# alignment may shrink the requested mesh by at most this factor
_MAX_SHRINK = 10.0
_SNAP_TOL = 1e-9


def _as_fraction(v: float) -> Fraction:
    f = Fraction(v).limit_denominator(10**7)
    if abs(float(f) - v) > 1e-12 * max(1.0, abs(v)):
        raise ConfigurationError(f"point {v!r} is not commensurable with a uniform mesh")
    return f


def _fraction_gcd(a: Fraction, b: Fraction) -> Fraction:
    den = a.denominator * b.denominator // math.gcd(a.denominator, b.denominator)
    return Fraction(math.gcd(int(a * den), int(b * den)), den)


def aligned_mesh(h: float, x_max: float, points: Iterable[float] = ()) -> tuple[float, int]:
    """Largest mesh <= h that puts every point in (0, x_max] on a node.

    Returns ``(mesh, n_intervals)``; the grid then spans ``[0, n_intervals * mesh]``
    which is ``>= x_max``.
    """
    if not (h > 0 and x_max > 0):
        raise ConfigurationError("mesh and x_max must be positive")
    if h > x_max / 10 * (1 + 1e-12):
        raise ConfigurationError(f"mesh {h} too coarse for x_max {x_max} (need h <= x_max/10)")
    pts = [float(p) for p in points if 0 < p <= x_max * (1 + 1e-12)]
    mesh = h
    if pts:
        g = reduce(_fraction_gcd, (_as_fraction(p) for p in pts))
        m = math.ceil(float(g) / h - 1e-9)
        mesh = float(g) / m
        if mesh < h / _MAX_SHRINK:
            raise ConfigurationError(
                f"mesh {h} too coarse for breakpoint spacing (alignment would need h={mesh:.3g})")
    n = math.ceil(x_max / mesh - 1e-9)
    if n + 1 > MAX_NODES:
        raise ConfigurationError(f"{n + 1} nodes exceed the limit of {MAX_NODES}")
    return mesh, n


class OmegaScaleGrid:
    """Solved omega-scale functions on the triangle 0 <= y <= x <= x_max."""

    def __init__(self, model: LevyModel, omega: WeightFunction, h: float, n: int):
        self.model = model
        self.omega = omega
        self.h = h
        self.n = n
        self.x = np.arange(n + 1) * h
        self.x_max = float(self.x[-1])
        self.scale: ScaleEval = make_scale_eval(model, 0.0)
        self.K = self.scale.W(self.x)                  # W(k h)
        self.Kp = self.scale.w_prime_right(self.x)     # W'(k h), right limit at 0
        self.W0 = self.scale.w_at_zero
        # snap node values so that breakpoints sitting on nodes are classified exactly
        snapped = self._snap_breakpoints()
        self.om_plus = omega(snapped)
        self.om_minus = omega.left_limit(snapped)
        self.om_bar = 0.5 * (self.om_plus + self.om_minus)
        self.W = self._solve()

    def _snap_breakpoints(self) -> np.ndarray:
        z = self.x.copy()
        for b in self.omega.breakpoints:
            k = int(round(b / self.h))
            if k <= self.n and abs(k * self.h - b) <= _SNAP_TOL * max(1.0, b):
                z[k] = b
        return z

    # -- core solve -------------------------------------------------------
    def _solve(self) -> np.ndarray:
        n1 = self.n + 1
        h, K, K0 = self.h, self.K, self.W0
        diag = 1.0 - 0.5 * h * self.om_minus * K0
        if np.any(diag <= 0):
            raise NumericalError("implicit diagonal is not positive; refine the mesh")
        M = -h * toeplitz(K, np.zeros(n1)) * self.om_bar[None, :]
        np.fill_diagonal(M, diag)
        F = toeplitz(K, np.zeros(n1))
        # left end of every column uses omega(y_j) / 2 instead of omega_bar(y_j)
        F -= np.tril(0.5 * h * K0 * F * self.om_minus[None, :], k=-1)
        np.fill_diagonal(F, diag * K0)
        with np.errstate(over="raise", invalid="raise"):
            try:
                W = solve_triangular(M, F, lower=True, check_finite=False)
            except FloatingPointError as exc:
                raise NumericalError(f"overflow in Volterra solve: {exc}") from exc
        if not np.all(np.isfinite(W)):
            raise NumericalError("non-finite value in Volterra solve (omega * x_max too large?)")
        W = np.tril(W)
        np.fill_diagonal(W, K0)
        return W

    # -- node helpers -----------------------------------------------------
    def node_index(self, v: float) -> int:
        k = int(round(v / self.h))
        if k < 0 or k > self.n or abs(k * self.h - v) > 1e-8 * max(1.0, abs(v)):
            raise DomainError(f"{v} is not a node of the grid (h={self.h}, x_max={self.x_max})")
        return k

    def trapezoid_weights(self, j: int, i: int) -> np.ndarray:
        """Weights for int_{y_j}^{x_i} omega(z) f(z) dz from f at nodes j..i."""
        w = self.h * self.om_bar[j:i + 1].copy()
        if i > j:
            w[0] = 0.5 * self.h * self.om_plus[j]
            w[-1] = 0.5 * self.h * self.om_minus[i]
        else:
            w[:] = 0.0
        return w

    # -- column y = 0 (everything the exit functionals need) --------------
    @cached_property
    def w2_col0(self) -> np.ndarray:
        """W_2(x_i, 0) from the Stieltjes identity, all i."""
        return self._w2_column_zero(self.Kp, atom=True)

    def _w2_column_zero(self, T: np.ndarray, atom: bool) -> np.ndarray:
        h, W = self.h, self.W
        Wb = W * self.om_bar[None, :]
        P = Wb @ T                       # sum_k W[i,k] omega_bar_k T[k]
        idx = np.arange(self.n + 1)
        P -= 0.5 * self.om_minus[0] * W[:, 0] * T[0]
        P -= 0.5 * self.om_plus * W[idx, idx] * T
        integral = h * P
        integral[0] = 0.0
        if atom:
            return -T - W[:, 0] * self.om_plus[0] * self.W0 - integral
        return integral

    @cached_property
    def zhat_col0(self) -> np.ndarray:
        return self._cumulative_omega(self.W[:, 0])

    @cached_property
    def zhat2_col0(self) -> np.ndarray:
        return self._cumulative_omega(self.w2_col0) - 1.0 - self.om_plus[0] * self.W0

    def _cumulative_omega(self, f: np.ndarray) -> np.ndarray:
        """1 + int_0^{x_i} omega f, trapezoid with one-sided omega at each end."""
        seg = 0.5 * self.h * (self.om_plus[:-1] * f[:-1] + self.om_minus[1:] * f[1:])
        return 1.0 + np.concatenate(([0.0], np.cumsum(seg)))

    @cached_property
    def w1_col0(self) -> tuple[np.ndarray, np.ndarray]:
        """(right, left) x-derivatives W_1(x_i, 0) including the atom term."""
        h, W, Kp = self.h, self.W, self.Kp
        g = self.om_bar * W[:, 0]
        conv = np.convolve(Kp, g)[:self.n + 1]
        conv -= 0.5 * self.om_minus[0] * Kp * W[0, 0]
        conv -= 0.5 * self.om_plus * Kp[0] * W[:, 0]
        integral = h * conv
        integral[0] = 0.0
        base = Kp + integral
        return base + self.W0 * self.om_plus * W[:, 0], base + self.W0 * self.om_minus * W[:, 0]

    @cached_property
    def residual_col0(self) -> np.ndarray:
        """Dual-equation residual along y = 0."""
        integral = self._w2_column_zero(self.K, atom=False)
        return np.abs(self.W[:, 0] - self.K - integral)

    # -- full triangle (lazy) --------------------------------------------
    def _lower_toeplitz(self, v: np.ndarray) -> np.ndarray:
        return toeplitz(v, np.zeros(self.n + 1))

    def _dual_integral(self, T: np.ndarray) -> np.ndarray:
        """I[i,j] = int_{y_j}^{x_i} W^(omega)(x_i, z) omega(z) T(z - y_j) dz for all i >= j."""
        h, W = self.h, self.W
        P = (W * self.om_bar[None, :]) @ self._lower_toeplitz(T)
        P -= 0.5 * W * self.om_minus[None, :] * T[0]
        P -= 0.5 * (np.diag(W) * self.om_plus)[:, None] * self._lower_toeplitz(T)
        I = np.tril(h * P, k=-1)
        return I

    @cached_property
    def W2(self) -> np.ndarray:
        W = self.W
        W2 = -self._lower_toeplitz(self.Kp) - W * self.om_plus[None, :] * self.W0 - self._dual_integral(self.Kp)
        W2 = np.tril(W2)
        np.fill_diagonal(W2, -self.Kp[0] - self.W0**2 * self.om_plus)
        return W2

    @cached_property
    def residual(self) -> np.ndarray:
        R = np.abs(self.W - self._lower_toeplitz(self.K) - self._dual_integral(self.K))
        return np.tril(R)

    @property
    def max_residual(self) -> float:
        return float(self.residual.max())

    @cached_property
    def Zhat(self) -> np.ndarray:
        seg = 0.5 * self.h * (self.om_plus[:-1, None] * self.W[:-1] + self.om_minus[1:, None] * self.W[1:])
        seg = np.tril(seg)
        return 1.0 + np.vstack((np.zeros((1, self.n + 1)), np.cumsum(seg, axis=0)))

    @property
    def Zhat1(self) -> np.ndarray:
        return self.om_plus[:, None] * self.W

    @cached_property
    def Zhat2(self) -> np.ndarray:
        W2 = self.W2
        seg = 0.5 * self.h * (self.om_plus[:-1, None] * W2[:-1] + self.om_minus[1:, None] * W2[1:])
        seg = np.tril(seg)
        Z2 = np.vstack((np.zeros((1, self.n + 1)), np.cumsum(seg, axis=0))) - self.om_plus[None, :] * self.W0
        return np.tril(Z2)

    def check_residual(self, threshold: float = RESIDUAL_ALARM) -> float:
        r = float(self.residual_col0.max())
        if r > threshold:
            log.warning("dual-equation residual %.3g exceeds %.3g", r, threshold)
        return r


def solve_omega_scale(model: LevyModel, omega: WeightFunction, x_max: float,
                      h: float = DEFAULT_MESH, align: Iterable[float] = ()) -> OmegaScaleGrid:
    """Solve for W^(omega) on the triangle with mesh <= h.

    Every breakpoint of omega and every extra point in ``align`` lying in
    (0, x_max] becomes a mesh node.
    """
    points = list(omega.breakpoints) + [float(a) for a in align]
    mesh, n = aligned_mesh(h, x_max, points)
    return OmegaScaleGrid(model, omega, mesh, n)


# -- pointwise accessors ------------------------------------------------------
def w_omega(grid: OmegaScaleGrid, x: float, y: float) -> float:
    if x < y:
        return 0.0
    return float(grid.W[grid.node_index(x), grid.node_index(y)])


def partial_w2(grid: OmegaScaleGrid, x: float, y: float) -> float:
    """Right y-derivative W_2^(omega)(x, y) for nodes x > y."""
    if not x > y:
        raise DomainError("partial_w2 needs x > y")
    i, j = grid.node_index(x), grid.node_index(y)
    if j == 0:
        return float(grid.w2_col0[i])
    wts = grid.trapezoid_weights(j, i)
    integral = float(np.dot(wts, grid.W[i, j:i + 1] * grid.Kp[:i - j + 1]))
    return float(-grid.Kp[i - j] - grid.W[i, j] * grid.om_plus[j] * grid.W0 - integral)


def partial_w1(grid: OmegaScaleGrid, x: float, y: float) -> float:
    """Right x-derivative W_1^(omega)(x, y) for nodes x > y."""
    if not x > y:
        raise DomainError("partial_w1 needs x > y")
    i, j = grid.node_index(x), grid.node_index(y)
    wts = grid.trapezoid_weights(j, i)
    integral = float(np.dot(wts, grid.Kp[i - j::-1] * grid.W[j:i + 1, j]))
    return float(grid.Kp[i - j] + integral + grid.W0 * grid.om_plus[i] * grid.W[i, j])


def z_hat(grid: OmegaScaleGrid, x: float, y: float) -> float:
    if x <= y:
        return 1.0
    i, j = grid.node_index(x), grid.node_index(y)
    if j == 0:
        return float(grid.zhat_col0[i])
    wts = grid.trapezoid_weights(j, i)
    return float(1.0 + np.dot(wts, grid.W[j:i + 1, j]))


def z_hat_1(grid: OmegaScaleGrid, x: float, y: float) -> float:
    if x < y:
        return 0.0
    i, j = grid.node_index(x), grid.node_index(y)
    return float(grid.om_plus[i] * grid.W[i, j])


def z_hat_2(grid: OmegaScaleGrid, x: float, y: float) -> float:
    i, j = grid.node_index(x), grid.node_index(y)
    if i < j:
        return 0.0
    if j == 0:
        return float(grid.zhat2_col0[i])
    return float(grid.Zhat2[i, j])


def reflected_weight_check(model: LevyModel, omega: WeightFunction, u: float, x: float, y: float,
                           h: float = DEFAULT_MESH) -> float:
    """|W^(omega_u)(u - y, u - x) - W^(omega)(x, y)| with omega_u(z) = omega(u - z).

    Both sides come from independent Volterra solves.
    """
    if not (u >= x >= y >= 0):
        raise DomainError("need u >= x >= y >= 0")
    span = max(x, u - y, 10 * h)
    g = solve_omega_scale(model, omega, span, h, align=(x, y, u, u - x, u - y))
    om_u = omega.reflected(u)
    g_u = solve_omega_scale(model, om_u, span, g.h, align=(x, y, u, u - x, u - y))
    if g_u.h != g.h:
        raise ConfigurationError("reflected grid could not reuse the mesh")
    return abs(w_omega(g_u, u - y, u - x) - w_omega(g, x, y))
