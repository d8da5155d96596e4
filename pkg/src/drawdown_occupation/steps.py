"""Step-weight representations of the omega-scale functions in terms of q-scale functions.

These evaluate ``W^(omega)`` and ``Zhat^(omega)`` without any Volterra solve:

* ``step_scale_recursion`` layers one level at a time,
  ``W_{n+1}(x,y) = W_n(x,y) + (p_{n+1}-p_n) int_y^{a_{n+1}} W_n(x,z) W^{(p_{n+1})}(z-y) dz``
  (same for ``Zhat``), with the upper limit capped at ``x``.
* ``two_step_family`` evaluates the auxiliary functions of the weight
  ``p + (q-p) 1(a2 <= z < a1)``.
* ``one_step_closed_form`` integrates the exponential products exactly for
  ``q 1(z < a) + p 1(z >= a)``.

Integrals over smooth pieces use fixed Gauss-Legendre rules, vectorised over
all evaluation points; every integrand is analytic on its interval.
"""
from __future__ import annotations

import math
from typing import NamedTuple

import numpy as np
from scipy.special import exprel

from .errors import DomainError
from .models import LevyModel
from .scale import ScaleEval, make_scale_eval
from .weights import WeightFunction

_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(24)


def _gl(f, lo, hi, nodes=_GL_NODES, weights=_GL_WEIGHTS):
    """int_lo^hi f(z) dz for arrays lo, hi (empty when hi <= lo); f takes z of shape lo.shape + (G,)."""
    lo = np.asarray(lo, dtype=float)
    length = np.clip(np.asarray(hi, dtype=float) - lo, 0.0, None)
    z = lo[..., None] + 0.5 * length[..., None] * (nodes + 1.0)
    return 0.5 * length * (f(z) @ weights)


class _ScaleCache(dict):
    def __init__(self, model):
        super().__init__()
        self.model = model

    def __missing__(self, q):
        se = make_scale_eval(self.model, q)
        self[q] = se
        return se


def step_scale_recursion(model: LevyModel, omega: WeightFunction, x, y):
    """(W^(omega)(x, y), Zhat^(omega)(x, y)) for a step weight, by layered recursion.

    ``x`` and ``y`` broadcast against each other.  Cost grows like 24**n for n
    breakpoints, so keep n small (n <= 3 is cheap).
    """
    a, p = omega.descending_form()
    scales = _ScaleCache(model)
    x, y = np.broadcast_arrays(np.asarray(x, dtype=float), np.asarray(y, dtype=float))

    def layer_w(n, xx, yy):
        if n == 0:
            return scales[p[0]].W(xx - yy)
        base = layer_w(n - 1, xx, yy)
        dp = p[n] - p[n - 1]
        if dp == 0:
            return base
        w_next = scales[p[n]]
        # W_{n-1}(x, z) vanishes for z > x and the kernel for z < y
        upper = np.minimum(xx, a[n - 1])

        def integrand(z):
            return layer_w(n - 1, np.broadcast_to(xx[..., None], z.shape), z) * w_next.W(z - yy[..., None])
        return base + dp * _gl(integrand, yy, upper)

    def layer_z(n, xx, yy):
        if n == 0:
            return scales[p[0]].Z(xx - yy)
        base = layer_z(n - 1, xx, yy)
        dp = p[n] - p[n - 1]
        if dp == 0:
            return base
        w_next = scales[p[n]]
        # capping at x is required: Zhat_n(x, z) = 1 (not 0) for z > x
        upper = np.minimum(xx, a[n - 1])

        def integrand(z):
            return layer_z(n - 1, np.broadcast_to(xx[..., None], z.shape), z) * w_next.W(z - yy[..., None])
        return base + dp * _gl(integrand, yy, upper)

    top = len(a)
    W = np.asarray(layer_w(top, x, y), dtype=float)
    Z = np.asarray(layer_z(top, x, y), dtype=float)
    if W.ndim == 0:
        return float(W), float(Z)
    return W, Z


class TwoStepValues(NamedTuple):
    w_pq: float      # W^{(p,q)}_{(a2)}(x)
    w_pqp: float     # W^{(p,q,p)}_{(a2,a1)}(x) = W^(omega)(x, 0)
    zhat_qp: float   # Zhat^{(q,p)}_{(a1)}(x, y)
    zhat_pqp: float  # Zhat^{(p,q,p)}_{(a2,a1)}(x, y) = Zhat^(omega)(x, y)


def _w_pq(sq: ScaleEval, sp: ScaleEval, a2, x):
    """W^{(p,q)}_{(a2)}(x) = W^(q)(x) - (q-p) int_0^{a2} W^(q)(x-z) W^(p)(z) dz (a2 <= 0 allowed)."""
    x = np.asarray(x, dtype=float)
    a2 = np.broadcast_to(np.asarray(a2, dtype=float), x.shape)
    upper = np.minimum(np.maximum(a2, 0.0), np.maximum(x, 0.0))
    corr = _gl(lambda z: sq.W(x[..., None] - z) * sp.W(z), np.zeros_like(x), upper)
    return sq.W(x) - (sq.q - sp.q) * corr


def _zhat_qp(sq: ScaleEval, sp: ScaleEval, a1, x, y):
    """Zhat^{(q,p)}_{(a1)}(x, y) = Z^(p)(x-y) + (q-p) int_y^{min(a1,x)} Z^(p)(x-z) W^(q)(z-y) dz."""
    x, y = np.broadcast_arrays(np.asarray(x, dtype=float), np.asarray(y, dtype=float))
    upper = np.minimum(a1, x)
    corr = _gl(lambda z: sp.Z(x[..., None] - z) * sq.W(z - y[..., None]), y, upper)
    return sp.Z(x - y) + (sq.q - sp.q) * corr


def two_step_family(model: LevyModel, p: float, q: float, a2: float, a1: float, x: float,
                    y: float = 0.0) -> TwoStepValues:
    """Auxiliary functions of the weight p + (q - p) 1(a2 <= z < a1).

    Negative subscripts are allowed (they arise from moving windows); they
    mean the corresponding step starts before 0.
    """
    if not a2 < a1:
        raise DomainError("need a2 < a1")
    if p < 0 or q < 0:
        raise DomainError("levels must be >= 0")
    sp, sq = make_scale_eval(model, p), make_scale_eval(model, q)
    if a2 == 0 and a1 > 0 and y == 0 and sp.rho1 != sp.rho2 and sq.rho1 != sq.rho2:
        w_pqp, z_hat = one_step_closed_form(model, q, p, a1, x)
        return TwoStepValues(float(sq.W(x)), w_pqp, z_hat, z_hat)
    w_pq = float(_w_pq(sq, sp, a2, x))
    lo = max(a1, 0.0)
    if x > lo:
        tail = _gl(lambda z: sp.W(x - z) * _w_pq(sq, sp, a2, z), np.array(lo), np.array(x))
        w_pqp = w_pq + (p - q) * float(tail)
    else:
        w_pqp = w_pq
    zqp = float(_zhat_qp(sq, sp, a1, x, y))
    upper = min(a2, x)
    if upper > y:
        tail = _gl(lambda z: _zhat_qp(sq, sp, a1, np.full(z.shape, x), z) * sp.W(z - y),
                   np.array(y, dtype=float), np.array(upper))
        zpqp = zqp + (p - q) * float(tail)
    else:
        zpqp = zqp
    return TwoStepValues(w_pq, w_pqp, zqp, zpqp)


def _exp_terms_W(se: ScaleEval):
    c1, c2 = se.coefficients
    return [(c1, se.rho1), (c2, se.rho2)], 0.0


def _exp_terms_Z(se: ScaleEval):
    """Z^(p)(u) = const + sum e_i exp(eta_i u) for u >= 0."""
    if se.q == 0:
        return [], 1.0
    (c1, r1), (c2, r2) = _exp_terms_W(se)[0]
    e1, e2 = se.q * c1 / r1, se.q * c2 / r2
    return [(e1, r1), (e2, r2)], 1.0 - e1 - e2


def _conv_from(a, t, eta, rho):
    """int_a^t exp(eta (t - s)) exp(rho s) ds for t >= a."""
    d = t - a
    return np.exp(eta * d + rho * a) * d * exprel((rho - eta) * d)


def _convolve_tail(left, right_terms, a, t):
    """int_a^t L(t - s) R(s) ds with L, R exponential sums (L may carry a constant)."""
    terms, const = left
    total = 0.0
    for d_k, rho in right_terms:
        for c_i, eta in terms:
            total = total + c_i * d_k * _conv_from(a, t, eta, rho)
        if const:
            total = total + const * d_k * _conv_from(a, t, 0.0, rho)
    return total


def one_step_closed_form(model: LevyModel, q: float, p: float, a: float, t):
    """Exact (W^{(q,p)}_{(a)}(t), Zhat^{(q,p)}_{(a)}(t)) for omega = q 1(z < a) + p 1(z >= a).

    Both equal W^(q)(t) / Z^(q)(t) plus (p - q) int_a^t K(t - s) W^(q)(s) ds with
    K = W^(p) resp. Z^(p); the exponential products are integrated exactly.
    Requires distinct roots for both levels.
    """
    sq, sp = make_scale_eval(model, q), make_scale_eval(model, p)
    t_arr = np.asarray(t, dtype=float)
    ta = np.maximum(t_arr, a)
    wq_terms, _ = _exp_terms_W(sq)
    w = sq.W(t_arr) + (p - q) * np.where(t_arr > a, _convolve_tail(_exp_terms_W(sp), wq_terms, a, ta), 0.0)
    z = sq.Z(t_arr) + (p - q) * np.where(t_arr > a, _convolve_tail(_exp_terms_Z(sp), wq_terms, a, ta), 0.0)
    if w.ndim == 0:
        return float(w), float(z)
    return w, z


def _split_points(lo: float, hi: float, cuts) -> list[float]:
    pts = [lo] + sorted(c for c in cuts if lo < c < hi) + [hi]
    return pts


def alternative_up_exit(model: LevyModel, p: float, q: float, a2: float, a1: float, x: float, b: float,
                        eps: float = 1e-4, order: int = 20) -> float:
    """Up-exit transform for omega = p + (q - p) 1(a2 <= z < a1) from moving-window functions.

    exp(-int_x^b d_s F(s, t)|_{s=t} / F(t, t) dt) with
    F(s, t) = W^{(p,q,p)}_{(t-a1, t-a2)}(s).  The s-derivative is taken with the
    window frozen at t, as a second-order one-sided difference from the left
    (F(., t) has a kink at s = t when a2 = 0).  The t-integrand has kinks where
    the moving subscripts cross 0, so Gauss-Legendre panels are split at
    t = a2 and t = a1.
    """
    if not 0 <= x <= b:
        raise DomainError("need 0 <= x <= b")
    if x == b:
        return 1.0
    nodes, weights = np.polynomial.legendre.leggauss(order)

    def F(s, t):
        return two_step_family(model, p, q, t - a1, t - a2, s).w_pqp

    def integrand(t):
        d = (3 * F(t, t) - 4 * F(t - eps, t) + F(t - 2 * eps, t)) / (2 * eps)
        return d / F(t, t)

    total = 0.0
    pts = _split_points(max(x, 2 * eps), b, (a2, a1))
    for lo, hi in zip(pts[:-1], pts[1:]):
        ts = lo + 0.5 * (hi - lo) * (nodes + 1)
        total += 0.5 * (hi - lo) * sum(w * integrand(t) for w, t in zip(weights, ts))
    return math.exp(-total)
