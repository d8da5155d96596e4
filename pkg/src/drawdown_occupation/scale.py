"""Closed-form q-scale functions W^(q), W^(q)', Z^(q) for the two model families.

Both families share the representation

    W^(q)(x) = [N(rho1) e^{rho1 x} - N(rho2) e^{rho2 x}] / (A (rho1 - rho2)),   x >= 0,

with ``A = D, N(s) = 1`` (Brownian) and ``A = mu, N(s) = s + beta``
(Cramér-Lundberg with exponential claims).  Evaluation switches to a divided
difference form built on ``exprel`` when ``(rho1 - rho2) x`` is small, which
also covers the confluent case ``rho1 == rho2`` exactly.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import exprel

from .errors import DomainError
from .models import BrownianDrift, CramerLundbergExp, LevyModel, quadratic_roots

# switch point between the direct difference of exponentials and the
# exprel-based divided difference
_DIRECT_THRESHOLD = 1.0


@dataclass(frozen=True)
class ScaleEval:
    model: LevyModel
    q: float
    rho1: float
    rho2: float
    norm: float       # A
    n_slope: float    # N'(s): 0 for Brownian, 1 for CL
    n_offset: float   # N(0): 1 for Brownian, beta for CL
    w_at_zero: float

    def _N(self, s):
        return self.n_offset + self.n_slope * s

    @property
    def coefficients(self) -> tuple[float, float]:
        """(c1, c2) with W = c1 e^{rho1 x} + c2 e^{rho2 x}; undefined when confluent."""
        d = self.rho1 - self.rho2
        if d == 0:
            raise DomainError("confluent roots have no two-exponential representation")
        return self._N(self.rho1) / (self.norm * d), -self._N(self.rho2) / (self.norm * d)

    def _combo(self, x, n_lo, dd):
        """[n_hi e^{rho1 x} - n_lo e^{rho2 x}] / (A delta) where dd = (n_hi - n_lo)/delta."""
        r1, r2, A = self.rho1, self.rho2, self.norm
        delta = r1 - r2
        dx = delta * x
        with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
            series = (n_lo * x * np.exp(r2 * x) * exprel(np.minimum(dx, _DIRECT_THRESHOLD))
                      + dd * np.exp(r1 * x)) / A
            if delta > 0:
                n_hi = n_lo + dd * delta
                direct = (n_hi * np.exp(r1 * x) - n_lo * np.exp(r2 * x)) / (A * delta)
                return np.where(dx > _DIRECT_THRESHOLD, direct, series)
        return series

    def W(self, x):
        """W^(q)(x); zero for x < 0, right-continuous at 0."""
        x = np.asarray(x, dtype=float)
        xp = np.maximum(x, 0.0)
        val = self._combo(xp, self._N(self.rho2), self.n_slope)
        out = np.where(x < 0, 0.0, val)
        return out if out.ndim else float(out)

    def w_prime_right(self, x):
        """Right derivative of W^(q) at x >= 0 (the value at 0 is the one-sided limit)."""
        x = np.asarray(x, dtype=float)
        xp = np.maximum(x, 0.0)
        r2 = self.rho2
        # derivative numerator s N(s): divided difference is n_offset + n_slope (rho1 + rho2)
        dd = self.n_offset + self.n_slope * (self.rho1 + r2)
        val = self._combo(xp, r2 * self._N(r2), dd)
        out = np.where(x < 0, 0.0, val)
        return out if out.ndim else float(out)

    @property
    def w_prime_at_zero(self) -> float:
        return float(self.w_prime_right(0.0))

    def W_prime(self, x):
        """W^(q)'(x) for x > 0."""
        if np.any(np.asarray(x) <= 0):
            raise DomainError("W' is evaluated for x > 0 only; use w_prime_at_zero for the right limit")
        return self.w_prime_right(x)

    def Z(self, x):
        """Z^(q)(x) = 1 + q int_0^x W^(q); equal to 1 for x <= 0."""
        x = np.asarray(x, dtype=float)
        if self.q == 0:
            out = np.ones_like(x)
        else:
            xp = np.maximum(x, 0.0)
            c1, c2 = self.coefficients   # q > 0 forces distinct roots
            integral = c1 * xp * exprel(self.rho1 * xp) + c2 * xp * exprel(self.rho2 * xp)
            out = 1.0 + self.q * integral
        return out if out.ndim else float(out)


def make_scale_eval(model: LevyModel, q: float) -> ScaleEval:
    rho1, rho2 = quadratic_roots(model, q)
    if isinstance(model, BrownianDrift):
        return ScaleEval(model, float(q), rho1, rho2, model.D, 0.0, 1.0, 0.0)
    if isinstance(model, CramerLundbergExp):
        return ScaleEval(model, float(q), rho1, rho2, model.mu, 1.0, model.beta, 1.0 / model.mu)
    raise TypeError(f"unsupported model {model!r}")


def eval_W(se: ScaleEval, x):
    return se.W(x)


def eval_W_prime(se: ScaleEval, x):
    return se.W_prime(x)


def eval_Z(se: ScaleEval, x):
    return se.Z(x)
