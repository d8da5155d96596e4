"""Spectrally negative Lévy surplus models with rational Laplace exponents.

Two families are supported:

* ``BrownianDrift``: ``X_t = x + mu t + sigma B_t``
* ``CramerLundbergExp``: premium rate ``mu``, Poisson(``lam``) claims with
  Exp(``beta``) sizes.

For both, ``psi(s) - q`` has (after clearing the denominator) exactly two
real roots ``rho1 > rho2``, which makes every scale function a short sum of
exponentials.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union

import numpy as np

from .errors import ConfigurationError, DomainError


@dataclass(frozen=True)
class BrownianDrift:
    mu: float
    sigma: float

    def __post_init__(self):
        if not (math.isfinite(self.mu) and math.isfinite(self.sigma)):
            raise DomainError("BrownianDrift parameters must be finite")
        if self.sigma <= 0:
            raise DomainError(f"sigma must be > 0, got {self.sigma}")

    @property
    def D(self) -> float:
        """Diffusion coefficient sigma^2/2."""
        return 0.5 * self.sigma**2


@dataclass(frozen=True)
class CramerLundbergExp:
    mu: float
    lam: float
    beta: float

    def __post_init__(self):
        for name in ("mu", "lam", "beta"):
            v = getattr(self, name)
            if not math.isfinite(v) or v <= 0:
                raise DomainError(f"{name} must be finite and > 0, got {v}")


LevyModel = Union[BrownianDrift, CramerLundbergExp]


def _check_model(model) -> None:
    if not isinstance(model, (BrownianDrift, CramerLundbergExp)):
        raise TypeError(f"unsupported model {model!r}")


def laplace_exponent(model: LevyModel, s):
    """psi(s) = log E exp(s X_1) for s >= 0 (vectorised)."""
    _check_model(model)
    s_arr = np.asarray(s, dtype=float)
    if np.any(s_arr < 0):
        raise DomainError("Laplace exponent is only defined for s >= 0")
    if isinstance(model, BrownianDrift):
        out = model.mu * s_arr + model.D * s_arr**2
    else:
        out = model.mu * s_arr - model.lam * s_arr / (s_arr + model.beta)
    return out if out.ndim else float(out)


def quadratic_coefficients(model: LevyModel, q: float) -> tuple[float, float, float]:
    """Coefficients (a, b, c) of the quadratic whose roots are rho1, rho2.

    Brownian: D s^2 + mu s - q.  Cramér-Lundberg: mu s^2 + (mu beta - lam - q) s - q beta
    (numerator of psi(s) - q after multiplying by s + beta).
    """
    if isinstance(model, BrownianDrift):
        return model.D, model.mu, -q
    return model.mu, model.mu * model.beta - model.lam - q, -q * model.beta


def quadratic_roots(model: LevyModel, q: float) -> tuple[float, float]:
    """Real roots rho1 >= rho2 of the family quadratic, without cancellation."""
    _check_model(model)
    if not q >= 0 or not math.isfinite(q):
        raise DomainError(f"q must be finite and >= 0, got {q}")
    a, b, c = quadratic_coefficients(model, q)
    disc = b * b - 4.0 * a * c
    # disc >= 0 always here (c <= 0, a > 0); clip rounding noise
    sq = math.sqrt(max(disc, 0.0))
    t = -0.5 * (b + math.copysign(sq, b))
    if t == 0.0:
        return 0.0, 0.0
    r_a, r_b = t / a, c / t
    # + 0.0 folds a signed zero root into +0.0
    return (r_a + 0.0, r_b + 0.0) if r_a >= r_b else (r_b + 0.0, r_a + 0.0)


def phi(model: LevyModel, q: float) -> float:
    """Right inverse of psi: the largest root of psi(s) = q."""
    return quadratic_roots(model, q)[0]


def levy_measure_density(model: LevyModel, y):
    """Density of the Lévy measure of the (positive) claim sizes at y > 0."""
    _check_model(model)
    y_arr = np.asarray(y, dtype=float)
    if np.any(y_arr <= 0):
        raise DomainError("Lévy density is defined for y > 0 only")
    if isinstance(model, BrownianDrift):
        out = np.zeros_like(y_arr)
    else:
        out = model.lam * model.beta * np.exp(-model.beta * y_arr)
    return out if out.ndim else float(out)


_MODEL_KEYS = {
    "brownian": {"type", "mu", "sigma"},
    "cramer_lundberg_exp": {"type", "mu", "lambda", "beta"},
}


def model_from_dict(d: dict) -> LevyModel:
    """Build a model from its JSON descriptor; unknown keys are rejected."""
    if not isinstance(d, dict) or "type" not in d:
        raise ConfigurationError("model descriptor must be an object with a 'type' key")
    kind = d["type"]
    if kind not in _MODEL_KEYS:
        raise ConfigurationError(f"unknown model type {kind!r}")
    keys = set(d)
    if keys != _MODEL_KEYS[kind]:
        extra, missing = keys - _MODEL_KEYS[kind], _MODEL_KEYS[kind] - keys
        raise ConfigurationError(f"model descriptor keys: unexpected {sorted(extra)}, missing {sorted(missing)}")
    try:
        if kind == "brownian":
            return BrownianDrift(float(d["mu"]), float(d["sigma"]))
        return CramerLundbergExp(float(d["mu"]), float(d["lambda"]), float(d["beta"]))
    except (TypeError, ValueError) as exc:
        if isinstance(exc, DomainError):
            raise
        raise DomainError(f"bad model parameter: {exc}") from exc


def model_to_dict(model: LevyModel) -> dict:
    if isinstance(model, BrownianDrift):
        return {"type": "brownian", "mu": model.mu, "sigma": model.sigma}
    return {"type": "cramer_lundberg_exp", "mu": model.mu, "lambda": model.lam, "beta": model.beta}
