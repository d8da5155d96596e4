"""Right-continuous step weights on [0, inf).

Every weight is stored internally as ascending breakpoints ``b_1 < ... < b_m``
(all > 0) and values ``v_0, ..., v_m`` with ``v_k`` in force on ``[b_k, b_{k+1})``
(``b_0 = 0``, ``b_{m+1} = inf``).  The public variants only differ in how they
are parametrised.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import ConfigurationError, DomainError


class WeightFunction:
    """Common behaviour of step weights; subclasses provide ``steps``."""

    def steps(self) -> tuple[tuple[float, ...], tuple[float, ...]]:
        raise NotImplementedError

    @property
    def breakpoints(self) -> np.ndarray:
        return np.asarray(self.steps()[0], dtype=float)

    @property
    def values(self) -> np.ndarray:
        return np.asarray(self.steps()[1], dtype=float)

    @property
    def max_level(self) -> float:
        return float(self.values.max())

    def __call__(self, z):
        """omega(z) (right-continuous); z < 0 gets the value on [0, b_1)."""
        bps, vals = self.breakpoints, self.values
        idx = np.searchsorted(bps, np.asarray(z, dtype=float), side="right")
        out = vals[idx]
        return out if np.ndim(out) else float(out)

    def left_limit(self, z):
        """omega(z-); equals omega(z) away from breakpoints."""
        bps, vals = self.breakpoints, self.values
        idx = np.searchsorted(bps, np.asarray(z, dtype=float), side="left")
        out = vals[idx]
        return out if np.ndim(out) else float(out)

    def cumulative(self, y):
        """int_0^y omega(v) dv for y >= 0 (vectorised, exact)."""
        bps, vals = self.breakpoints, self.values
        y = np.asarray(y, dtype=float)
        edges = np.concatenate(([0.0], bps))
        # integral up to each breakpoint
        acc = np.concatenate(([0.0], np.cumsum(vals[:-1] * np.diff(edges)))) if bps.size else np.zeros(1)
        idx = np.searchsorted(bps, y, side="right")
        out = acc[idx] + vals[idx] * (y - edges[idx])
        return out if out.ndim else float(out)

    def shifted(self, delta: float) -> "GeneralStep":
        """omega + delta as a step weight."""
        if delta < 0:
            raise DomainError("shift must be >= 0")
        return GeneralStep.from_ascending(self.breakpoints, self.values + delta)

    def reflected(self, u: float) -> "GeneralStep":
        """Step weight equal to z -> omega(u - z) on [0, inf) away from breakpoints.

        Values at the breakpoints themselves differ (the reflection is
        left-continuous) but no integral functional sees that difference.
        Levels of omega on negative arguments are taken as the level on [0, b_1).
        """
        bps, vals = self.breakpoints, self.values
        new_bps = u - bps[::-1]
        new_vals = vals[::-1]
        keep = new_bps > 0
        # level on [0, first kept breakpoint) is the one just left of it
        first = int(np.argmax(keep)) if keep.any() else len(new_bps)
        vals_out = np.concatenate((new_vals[first:first + 1], new_vals[first + 1:]))
        return GeneralStep.from_ascending(new_bps[keep], vals_out)

    def as_general(self) -> "GeneralStep":
        return GeneralStep.from_ascending(self.breakpoints, self.values)

    def descending_form(self) -> tuple[list[float], list[float]]:
        """(a_1 > ... > a_n, p_0, ..., p_n) with p_0 on [a_1, inf) and p_n below a_n."""
        bps, vals = self.steps()
        return list(bps[::-1]), list(vals[::-1])

    def is_zero(self) -> bool:
        return bool(np.all(self.values == 0))

    def _canonical(self):
        # adjacent equal levels merged, so equal functions compare equal
        return GeneralStep.from_ascending(*self.steps()).steps()

    def __eq__(self, other):
        if not isinstance(other, WeightFunction):
            return NotImplemented
        return self._canonical() == other._canonical()

    def __hash__(self):
        return hash(self._canonical())


def _check_level(v: float, name: str) -> float:
    v = float(v)
    if not math.isfinite(v) or v < 0:
        raise DomainError(f"{name} must be finite and >= 0, got {v}")
    return v


@dataclass(frozen=True, eq=False)
class Constant(WeightFunction):
    q: float

    def __post_init__(self):
        _check_level(self.q, "q")

    def steps(self):
        return (), (float(self.q),)


@dataclass(frozen=True, eq=False)
class OneStep(WeightFunction):
    """q on [0, a), p on [a, inf)."""

    q: float
    p: float
    a: float

    def __post_init__(self):
        _check_level(self.q, "q")
        _check_level(self.p, "p")
        if not (math.isfinite(self.a) and self.a > 0):
            raise DomainError(f"a must be > 0, got {self.a}")

    def steps(self):
        return (float(self.a),), (float(self.q), float(self.p))


@dataclass(frozen=True, eq=False)
class GeneralStep(WeightFunction):
    """Breakpoints a_1 > a_2 > ... > a_n > 0 and levels p_0 (on [a_1, inf)),
    p_k (on [a_{k+1}, a_k)), p_n (on [0, a_n))."""

    breakpoints_desc: tuple
    levels: tuple

    def __post_init__(self):
        a = tuple(float(v) for v in self.breakpoints_desc)
        p = tuple(_check_level(v, "level") for v in self.levels)
        if len(p) != len(a) + 1:
            raise DomainError("need exactly one more level than breakpoints")
        if any(not math.isfinite(v) or v <= 0 for v in a):
            raise DomainError("breakpoints must be finite and > 0")
        if any(a[k + 1] >= a[k] for k in range(len(a) - 1)):
            raise DomainError("breakpoints must be strictly decreasing")
        object.__setattr__(self, "breakpoints_desc", a)
        object.__setattr__(self, "levels", p)

    @classmethod
    def from_ascending(cls, bps: Sequence[float], vals: Sequence[float]) -> "GeneralStep":
        bps = [float(b) for b in bps]
        vals = [float(v) for v in vals]
        # merge equal adjacent levels so the representation is canonical
        kb, kv = [], [vals[0]]
        for b, v in zip(bps, vals[1:]):
            if v != kv[-1]:
                kb.append(b)
                kv.append(v)
        return cls(tuple(kb[::-1]), tuple(kv[::-1]))

    def steps(self):
        return tuple(self.breakpoints_desc[::-1]), tuple(self.levels[::-1])


def weight_from_dict(d: dict) -> WeightFunction:
    """Parse an omega descriptor: constant / one_step / step."""
    if not isinstance(d, dict) or "type" not in d:
        raise ConfigurationError("omega descriptor must be an object with a 'type' key")
    allowed = {
        "constant": {"type", "q"},
        "one_step": {"type", "q", "p", "a"},
        "step": {"type", "breakpoints", "levels"},
    }
    kind = d["type"]
    if kind not in allowed:
        raise ConfigurationError(f"unknown omega type {kind!r}")
    if set(d) != allowed[kind]:
        raise ConfigurationError(f"omega descriptor of type {kind!r} needs keys {sorted(allowed[kind])}")
    try:
        if kind == "constant":
            return Constant(float(d["q"]))
        if kind == "one_step":
            return OneStep(float(d["q"]), float(d["p"]), float(d["a"]))
        return GeneralStep(tuple(d["breakpoints"]), tuple(d["levels"]))
    except TypeError as exc:
        raise DomainError(f"bad omega parameter: {exc}") from exc


def weight_to_dict(w: WeightFunction) -> dict:
    if isinstance(w, Constant):
        return {"type": "constant", "q": w.q}
    if isinstance(w, OneStep):
        return {"type": "one_step", "q": w.q, "p": w.p, "a": w.a}
    a, p = w.descending_form()
    return {"type": "step", "breakpoints": a, "levels": p}
