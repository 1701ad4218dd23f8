"""Functions of the form ``c0 + c1 t + sum_k a_k exp(mu_k t + o_k)``.

Every equilibrium coefficient, trading rate and impact path in this package
has this shape, so derivatives, integrals, products and discounted
convolutions can all be taken exactly.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .constants import int_exp, stable_expm1_div


@dataclass(frozen=True)
class ExpSum:
    const: float = 0.0
    slope: float = 0.0
    coef: tuple[float, ...] = ()
    rate: tuple[float, ...] = ()
    offset: tuple[float, ...] = field(default=())

    def __post_init__(self):
        if not self.offset and self.coef:
            object.__setattr__(self, "offset", (0.0,) * len(self.coef))
        if not (len(self.coef) == len(self.rate) == len(self.offset)):
            raise ValueError("coef, rate and offset must have equal length")

    def _terms(self):
        return (np.asarray(self.coef, float), np.asarray(self.rate, float),
                np.asarray(self.offset, float))

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        out = self.const + self.slope * t
        if self.coef:
            a, mu, o = self._terms()
            out = out + np.exp(np.multiply.outer(t, mu) + o) @ a
        return out[()] if np.ndim(out) == 0 else out

    def derivative(self) -> "ExpSum":
        a, mu, o = self._terms()
        return ExpSum(self.slope, 0.0, tuple(a * mu), self.rate, self.offset)

    def scale(self, k: float) -> "ExpSum":
        return ExpSum(k * self.const, k * self.slope, tuple(k * np.asarray(self.coef)),
                      self.rate, self.offset)

    def __add__(self, other: "ExpSum") -> "ExpSum":
        return ExpSum(self.const + other.const, self.slope + other.slope,
                      self.coef + other.coef, self.rate + other.rate, self.offset + other.offset)

    def __mul__(self, other: "ExpSum") -> "ExpSum":
        if self.slope or other.slope:
            raise ValueError("products are only supported for slope-free sums")
        const = self.const * other.const
        coef, rate, offset = [], [], []
        for (a, mu, o) in zip(self.coef, self.rate, self.offset):
            coef.append(a * other.const); rate.append(mu); offset.append(o)
        for (a, mu, o) in zip(other.coef, other.rate, other.offset):
            coef.append(a * self.const); rate.append(mu); offset.append(o)
        for (a1, mu1, o1) in zip(self.coef, self.rate, self.offset):
            for (a2, mu2, o2) in zip(other.coef, other.rate, other.offset):
                coef.append(a1 * a2); rate.append(mu1 + mu2); offset.append(o1 + o2)
        return ExpSum(const, 0.0, tuple(coef), tuple(rate), tuple(offset))

    def integral(self, a: float, b: float) -> float:
        """Exact ``int_a^b`` of the function."""
        out = self.const * (b - a) + 0.5 * self.slope * (b * b - a * a)
        for (c, mu, o) in zip(self.coef, self.rate, self.offset):
            out += c * float(int_exp(mu, o, a, b))
        return float(out)

    def discounted_future(self, beta: float, T: float, t):
        """``int_t^T exp(-beta (s - t)) F(s) ds`` for a slope-free ``F``."""
        if self.slope:
            raise ValueError("discounted_future needs a slope-free sum")
        t = np.asarray(t, dtype=float)
        out = self.const * stable_expm1_div(-beta, T - t)
        for (c, mu, o) in zip(self.coef, self.rate, self.offset):
            out = out + c * int_exp(mu - beta, o + beta * t, t, T)
        return out[()] if np.ndim(out) == 0 else out

    def discounted_past(self, beta: float, t):
        """``int_0^t exp(-beta (t - s)) F(s) ds`` for a slope-free ``F``."""
        if self.slope:
            raise ValueError("discounted_past needs a slope-free sum")
        t = np.asarray(t, dtype=float)
        out = self.const * stable_expm1_div(-beta, t)
        for (c, mu, o) in zip(self.coef, self.rate, self.offset):
            out = out + c * int_exp(mu + beta, o - beta * t, 0.0, t)
        return out[()] if np.ndim(out) == 0 else out
