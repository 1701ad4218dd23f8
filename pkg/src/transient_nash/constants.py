"""Overflow-safe evaluation of the constants behind the closed-form equilibria.

Every exponential that involves ``z3 = beta + lam/eps`` is evaluated as
``exp(z3 (t - T))`` so that nothing of size ``exp(z3 T)`` is ever formed.
Quantities that are naturally ``exp(z3 T)``-sized (``b3``, ``b13``, ``b23``,
``b33`` and the raw ``q3``) are stored through scaled surrogates and exposed as
properties that raise :class:`ConstantOverflow` when not representable.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np

from .model import InvalidParameter, ModelParams, validate

# exp() overflows just above 709.78; keep a margin for the products formed later.
EXP_LIMIT = 700.0


class ConstantOverflow(ArithmeticError):
    def __init__(self, field: str):
        super().__init__(f"{field} is not representable in double precision")
        self.field = field


def stable_expm1_div(z, t):
    """Return ``(exp(z t) - 1) / z`` with the continuous extension ``t`` at ``z = 0``."""
    z = np.asarray(z, dtype=float)
    t = np.asarray(t, dtype=float)
    zt = z * t
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        out = np.where(z == 0.0, t, np.expm1(zt) / np.where(z == 0.0, 1.0, z))
    return out[()] if out.ndim == 0 else out


def int_exp(rate, offset, a, b):
    """Return ``int_a^b exp(rate s + offset) ds`` without intermediate overflow.

    The exponential is anchored at whichever endpoint carries the larger
    exponent, so the prefactor is the integrand's maximum and the remaining
    factor is a bounded ``expm1`` ratio.
    """
    rate = np.asarray(rate, dtype=float)
    offset = np.asarray(offset, dtype=float)
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    width = b - a
    with np.errstate(over="ignore", invalid="ignore"):
        up = np.exp(rate * b + offset) * stable_expm1_div(-rate, width)
        down = np.exp(rate * a + offset) * stable_expm1_div(rate, width)
        out = np.where(rate > 0, up, down)
    return out[()] if out.ndim == 0 else out


def _roots(lam: float, beta: float, n: int, eps: float) -> tuple[float, float]:
    """The two roots of the characteristic quadratic, each without cancellation.

    ``z1 = beta + u`` where ``u`` is the positive root of
    ``eps u^2 + (2 beta eps + lam (N-1)) u - 2 lam beta = 0`` and
    ``z2 = w - beta`` where ``w`` is the negative root of
    ``eps w^2 + (lam (N-1) - 2 beta eps) w - 2 N lam beta = 0``.
    """
    B = 2.0 * beta * eps + lam * (n - 1)
    u = 4.0 * lam * beta / (B + math.sqrt(B * B + 8.0 * eps * lam * beta))
    C = lam * (n - 1) - 2.0 * beta * eps
    disc = math.sqrt(C * C + 8.0 * n * eps * lam * beta)
    if C >= 0:
        w = (-C - disc) / (2.0 * eps)
    else:
        w = -4.0 * n * lam * beta / (-C + disc)
    return beta + u, w - beta


@dataclass(frozen=True)
class ConstantsTable:
    lam: float
    beta: float
    T: float
    N: int
    eps: float
    phi: float | None
    z1: float
    z2: float
    z3: float
    gamma1: float
    gamma2: float
    gamma_ratio: float
    b1: float
    b2: float
    b11: float
    b22: float
    b12: float
    q0: float
    q1: float
    q2: float
    q3s: float
    rho0: float
    rho_plus: float
    rho_minus: float
    varrho0: float
    varrho1: float
    m0: float
    m1: float
    r0: float
    r1: float
    p_frak: float
    Psi: float
    Xi: float
    psi: float | None
    xi: float | None
    h1: float
    h2: float
    h3: float
    h4: float
    h5: float

    def _unscale(self, name: str, value: float, log_factor: float) -> float:
        if log_factor > EXP_LIMIT:
            raise ConstantOverflow(name)
        return value * math.exp(log_factor)

    @property
    def b3(self) -> float:
        return self._unscale("b3", self.q0, self.z3 * self.T)

    @property
    def b13(self) -> float:
        return self._unscale("b13", self.q1, self.z3 * self.T)

    @property
    def b23(self) -> float:
        return self._unscale("b23", self.q2, self.z3 * self.T)

    @property
    def b33(self) -> float:
        return self._unscale("b33", self.q3s, 2.0 * self.z3 * self.T)

    @property
    def q3(self) -> float:
        return self._unscale("q3", self.q3s, self.z3 * self.T)

    def to_json_dict(self) -> dict:
        """Flat mapping keyed by ASCII symbol names (fraktur symbols get ``frak_``)."""
        out = {}
        for key, value in asdict(self).items():
            if key in ("lam", "beta", "T", "N", "eps", "phi"):
                continue
            out[_JSON_NAMES.get(key, key)] = value
        return out


_JSON_NAMES = {
    **{k: "frak_" + k for k in ("b1", "b2", "b11", "b22", "b12", "q0", "q1", "q2",
                                "m0", "m1", "r0", "r1", "h1", "h2", "h3", "h4", "h5")},
    "p_frak": "frak_p",
    "q3s": "frak_q3_scaled",
}


def eval_constants(params: ModelParams, eps: float, phi: float | None = None) -> ConstantsTable:
    validate(params)
    if not (eps > 0 and math.isfinite(eps)):
        raise InvalidParameter("eps", "must be finite and > 0")
    if phi is not None and not (phi > 0 and math.isfinite(phi)):
        raise InvalidParameter("phi", "must be finite and > 0")
    lam, beta, T, N = float(params.lam), float(params.beta), float(params.T), params.n_traders

    z1, z2 = _roots(lam, beta, N, eps)
    z3 = beta + lam / eps
    if 2.0 * z1 * T > EXP_LIMIT:
        raise ConstantOverflow("b11")
    e1, e2 = math.exp(z1 * T), math.exp(z2 * T)

    gamma1 = 1.0 / (z1 + beta) + e1 / (z1 - beta)
    gamma2 = 1.0 / (z2 + beta) + e2 / (z2 - beta)
    # z2 * gamma2 stays O(1) while gamma2 itself vanishes as eps -> 0.
    z2_gamma2 = z2 / (z2 + beta) + z2 * e2 / (z2 - beta)
    r = gamma1 * z2 / z2_gamma2

    b1 = float(stable_expm1_div(z1, T))
    b2 = float(stable_expm1_div(z2, T))
    b11 = float(stable_expm1_div(2 * z1, T))
    b22 = float(stable_expm1_div(2 * z2, T))
    b12 = float(stable_expm1_div(z1 + z2, T))
    # q-family: b_{i3} exp(-z3 T) = int_0^T exp(z_i t) exp(z3 (t - T)) dt
    q0 = float(stable_expm1_div(-z3, T))
    q1 = float(int_exp(z1 + z3, -z3 * T, 0.0, T))
    q2 = float(int_exp(z2 + z3, -z3 * T, 0.0, T))
    q3s = float(stable_expm1_div(-2.0 * z3, T))

    rho0 = e1 - r * e2
    rho_plus = e1 / (z1 + beta) - r * e2 / (z2 + beta)
    rho_minus = e1 / (z1 - beta) - r * e2 / (z2 - beta)
    varrho0 = b1 - r * b2
    varrho1 = b1 / (z1 + beta) - r * b2 / (z2 + beta)
    m0 = q1 - r * q2
    m1 = q1 / (z1 + beta) - r * q2 / (z2 + beta)
    r0 = b11 + r * r * b22 - 2.0 * r * b12
    r1 = b11 / (z1 + beta) + r * r * b22 / (z2 + beta) - r * (1.0 / (z1 + beta) + 1.0 / (z2 + beta)) * b12

    p_frak = rho0 + beta * rho_minus + lam * N / eps * (rho_plus + rho_minus)
    Psi = varrho0 + beta * rho_minus * T
    Xi = beta * T + lam / eps * q0
    psi = p_frak + phi * Psi / eps if phi is not None else None
    xi = z3 + phi * Xi / eps if phi is not None else None

    h1 = rho_minus * (Psi + beta * varrho1) + r1
    h2 = rho_minus * Xi + beta * varrho1 + lam / eps * m1
    h3 = beta * rho_minus * (Psi + varrho0) + r0
    h4 = beta * (2.0 * Xi - beta * T) + (lam / eps) ** 2 * q3s
    h5 = beta * rho_minus * Xi + beta * varrho0 + lam / eps * m0

    return ConstantsTable(
        lam=lam, beta=beta, T=T, N=N, eps=float(eps), phi=None if phi is None else float(phi),
        z1=z1, z2=z2, z3=z3, gamma1=gamma1, gamma2=gamma2, gamma_ratio=r,
        b1=b1, b2=b2, b11=b11, b22=b22, b12=b12, q0=q0, q1=q1, q2=q2, q3s=q3s,
        rho0=rho0, rho_plus=rho_plus, rho_minus=rho_minus, varrho0=varrho0, varrho1=varrho1,
        m0=m0, m1=m1, r0=r0, r1=r1, p_frak=p_frak, Psi=Psi, Xi=Xi, psi=psi, xi=xi,
        h1=h1, h2=h2, h3=h3, h4=h4, h5=h5,
    )


def split_h(c: ConstantsTable, a: float, b: float) -> tuple[float, float, float]:
    """Integrals over ``[a, b]`` of the three instantaneous-cost integrands.

    Returns ``(h3^{a,b}, h4^{a,b}, h5^{a,b})``; over ``[0, T]`` they reduce to
    ``h3``, ``h4`` and ``h5``.
    """
    beta, lam, eps, r, T = c.beta, c.lam, c.eps, c.gamma_ratio, c.T
    width = b - a
    E1 = float(int_exp(c.z1, 0.0, a, b))
    E2 = float(int_exp(c.z2, 0.0, a, b))
    E11 = float(int_exp(2 * c.z1, 0.0, a, b))
    E22 = float(int_exp(2 * c.z2, 0.0, a, b))
    E12 = float(int_exp(c.z1 + c.z2, 0.0, a, b))
    E3 = float(int_exp(c.z3, -c.z3 * T, a, b))
    E33 = float(int_exp(2 * c.z3, -2 * c.z3 * T, a, b))
    E13 = float(int_exp(c.z1 + c.z3, -c.z3 * T, a, b))
    E23 = float(int_exp(c.z2 + c.z3, -c.z3 * T, a, b))
    k = lam / eps
    rm = c.rho_minus
    h3 = (beta * rm) ** 2 * width + 2 * beta * rm * (E1 - r * E2) + E11 + r * r * E22 - 2 * r * E12
    h4 = beta ** 2 * width + 2 * beta * k * E3 + k * k * E33
    h5 = beta ** 2 * rm * width + beta * (E1 - r * E2) + beta * k * rm * E3 + k * (E13 - r * E23)
    return h3, h4, h5
