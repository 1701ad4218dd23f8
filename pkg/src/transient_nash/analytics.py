"""Population-level impact costs, cost of anarchy and cost of predation.

All results refer to the block-cost equilibrium with the admissible block
costs.  Ratios are returned as fractions; multiply by 100 for percentages.
The formulas accept real ``N > 1`` so that smooth curves can be drawn.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .model import ModelParams


class UndefinedForZeroNetInventory(ValueError):
    def __init__(self):
        super().__init__("ratio is undefined when the net inventory is zero")


def _block_terms(beta: float, T: float, N: float) -> tuple[float, float]:
    """``(bracket, D)`` from the block-game impact cost, both divided through by ``E``.

    With ``E = exp(beta (N+1) T / (N-1))`` the returned pair is
    ``bracket / E^2`` and ``D / E`` so nothing overflows for large ``beta T``.
    """
    inv_E = math.exp(-beta * (N + 1) / (N - 1) * T)
    bracket = ((beta * T + 0.5) * (N + 1) + 3) - 2.0 * (N - 1) / N ** 2 * (N * inv_E + 0.25 * inv_E ** 2)
    D = N * ((beta * T + 1) * (N + 1) + 2) - (N - 1) * inv_E
    return bracket, D


def pic_1(lam: float, beta: float, T: float, x: float) -> float:
    """Impact cost of a single trader liquidating ``x``."""
    return lam * x * x / (beta * T + 2)


def pic_n(lam: float, beta: float, T: float, N: float, x: float) -> float:
    """Aggregate impact cost when ``N`` traders each hold ``x / N``."""
    bracket, D = _block_terms(beta, T, N)
    return lam * N ** 2 * (N + 1) * bracket / D ** 2 * x * x


def pic(params: ModelParams, n: int, x_net: float) -> float:
    if n == 1:
        return pic_1(params.lam, params.beta, params.T, x_net)
    if n != params.n_traders:
        raise ValueError(f"n must be 1 or {params.n_traders}")
    return pic_n(params.lam, params.beta, params.T, n, x_net)


def cost_of_anarchy(beta: float, T: float, N: float) -> float:
    """``PIC_N / PIC_1 - 1``; independent of ``lam`` and of the net inventory."""
    bracket, D = _block_terms(beta, T, N)
    return N ** 2 * (N + 1) * bracket / D ** 2 * (beta * T + 2) - 1.0


def coa_limit_n(beta: float, T: float) -> float:
    """Large-population limit of the cost of anarchy."""
    bt = beta * T
    return bt / (2.0 * (bt + 1.0) ** 2)


def liquidator_impact(lam: float, beta: float, T: float, N: float, x: float) -> float:
    """Impact cost of one trader selling ``x`` against ``N - 1`` predators."""
    bracket, D = _block_terms(beta, T, N)
    return lam * ((N - 1) / (N * (beta * T + 1)) + N * (N + 1) * bracket / D ** 2) * x * x


def lic(params: ModelParams, x: float) -> float:
    return liquidator_impact(params.lam, params.beta, params.T, params.n_traders, x)


@dataclass(frozen=True)
class AnarchyReport:
    pic_n: float
    pic_1: float
    coa: float


@dataclass(frozen=True)
class PredationReport:
    lic_n: float
    lic_1: float
    cop: float
    friction_term: float
    coa_share: float


def predation_terms(beta: float, T: float, N: float) -> tuple[float, float, float]:
    """``(cop, friction_term, coa_share)`` with ``cop = friction_term + coa_share``."""
    bt = beta * T
    coa = cost_of_anarchy(beta, T, N)
    friction = (N - 1) * (bt + 2) / (N * (bt + 1)) - (N - 1) / N
    return cost_of_predation(beta, T, N), friction, coa / N


def cost_of_predation(beta: float, T: float, N: float) -> float:
    """``LIC_N / LIC_1 - 1`` evaluated directly from the impact costs."""
    return liquidator_impact(1.0, beta, T, N, 1.0) / pic_1(1.0, beta, T, 1.0) - 1.0


def _net(params: ModelParams) -> float:
    x = float(sum(params.inventories))
    if x == 0.0:
        raise UndefinedForZeroNetInventory()
    return x


def anarchy_report(params: ModelParams) -> AnarchyReport:
    x = _net(params)
    pn = pic(params, params.n_traders, x)
    p1 = pic(params, 1, x)
    return AnarchyReport(pn, p1, pn / p1 - 1.0)


def coa(params: ModelParams) -> float:
    return anarchy_report(params).coa


def cop(params: ModelParams) -> PredationReport:
    """Predation report for a liquidator holding the net inventory of ``params``."""
    x = _net(params)
    ln = lic(params, x)
    l1 = pic(params, 1, x)
    _, friction, share = predation_terms(params.beta, params.T, params.n_traders)
    return PredationReport(ln, l1, ln / l1 - 1.0, friction, share)
