"""Per-trader equilibrium costs: closed forms and a quadrature cross-check."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .constants import eval_constants
from .equilibria import (EquilibriumSolution, NoEquilibrium, NoEquilibriumError, _b_scaled,
                         solve_B)
from .model import (CostA, CostAPrime, CostB, CostSpec, InvalidParameter, ModelParams, TimeGrid,
                    deviations, mean_inventory, validate)


class GridTooCoarse(ValueError):
    def __init__(self, M: int, minimum: int = 8):
        super().__init__(f"grid has M={M} steps; need at least {minimum}")
        self.M = M


@dataclass(frozen=True)
class CostBreakdown:
    """Cost components per trader.

    ``smoothing`` is the instantaneous cost ``(eps/2) int v^2`` for A and A',
    or the block cost ``theta0 a^2 / 2 + thetaT b^2 / 2`` for B.
    ``terminal`` is ``(phi/2) X_T^2`` for A and zero otherwise.
    """

    impact: np.ndarray
    smoothing: np.ndarray
    terminal: np.ndarray

    @property
    def total(self) -> np.ndarray:
        return self.impact + self.smoothing + self.terminal

    def rows(self) -> list[dict]:
        return [{"trader": i + 1, "impact": float(a), "smoothing": float(b),
                 "terminal": float(c), "total": float(a + b + c)}
                for i, (a, b, c) in enumerate(zip(self.impact, self.smoothing, self.terminal))]


def _quadratic_costs(params: ModelParams, k_mean: float, k_dev: float, h1: float, h2: float,
                     h3: float, h4: float, h5: float, eps: float) -> tuple[np.ndarray, np.ndarray]:
    """Impact and instantaneous costs from the integrals ``h1..h5``.

    ``k_mean`` and ``k_dev`` are the factors multiplying the mean and
    deviation numerators in the coefficient functions.
    """
    N, lam = params.n_traders, params.lam
    xbar, d = mean_inventory(params), deviations(params)
    impact = lam * N * (h1 * k_mean ** 2 * xbar ** 2 + h2 * k_mean * k_dev * d * xbar)
    inst = 0.5 * eps * (h3 * k_mean ** 2 * xbar ** 2 + h4 * k_dev ** 2 * d ** 2
                        + 2.0 * h5 * k_mean * k_dev * xbar * d)
    return impact, inst


def block_game_impact(params: ModelParams) -> np.ndarray:
    """Impact cost per trader in the block-cost equilibrium."""
    N, lam, beta, T = params.n_traders, params.lam, params.beta, params.T
    tau, Ds = _b_scaled(params)
    inv_E = math.exp(-tau * T)
    xbar, d = mean_inventory(params), deviations(params)
    bracket = ((beta * T + 0.5) * (N + 1) + 3) - 2.0 * (N - 1) / N ** 2 * (N * inv_E + 0.25 * inv_E ** 2)
    return lam * N / (beta * T + 1) * xbar * d + lam * N ** 3 * (N + 1) * bracket / Ds ** 2 * xbar ** 2


def cost_closed_form(params: ModelParams, spec: CostSpec, **gate) -> CostBreakdown:
    validate(params, spec)
    N = params.n_traders
    if isinstance(spec, CostA):
        eps, phi = spec.eps, spec.phi
        c = eval_constants(params, eps, phi)
        k_mean = phi / (eps * c.p_frak + phi * c.Psi)
        k_dev = phi / (eps * c.z3 + phi * c.Xi)
        impact, inst = _quadratic_costs(params, k_mean, k_dev, c.h1, c.h2, c.h3, c.h4, c.h5, eps)
        x_T = (eps * c.z3 * k_dev / phi) * deviations(params) + (eps * c.p_frak * k_mean / phi) * mean_inventory(params)
        return CostBreakdown(impact, inst, 0.5 * phi * x_T ** 2)
    if isinstance(spec, CostAPrime):
        c = eval_constants(params, spec.eps)
        impact, inst = _quadratic_costs(params, 1.0 / c.Psi, 1.0 / c.Xi, c.h1, c.h2, c.h3, c.h4,
                                        c.h5, spec.eps)
        return CostBreakdown(impact, inst, np.zeros(N))
    if isinstance(spec, CostB):
        sol = solve_B(params, spec.theta0, spec.thetaT, **gate)
        if isinstance(sol, NoEquilibrium):
            raise NoEquilibriumError(sol)
        block = 0.5 * spec.theta0 * sol.initial_jumps ** 2 + 0.5 * spec.thetaT * sol.terminal_jumps ** 2
        return CostBreakdown(block_game_impact(params), block, np.zeros(N))
    raise InvalidParameter("cost", f"unknown cost specification {spec!r}")


def cost_by_quadrature(params: ModelParams, spec: CostSpec, solution: EquilibriumSolution,
                       grid: TimeGrid) -> CostBreakdown:
    """Trapezoid-rule evaluation of the cost functionals along ``solution``.

    The impact integral uses the closed-form impact path and trading speeds at
    the grid nodes; block trades contribute ``I_{t-} dX + dI dX / 2`` exactly.
    """
    if grid.n_steps < 8:
        raise GridTooCoarse(grid.n_steps)
    t = grid.nodes
    v = solution.rates(t)
    I = solution.impact(t)
    impact = np.trapezoid(I[None, :] * v, t, axis=1)
    N = params.n_traders
    if isinstance(spec, CostB):
        a, b = solution.initial_jumps, solution.terminal_jumps
        I_T_minus = float(solution.impact.body(params.T))
        impact = (impact + 0.5 * solution.impact.jump_at_0 * a
                  + (I_T_minus + 0.5 * solution.impact.jump_at_T) * b)
        smoothing = 0.5 * spec.theta0 * a ** 2 + 0.5 * spec.thetaT * b ** 2
        return CostBreakdown(impact, smoothing, np.zeros(N))
    smoothing = 0.5 * spec.eps * np.trapezoid(v ** 2, t, axis=1)
    terminal = np.zeros(N)
    if isinstance(spec, CostA):
        terminal = 0.5 * spec.phi * solution.inventory(params.T)[:, 0] ** 2
    return CostBreakdown(impact, smoothing, terminal)
