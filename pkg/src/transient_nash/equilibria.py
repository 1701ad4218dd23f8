"""Closed-form Nash equilibria for the three cost variants.

In every variant the equilibrium inventory of trader ``i`` is

    X^i_t = dev(t) * (x^i - xbar) + mean(t) * xbar,

so a solution is described by two scalar coefficient functions, the endpoint
block trades (variant B only) and the aggregate impact path ``I_t``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .constants import ConstantsTable, eval_constants
from .expsum import ExpSum
from .model import (CostA, CostAPrime, CostB, CostSpec, InvalidParameter, ModelParams,
                    TimeGrid, deviations, mean_inventory, validate)

DEFAULT_TOL_THETA = 1e-9
DEFAULT_TOL_X = 1e-9


@dataclass(frozen=True)
class Coefficient:
    """A coefficient function on ``[0, T]``.

    ``body`` gives the value on ``[0, T)``.  When ``liquidates`` is set the
    value at ``t = T`` is exactly zero regardless of rounding in ``body``;
    ``continuous_start`` pins the value at ``t = 0`` to exactly one.
    The value just before time zero is always 1 (the initial holding).
    """

    body: ExpSum
    T: float
    liquidates: bool = False
    continuous_start: bool = False

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        out = np.asarray(self.body(t), dtype=float)
        if self.continuous_start:
            out = np.where(t <= 0.0, 1.0, out)
        if self.liquidates:
            out = np.where(t >= self.T, 0.0, out)
        return out[()] if out.ndim == 0 else out

    def derivative(self, t):
        return self.body.derivative()(t)

    def left_limit_T(self) -> float:
        return float(self.body(self.T))

    at_0minus = 1.0


@dataclass(frozen=True)
class ImpactPath:
    """Aggregate impact ``I_t``; ``body`` is the value on ``[0, T)``."""

    body: ExpSum
    jump_at_0: float = 0.0
    jump_at_T: float = 0.0

    def __call__(self, t):
        return self.body(t)

    def derivative(self, t):
        return self.body.derivative()(t)


@dataclass(frozen=True)
class NoEquilibrium:
    """Returned (not raised) when the block-cost game has no equilibrium."""

    reason: str  # "WrongTheta0" | "WrongThetaT" | "WrongBoth"
    witness: dict

    def message(self) -> str:
        return f"no Nash equilibrium ({self.reason}): {self.witness}"


class NoEquilibriumError(RuntimeError):
    def __init__(self, result: NoEquilibrium):
        super().__init__(result.message())
        self.result = result


@dataclass(frozen=True)
class EquilibriumSolution:
    variant: str
    params: ModelParams
    spec: CostSpec
    deviation_coeff: Coefficient
    mean_coeff: Coefficient
    impact: ImpactPath
    initial_jumps: np.ndarray
    terminal_jumps: np.ndarray
    terminal_inventory: np.ndarray
    constants: ConstantsTable | None = None
    grid_samples: np.ndarray | None = field(default=None, compare=False)

    @property
    def xbar(self) -> float:
        return mean_inventory(self.params)

    @property
    def dev(self) -> np.ndarray:
        return deviations(self.params)

    def inventory(self, t) -> np.ndarray:
        """``X^i_t`` as an ``(N, len(t))`` array (right-continuous at 0)."""
        t = np.atleast_1d(np.asarray(t, dtype=float))
        return np.outer(self.dev, self.deviation_coeff(t)) + self.xbar * self.mean_coeff(t)[None, :]

    def rates(self, t) -> np.ndarray:
        """Absolutely continuous trading speeds ``v^i_t`` on ``(0, T)``."""
        t = np.atleast_1d(np.asarray(t, dtype=float))
        return (np.outer(self.dev, self.deviation_coeff.derivative(t))
                + self.xbar * self.mean_coeff.derivative(t)[None, :])

    def rate_functions(self) -> list[ExpSum]:
        """Per-trader speed ``v^i`` as an exact exponential sum."""
        df = self.deviation_coeff.body.derivative()
        dg = self.mean_coeff.body.derivative()
        return [df.scale(d) + dg.scale(self.xbar) for d in self.dev]

    def left_limit_T(self) -> np.ndarray:
        """``X^i_{T-}``."""
        return (self.dev * self.deviation_coeff.left_limit_T()
                + self.xbar * self.mean_coeff.left_limit_T())

    @property
    def pre_trade(self) -> np.ndarray:
        """``X^i_{0-} = x^i``."""
        return self.params.x


def _linear_num(c: ConstantsTable) -> tuple[ExpSum, ExpSum]:
    """Numerators of the deviation and mean coefficients.

    ``F(t) = beta t + (lam / (eps z3)) (exp(z3 (t - T)) - exp(-z3 T))`` with ``F(T) = Xi``;
    ``G(t) = beta rho_- t + (e^{z1 t} - 1)/z1 - r (e^{z2 t} - 1)/z2`` with ``G(T) = Psi``.
    """
    k = c.lam / (c.eps * c.z3)
    F = ExpSum(-k * math.exp(-c.z3 * c.T), c.beta, (k,), (c.z3,), (-c.z3 * c.T,))
    r = c.gamma_ratio
    G = ExpSum(-1.0 / c.z1 + r / c.z2, c.beta * c.rho_minus,
               (1.0 / c.z1, -r / c.z2), (c.z1, c.z2), (0.0, 0.0))
    return F, G


def _impact_shape(c: ConstantsTable) -> ExpSum:
    """``rho_- + e^{z1 t}/(z1 + beta) - r e^{z2 t}/(z2 + beta)``; zero at ``t = 0``."""
    r = c.gamma_ratio
    return ExpSum(c.rho_minus, 0.0, (1.0 / (c.z1 + c.beta), -r / (c.z2 + c.beta)),
                  (c.z1, c.z2), (0.0, 0.0))


def _one_minus(num: ExpSum, den: float) -> ExpSum:
    return ExpSum(1.0) + num.scale(-1.0 / den)


def solve_A(params: ModelParams, eps: float, phi: float) -> EquilibriumSolution:
    """Equilibrium with instantaneous cost and terminal penalty ``(phi/2) X_T^2``."""
    spec = CostA(eps, phi)
    validate(params, spec)
    c = eval_constants(params, eps, phi)
    F, G = _linear_num(c)
    den_f = eps * c.z3 + phi * c.Xi  # eps * xi
    den_g = eps * c.p_frak + phi * c.Psi  # eps * psi
    f = Coefficient(_one_minus(F.scale(phi), den_f), params.T, continuous_start=True)
    g = Coefficient(_one_minus(G.scale(phi), den_g), params.T, continuous_start=True)
    xbar = mean_inventory(params)
    impact = ImpactPath(_impact_shape(c).scale(-params.n_traders * params.lam * phi / den_g * xbar))
    x_T = eps * c.z3 / den_f * deviations(params) + eps * c.p_frak / den_g * xbar
    zeros = np.zeros(params.n_traders)
    return EquilibriumSolution("A", params, spec, f, g, impact, zeros, zeros.copy(), x_T, c)


def solve_Aprime(params: ModelParams, eps: float) -> EquilibriumSolution:
    """Equilibrium with instantaneous cost and the liquidation constraint."""
    spec = CostAPrime(eps)
    validate(params, spec)
    c = eval_constants(params, eps)
    F, G = _linear_num(c)
    f = Coefficient(_one_minus(F, c.Xi), params.T, liquidates=True, continuous_start=True)
    g = Coefficient(_one_minus(G, c.Psi), params.T, liquidates=True, continuous_start=True)
    xbar = mean_inventory(params)
    impact = ImpactPath(_impact_shape(c).scale(-params.n_traders * params.lam / c.Psi * xbar))
    zeros = np.zeros(params.n_traders)
    return EquilibriumSolution("Aprime", params, spec, f, g, impact, zeros, zeros.copy(),
                               zeros.copy(), c)


def good_thetas(params: ModelParams) -> tuple[float, float]:
    """The only block costs for which an equilibrium exists for every ``x``."""
    return params.lam * (params.n_traders - 1) / 2.0, params.lam / 2.0


def _b_scaled(params: ModelParams) -> tuple[float, float]:
    """``(tau, D / E)`` with ``tau = beta (N+1)/(N-1)`` and ``E = exp(tau T)``."""
    N, beta, T = params.n_traders, params.beta, params.T
    tau = beta * (N + 1) / (N - 1)
    inv_E = math.exp(-tau * T)
    return tau, N * ((beta * T + 1) * (N + 1) + 2) - (N - 1) * inv_E


def existence_gate(params: ModelParams, theta0: float, thetaT: float,
                   tol_theta: float = DEFAULT_TOL_THETA, tol_x: float | None = None
                   ) -> NoEquilibrium | None:
    x = params.x
    if tol_x is None:
        tol_x = DEFAULT_TOL_X * max(1.0, float(np.max(np.abs(x))))
    good0, goodT = good_thetas(params)
    match0 = abs(theta0 - good0) <= tol_theta * params.lam
    matchT = abs(thetaT - goodT) <= tol_theta * params.lam
    xbar = mean_inventory(params)
    spread = float(np.max(x) - np.min(x))
    bad0 = not match0 and abs(xbar) > tol_x
    badT = not matchT and spread > tol_x
    if not (bad0 or badT):
        return None
    witness = {"theta0": theta0, "theta0_required": good0, "thetaT": thetaT,
               "thetaT_required": goodT}
    if bad0:
        witness["mean_inventory"] = xbar
    if badT:
        witness["inventory_spread"] = spread
    reason = "WrongBoth" if bad0 and badT else ("WrongTheta0" if bad0 else "WrongThetaT")
    return NoEquilibrium(reason, witness)


def solve_B(params: ModelParams, theta0: float, thetaT: float,
            tol_theta: float = DEFAULT_TOL_THETA, tol_x: float | None = None
            ) -> EquilibriumSolution | NoEquilibrium:
    """Equilibrium with endpoint block costs, or the reason none exists."""
    spec = CostB(theta0, thetaT)
    validate(params, spec)
    blocked = existence_gate(params, theta0, thetaT, tol_theta, tol_x)
    if blocked is not None:
        return blocked
    N, lam, beta, T = params.n_traders, params.lam, params.beta, params.T
    tau, Ds = _b_scaled(params)
    inv_E = math.exp(-tau * T)
    f = Coefficient(ExpSum(1.0, -beta / (beta * T + 1)), T, liquidates=True)
    # 1 - [N (N+1) E (beta t + 1) + 2 N e^{tau t} - (N-1)] / D, divided through by E
    g = Coefficient(
        ExpSum(1.0 - (N * (N + 1) - (N - 1) * inv_E) / Ds, -N * (N + 1) * beta / Ds,
               (-2.0 * N / Ds,), (tau,), (-tau * T,)),
        T, liquidates=True)
    xbar = mean_inventory(params)
    dev = deviations(params)
    # adding 0.0 turns signed zeros into plain zeros for output
    a = np.full(N, -(N + 1) * (N + inv_E) / Ds * xbar) + 0.0
    b = -dev / (1.0 + beta * T) + 0.0
    k = -lam * N * (N + 1) / Ds * xbar
    impact = ImpactPath(ExpSum(k * N, 0.0, (k,), (tau,), (-tau * T,)),
                        jump_at_0=lam * float(np.sum(a)), jump_at_T=lam * float(np.sum(b)))
    return EquilibriumSolution("B", params, spec, f, g, impact, a, b, np.zeros(N))


def solve(params: ModelParams, spec: CostSpec, **gate) -> EquilibriumSolution | NoEquilibrium:
    if isinstance(spec, CostA):
        return solve_A(params, spec.eps, spec.phi)
    if isinstance(spec, CostAPrime):
        return solve_Aprime(params, spec.eps)
    if isinstance(spec, CostB):
        return solve_B(params, spec.theta0, spec.thetaT, **gate)
    raise InvalidParameter("cost", f"unknown cost specification {spec!r}")


def solve_or_raise(params: ModelParams, spec: CostSpec, **gate) -> EquilibriumSolution:
    sol = solve(params, spec, **gate)
    if isinstance(sol, NoEquilibrium):
        raise NoEquilibriumError(sol)
    return sol


def impact_path(params: ModelParams, spec: CostSpec, solution: EquilibriumSolution) -> ImpactPath:
    return solution.impact


def sample(solution: EquilibriumSolution, grid: TimeGrid) -> np.ndarray:
    """Inventory matrix ``(N, M+1)`` on the grid nodes.

    For variant B the column at ``t = 0`` is the post-block value ``X_0`` and
    the column at ``t = T`` is 0; ``solution.pre_trade`` and
    ``solution.left_limit_T()`` give the other one-sided values.
    """
    if abs(grid.T - solution.params.T) > 1e-12 * solution.params.T:
        raise InvalidParameter("grid", "grid horizon does not match the model horizon")
    return solution.inventory(grid.nodes)
