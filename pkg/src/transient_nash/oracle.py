"""Independent verification tools.

* A discretised game: every trader uses a piecewise-constant trading speed on
  a uniform grid (plus endpoint blocks for variant B).  The impact cost is the
  exact double integral of the exponential kernel over grid cells, so each
  player's objective is an explicit quadratic form and the Nash equilibrium is
  the solution of one linear system.
* Residual checkers for the first-order systems that the closed forms solve.
"""

from __future__ import annotations

import json
import time
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import cho_factor, cho_solve

from .constants import stable_expm1_div
from .costs import CostBreakdown, GridTooCoarse, cost_closed_form
from .equilibria import EquilibriumSolution, solve_or_raise
from .model import (CostA, CostAPrime, CostB, CostSpec, ModelParams, TimeGrid, make_grid,
                    mean_inventory)


class SingularSystem(np.linalg.LinAlgError):
    pass


class NotConverged(RuntimeError):
    def __init__(self, iterations: int, residual: float):
        super().__init__(f"no convergence after {iterations} iterations (last change {residual:.3e})")
        self.iterations = iterations
        self.residual = residual


# ---------------------------------------------------------------------------
# kernel assembly


def _diag_cell(beta: float, h: float) -> float:
    """``int_0^h int_0^h exp(-beta |t - s|) ds dt`` without cancellation."""
    x = beta * h
    if x < 0.1:
        # 2 (e^{-x} - 1 + x) / x^2 = sum_k 2 (-x)^k / (k + 2)!
        total, term = 0.0, 1.0
        for k in range(12):
            total += term
            term *= -x / (k + 3)
        return h * h * total
    return 2.0 * (x + np.expm1(-x)) / (beta * beta)


def cell_kernel(lam: float, beta: float, grid: TimeGrid) -> np.ndarray:
    """``K[k, l] = lam * int_{cell k} int_{cell l} exp(-beta |t - s|) ds dt``."""
    h, M = grid.dt, grid.n_steps
    left = grid.T * np.arange(M) / M
    gap = np.abs(np.subtract.outer(left, left))
    factor = float(stable_expm1_div(-beta, h) * stable_expm1_div(beta, h))
    K = lam * factor * np.exp(-beta * gap)
    np.fill_diagonal(K, lam * _diag_cell(beta, h))
    return K


def _element_kernel(lam: float, beta: float, grid: TimeGrid) -> np.ndarray:
    """Kernel over ``[block at 0, cells..., block at T]`` for variant B."""
    M, h, T = grid.n_steps, grid.dt, grid.T
    left = T * np.arange(M) / M
    right = T * np.arange(1, M + 1) / M
    right[-1] = T
    K = np.empty((M + 2, M + 2))
    K[1:-1, 1:-1] = cell_kernel(lam, beta, grid)
    w = float(stable_expm1_div(-beta, h))
    K[0, 1:-1] = K[1:-1, 0] = lam * np.exp(-beta * left) * w
    K[-1, 1:-1] = K[1:-1, -1] = lam * np.exp(-beta * (T - right)) * w
    K[0, 0] = K[-1, -1] = lam
    K[0, -1] = K[-1, 0] = lam * np.exp(-beta * T)
    return K


# ---------------------------------------------------------------------------
# the discrete game


@dataclass(frozen=True)
class DiscreteGame:
    """Per-player objective ``u'Pu/2 + u'(L s + x q) + c x^2`` over elements ``u``.

    ``s`` is the sum of the other players' elements.  Elements are the cell
    speeds for A and A'; for B they are ``(a, v_1..v_M, b)``.
    """

    params: ModelParams
    spec: CostSpec
    grid: TimeGrid
    kernel: np.ndarray            # cell kernel (M x M)
    element_kernel: np.ndarray    # kernel over all decision elements
    cross: np.ndarray             # strictly-earlier part plus half the diagonal
    smoothing: np.ndarray         # quadratic smoothing / block cost matrix
    weights: np.ndarray           # inventory change per unit of each element
    constrained: bool
    _factor: tuple = field(repr=False, compare=False, default=None)

    @property
    def n_elements(self) -> int:
        return self.element_kernel.shape[0]

    @property
    def phi(self) -> float:
        return self.spec.phi if isinstance(self.spec, CostA) else 0.0

    @property
    def hessian(self) -> np.ndarray:
        w = self.weights
        return self.element_kernel + self.smoothing + self.phi * np.outer(w, w)

    def linear(self, x_i: float) -> np.ndarray:
        return self.phi * x_i * self.weights

    def split(self, u: np.ndarray) -> tuple[np.ndarray, np.ndarray | None, np.ndarray | None]:
        """Return ``(rates, a, b)`` from element vectors (last axis)."""
        if isinstance(self.spec, CostB):
            return u[..., 1:-1], u[..., 0], u[..., -1]
        return u, None, None


def build_discrete_game(params: ModelParams, spec: CostSpec, grid: TimeGrid) -> DiscreteGame:
    if grid.n_steps < 8:
        raise GridTooCoarse(grid.n_steps)
    M, h = grid.n_steps, grid.dt
    if isinstance(spec, CostB):
        K = _element_kernel(params.lam, params.beta, grid)
        S = np.zeros_like(K)
        S[0, 0], S[-1, -1] = spec.theta0, spec.thetaT
        weights = np.concatenate([[1.0], np.full(M, h), [1.0]])
        constrained = True
    else:
        K = cell_kernel(params.lam, params.beta, grid)
        S = spec.eps * h * np.eye(M)
        weights = np.full(M, h)
        constrained = isinstance(spec, CostAPrime)
    L = np.tril(K, -1) + 0.5 * np.diag(np.diag(K))
    game = DiscreteGame(params, spec, grid, K[1:-1, 1:-1] if isinstance(spec, CostB) else K,
                        K, L, S, weights, constrained)
    try:
        factor = cho_factor(game.hessian)
    except np.linalg.LinAlgError as exc:
        raise SingularSystem(f"player objective is not positive definite: {exc}") from None
    object.__setattr__(game, "_factor", factor)
    return game


def player_cost(game: DiscreteGame, i: int, profile: np.ndarray) -> CostBreakdown:
    """Cost components of player ``i`` (scalars in length-1 arrays)."""
    u = profile[i]
    s = profile.sum(axis=0) - u
    x_i = game.params.inventories[i]
    impact = 0.5 * u @ game.element_kernel @ u + u @ game.cross @ s
    smoothing = 0.5 * u @ game.smoothing @ u
    terminal = 0.5 * game.phi * (x_i + game.weights @ u) ** 2
    return CostBreakdown(np.array([impact]), np.array([smoothing]), np.array([terminal]))


def profile_costs(game: DiscreteGame, profile: np.ndarray) -> CostBreakdown:
    parts = [player_cost(game, i, profile) for i in range(game.params.n_traders)]
    return CostBreakdown(*(np.concatenate([getattr(p, k) for p in parts])
                           for k in ("impact", "smoothing", "terminal")))


def _response(game: DiscreteGame, i: int, others: np.ndarray) -> np.ndarray:
    s = others.sum(axis=0) - others[i]
    x_i = game.params.inventories[i]
    rhs = -(game.cross @ s + game.linear(x_i))
    u = cho_solve(game._factor, rhs)
    if game.constrained:
        c = game.weights
        pc = cho_solve(game._factor, c)
        mu = (c @ u + x_i) / (c @ pc)
        u = u - mu * pc
    return u


def best_response(game: DiscreteGame, i: int, others: np.ndarray) -> tuple[np.ndarray, float]:
    """Exact minimiser of player ``i``'s cost against ``others`` and its value.

    ``others`` is a full profile; row ``i`` is ignored.
    """
    u = _response(game, i, others)
    profile = others.copy()
    profile[i] = u
    return u, float(player_cost(game, i, profile).total[0])


@dataclass(frozen=True)
class StackedLinear:
    pass


@dataclass(frozen=True)
class DampedBestResponse:
    """Simultaneous best responses mixed with the current profile.

    ``damping=None`` picks the step from the spectrum of the best-response map
    (see :func:`auto_damping`); a fixed value such as ``0.5`` can diverge when
    that map has large eigenvalues.
    """

    damping: float | None = 0.5
    init: np.ndarray | None = None


@dataclass(frozen=True)
class DiscreteEquilibrium:
    game: DiscreteGame
    profile: np.ndarray    # (N, n_elements)
    br_gap: float
    method: str
    iterations: int = 1

    @property
    def rates(self) -> np.ndarray:
        return self.game.split(self.profile)[0]

    @property
    def jumps(self) -> tuple[np.ndarray, np.ndarray] | None:
        _, a, b = self.game.split(self.profile)
        return None if a is None else (a, b)

    def inventory_nodes(self) -> np.ndarray:
        """Inventories at grid nodes, ``(N, M+1)``; right-continuous at both ends."""
        rates, a, b = self.game.split(self.profile)
        x = self.game.params.x
        start = x if a is None else x + a
        X = start[:, None] + np.concatenate(
            [np.zeros((len(x), 1)), np.cumsum(rates * self.game.grid.dt, axis=1)], axis=1)
        if b is not None:
            X[:, -1] = X[:, -1] + b
        return X

    def costs(self) -> CostBreakdown:
        return profile_costs(self.game, self.profile)


def br_gap(game: DiscreteGame, profile: np.ndarray) -> float:
    """Largest cost reduction any single player obtains by best-responding."""
    current = profile_costs(game, profile).total
    gaps = [current[i] - best_response(game, i, profile)[1] for i in range(game.params.n_traders)]
    return float(max(gaps))


def _stacked(game: DiscreteGame) -> np.ndarray:
    N, n = game.params.n_traders, game.n_elements
    P, L = game.hessian, game.cross
    extra = N if game.constrained else 0
    A = np.zeros((N * n + extra, N * n + extra))
    rhs = np.zeros(N * n + extra)
    for i in range(N):
        rows = slice(i * n, (i + 1) * n)
        for j in range(N):
            A[rows, j * n:(j + 1) * n] = P if i == j else L
        x_i = game.params.inventories[i]
        rhs[rows] = -game.linear(x_i)
        if game.constrained:
            A[rows, N * n + i] = game.weights
            A[N * n + i, rows] = game.weights
            rhs[N * n + i] = -x_i
    try:
        sol = np.linalg.solve(A, rhs)
    except np.linalg.LinAlgError as exc:
        raise SingularSystem(str(exc)) from None
    return sol[:N * n].reshape(N, n)


def best_response_spectrum(game: DiscreteGame) -> np.ndarray:
    """Eigenvalues of the linear part of the simultaneous best-response map.

    Each player's response is ``B s + const`` in the sum ``s`` of the others, so
    the stacked map is ``B`` tensored with ``ones - identity``, whose eigenvalues
    are ``(N - 1) mu`` and ``-mu`` for the eigenvalues ``mu`` of ``B``.
    """
    B = -cho_solve(game._factor, game.cross)
    if game.constrained:
        c = game.weights
        pc = cho_solve(game._factor, c)
        B = B - np.outer(pc, c @ B) / (c @ pc)
    mu = np.linalg.eigvals(B)
    return np.concatenate([(game.params.n_traders - 1) * mu, -mu])


def auto_damping(game: DiscreteGame) -> tuple[float, float]:
    """``(damping, contraction)`` for damped best responses, or raise if none converges.

    With eigenvalues ``k`` the damped map has eigenvalues ``1 - d (1 - k)``.  A
    step ``d`` with all of these inside the unit disc exists iff every
    ``Re k < 1``; the step below is the best one for the worst eigenvalue.
    """
    k = best_response_spectrum(game)
    gap = 1.0 - k.real
    if np.any(gap <= 0):
        raise NotConverged(0, float(np.max(k.real)))
    d = float(min(1.0, np.min(gap / np.abs(1.0 - k) ** 2)))
    return d, float(np.max(np.abs(1.0 - d * (1.0 - k))))


def solve_discrete_equilibrium(game: DiscreteGame, method=StackedLinear(), tol: float = 1e-10,
                               max_iter: int = 5000) -> DiscreteEquilibrium:
    if isinstance(method, StackedLinear):
        profile = _stacked(game)
        return DiscreteEquilibrium(game, profile, br_gap(game, profile), "stacked")
    d = auto_damping(game)[0] if method.damping is None else method.damping
    N, n = game.params.n_traders, game.n_elements
    profile = np.zeros((N, n)) if method.init is None else np.array(method.init, dtype=float)
    change = np.inf
    # iterates this far from any plausible equilibrium mean the map is expanding
    blowup = 1e12 * max(1.0, float(np.max(np.abs(profile))), float(np.max(np.abs(game.params.x))))
    for it in range(1, max_iter + 1):
        target = np.stack([_response(game, i, profile) for i in range(N)])
        new = (1.0 - d) * profile + d * target
        change = float(np.max(np.abs(new - profile)))
        profile = new
        if not change <= blowup:
            raise NotConverged(it, change)
        if change <= tol:
            return DiscreteEquilibrium(game, profile, br_gap(game, profile), "damped", it)
    raise NotConverged(max_iter, change)


def project_solution(game: DiscreteGame, solution: EquilibriumSolution) -> np.ndarray:
    """Cell-average speeds (and blocks) of a continuous-time strategy profile."""
    nodes = game.grid.nodes
    X = solution.inventory(nodes)
    if isinstance(game.spec, CostB):
        X[:, -1] = solution.left_limit_T()
        rates = np.diff(X, axis=1) / game.grid.dt
        return np.concatenate([solution.initial_jumps[:, None], rates,
                               solution.terminal_jumps[:, None]], axis=1)
    return np.diff(X, axis=1) / game.grid.dt


# ---------------------------------------------------------------------------
# comparison of the discrete equilibrium with the closed form


@dataclass(frozen=True)
class OracleComparison:
    grid_M: int
    sup_distance: float
    cost_gap: float
    component_gaps: dict
    br_gap: float
    seconds: float

    def to_dict(self) -> dict:
        return {"grid_M": self.grid_M, "sup_distance": self.sup_distance,
                "cost_gap": self.cost_gap, "component_gaps": self.component_gaps,
                "br_gap": self.br_gap, "seconds": self.seconds}


def relative_gap(a: np.ndarray, b: np.ndarray) -> float:
    """``max |a - b|`` relative to the largest magnitude among ``b`` (floored at 1e-300)."""
    scale = max(float(np.max(np.abs(b))), 1e-300)
    return float(np.max(np.abs(a - b))) / scale


def compare_with_oracle(params: ModelParams, spec: CostSpec, M: int) -> OracleComparison:
    start = time.perf_counter()
    grid = make_grid(params.T, M)
    game = build_discrete_game(params, spec, grid)
    eq = solve_discrete_equilibrium(game)
    elapsed = time.perf_counter() - start
    sol = solve_or_raise(params, spec)
    closed = sol.inventory(grid.nodes)
    if isinstance(spec, CostB):
        closed[:, -1] = 0.0
    sup = float(np.max(np.abs(eq.inventory_nodes() - closed)))
    disc, exact = eq.costs(), cost_closed_form(params, spec)
    comps = {k: relative_gap(getattr(disc, k), getattr(exact, k))
             for k in ("impact", "smoothing", "terminal") if np.any(getattr(exact, k))}
    return OracleComparison(M, sup, relative_gap(disc.total, exact.total), comps, eq.br_gap, elapsed)


# ---------------------------------------------------------------------------
# residuals of the first-order systems


@dataclass(frozen=True)
class ResidualReport:
    max_residual: float
    lines: dict
    boundary_residuals: dict
    grid_M: int
    normalized: bool = True

    def to_dict(self) -> dict:
        return {"max_residual": self.max_residual, "lines": self.lines,
                "boundary_residuals": self.boundary_residuals, "grid_M": self.grid_M,
                "normalized": self.normalized}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    @property
    def worst(self) -> float:
        return max([self.max_residual, *self.boundary_residuals.values()])


def _paths(solution: EquilibriumSolution, t: np.ndarray):
    v_fns = solution.rate_functions()
    v = np.array([f(t) for f in v_fns])
    vdot = np.array([f.derivative()(t) for f in v_fns])
    return v_fns, v, vdot


def ode_residual_A(params: ModelParams, eps: float, phi: float, solution: EquilibriumSolution,
                   grid: TimeGrid) -> ResidualReport:
    lam, beta, T = params.lam, params.beta, params.T
    t = grid.nodes
    v_fns, v, vdot = _paths(solution, t)
    S = v.sum(axis=0)
    I, Idot = solution.impact(t), solution.impact.derivative(t)
    J = np.array([f.discounted_future(beta, T, t) for f in v_fns])
    Y = lam * J
    Ydot = lam * (beta * J - v)  # Leibniz rule applied to the closed-form integral
    X_T = solution.inventory(T)[:, 0]
    scale = max(float(np.max(np.abs(I))), lam * float(np.max(np.abs(v))), 1.0)
    lines = {
        "impact": float(np.max(np.abs(Idot + beta * I - lam * S))) / scale,
        "adjoint": float(np.max(np.abs(Ydot - beta * Y + lam * v))) / scale,
        "speed": float(np.max(np.abs(eps * vdot - (beta * I - beta * Y - lam * (S - v))))) / scale,
        "foc": float(np.max(np.abs(Y + I + eps * v + phi * X_T[:, None]))) / scale,
    }
    vscale = max(float(np.max(np.abs(v))), 1.0)
    boundary = {
        "I_0": abs(float(I[0])) / scale,
        "Y_T": float(np.max(np.abs(Y[:, -1]))) / scale,
        "v_T": float(np.max(np.abs(v[:, -1] + (phi * X_T + I[-1]) / eps))) / vscale,
    }
    return ResidualReport(max(lines.values()), lines, boundary, grid.n_steps)


def ode_residual_B(params: ModelParams, theta0: float, thetaT: float,
                   solution: EquilibriumSolution, grid: TimeGrid) -> ResidualReport:
    lam, beta, T, N = params.lam, params.beta, params.T, params.n_traders
    t = grid.nodes
    v_fns, v, _ = _paths(solution, t)
    a, b = solution.initial_jumps, solution.terminal_jumps
    I, Idot = solution.impact(t), solution.impact.derivative(t)
    J = np.array([f.discounted_future(beta, T, t) for f in v_fns])
    Y = lam * b[:, None] * np.exp(-beta * (T - t))[None, :] + lam * J
    Ydot = beta * Y - lam * v
    gap = I - Y.sum(axis=0)
    scale = max(float(np.max(np.abs(I))), lam * float(np.max(np.abs(v))), 1.0)
    k = beta / (N - 1)
    lines = {
        "impact": float(np.max(np.abs(Idot - k * gap))) / scale,
        "adjoint": float(np.max(np.abs(Ydot + k * gap[None, :]))) / scale,
        "speed": float(np.max(np.abs(lam * v - k * (I[None, :] + (N - 1) * Y - Y.sum(axis=0)[None, :])))) / scale,
    }
    X0 = solution.inventory(0.0)[:, 0]
    others_a = a.sum() - a
    others_b = b.sum() - b
    boundary = {
        "I_0": abs(float(I[0]) - lam * float(a.sum())) / scale,
        "X_0": float(np.max(np.abs(X0 - (params.x + a)))) / max(1.0, float(np.max(np.abs(params.x)))),
        "Y_T": float(np.max(np.abs(Y[:, -1] - lam * b))) / scale,
        "theta0": float(np.max(np.abs(theta0 * a - 0.5 * lam * others_a))) / scale,
        "thetaT": float(np.max(np.abs(thetaT * b + 0.5 * lam * others_b))) / scale,
        "b": float(np.max(np.abs(b + solution.left_limit_T()))) / max(1.0, float(np.max(np.abs(params.x)))),
    }
    return ResidualReport(max(lines.values()), lines, boundary, grid.n_steps)
