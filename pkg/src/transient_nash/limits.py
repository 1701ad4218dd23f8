"""Diagnostics for the two limits of the smoothed games.

* ``phi -> infinity``: the terminal-penalty equilibrium approaches the
  liquidation-constrained one.
* ``eps -> 0``: the liquidation-constrained equilibrium approaches the block
  game with the only admissible block costs, and the instantaneous cost
  concentrates near the endpoints into the block costs.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .constants import eval_constants, split_h
from .costs import cost_closed_form
from .equilibria import good_thetas, solve_A, solve_Aprime, solve_B
from .model import CostA, CostAPrime, CostB, InvalidParameter, ModelParams, deviations, make_grid, mean_inventory


@dataclass(frozen=True)
class SplitReport:
    """``eps int (X')^2`` over ``[0, delta]`` (head) and ``[delta, T]`` (tail) per trader."""

    eps: float
    delta: float
    head: np.ndarray
    tail: np.ndarray
    target_head: np.ndarray
    target_tail: np.ndarray

    def relative_errors(self, floor: float = 0.0) -> tuple[np.ndarray, np.ndarray]:
        def rel(val, tgt):
            scale = np.maximum(np.abs(tgt), floor)
            with np.errstate(divide="ignore", invalid="ignore"):
                return np.where(scale > 0, np.abs(val - tgt) / scale, np.abs(val - tgt))
        return rel(self.head, self.target_head), rel(self.tail, self.target_tail)


@dataclass(frozen=True)
class ConvergenceReport:
    kind: str
    parameter_values: np.ndarray
    sup_distances: np.ndarray
    h1_distances: np.ndarray
    cost_gaps: dict
    total_gaps_relative: np.ndarray
    window: tuple[float, float]
    splits: list = field(default_factory=list)

    @property
    def strictly_decreasing(self) -> bool:
        return bool(np.all(np.diff(self.sup_distances) < 0))

    @property
    def flagged_steps(self) -> list[int]:
        """Indices where the sup distance failed to decrease."""
        return [int(k) + 1 for k in np.nonzero(np.diff(self.sup_distances) >= 0)[0]]

    def rows(self) -> list[dict]:
        out = []
        for k, value in enumerate(self.parameter_values):
            row = {"sweep_value": float(value), "sup_distance": float(self.sup_distances[k]),
                   "cost_gap_impact": float(self.cost_gaps["impact"][k]),
                   "cost_gap_smoothing": float(self.cost_gaps["smoothing"][k]),
                   "cost_gap_total": float(self.cost_gaps["total"][k])}
            if self.splits:
                s = self.splits[k]
                for i in range(len(s.head)):
                    row[f"head_{i + 1}"] = float(s.head[i])
                    row[f"tail_{i + 1}"] = float(s.tail[i])
                    row[f"target_head_{i + 1}"] = float(s.target_head[i])
                    row[f"target_tail_{i + 1}"] = float(s.target_tail[i])
            out.append(row)
        return out


def _distances(lim, sol, t: np.ndarray) -> tuple[float, float]:
    """Sup distance of inventories and an H1-type distance on the nodes ``t``."""
    dX = lim.inventory(t) - sol.inventory(t)
    sup = float(np.max(np.abs(dX)))
    dv = lim.rates(t) - sol.rates(t)
    l2 = float(np.sqrt(np.max(np.trapezoid(dv ** 2, t, axis=1)))) if len(t) > 1 else 0.0
    return sup, sup + l2


def phi_sweep(params: ModelParams, eps: float, phi_list, grid_M: int = 2000) -> ConvergenceReport:
    phis = np.asarray(phi_list, dtype=float)
    if np.any(np.diff(phis) <= 0):
        raise InvalidParameter("phi_list", "must be strictly increasing")
    t = make_grid(params.T, grid_M).nodes
    lim = solve_Aprime(params, eps)
    lim_cost = cost_closed_form(params, CostAPrime(eps))
    sups, h1s, rel = [], [], []
    gaps = {"impact": [], "smoothing": [], "terminal": [], "total": []}
    for phi in phis:
        sol = solve_A(params, eps, phi)
        sup, h1 = _distances(lim, sol, t)
        sups.append(sup)
        h1s.append(h1)
        cost = cost_closed_form(params, CostA(eps, phi))
        for key in gaps:
            gaps[key].append(float(np.max(np.abs(getattr(cost, key) - getattr(lim_cost, key)))))
        rel.append(_relative(cost.total, lim_cost.total))
    return ConvergenceReport("phi", phis, np.array(sups), np.array(h1s),
                             {k: np.array(v) for k, v in gaps.items()}, np.array(rel),
                             (0.0, params.T))


def _relative(a: np.ndarray, b: np.ndarray) -> float:
    scale = float(np.max(np.abs(b)))
    diff = float(np.max(np.abs(a - b)))
    return diff / scale if scale > 0 else diff


def instantaneous_cost_split(params: ModelParams, eps: float, delta: float) -> SplitReport:
    """Head and tail of ``eps int (X')^2`` in the liquidation game, with block targets."""
    if not 0 < delta < params.T:
        raise InvalidParameter("delta", "need 0 < delta < T")
    c = eval_constants(params, eps)
    xbar, d = mean_inventory(params), deviations(params)

    def piece(lo, hi):
        h3, h4, h5 = split_h(c, lo, hi)
        return eps * (h3 * xbar ** 2 / c.Psi ** 2 + h4 * d ** 2 / c.Xi ** 2
                      + 2.0 * h5 * xbar * d / (c.Xi * c.Psi))

    theta0, thetaT = good_thetas(params)
    block = solve_B(params, theta0, thetaT)
    return SplitReport(eps, delta, piece(0.0, delta), piece(delta, params.T),
                       theta0 * block.initial_jumps ** 2, thetaT * block.terminal_jumps ** 2)


def eps_sweep(params: ModelParams, eps_list, delta: float | None = None,
              grid_M: int = 2000) -> ConvergenceReport:
    epss = np.asarray(eps_list, dtype=float)
    if np.any(np.diff(epss) >= 0):
        raise InvalidParameter("eps_list", "must be strictly decreasing")
    T = params.T
    delta = 0.1 * T if delta is None else delta
    if not 0 < delta < T / 2:
        raise InvalidParameter("delta", "need 0 < delta < T/2")
    t = make_grid(T, grid_M).nodes
    t = t[(t >= delta) & (t <= T - delta)]
    theta0, thetaT = good_thetas(params)
    lim = solve_B(params, theta0, thetaT)
    lim_cost = cost_closed_form(params, CostB(theta0, thetaT))
    sups, h1s, rel, splits = [], [], [], []
    gaps = {"impact": [], "smoothing": [], "total": []}
    for eps in epss:
        sol = solve_Aprime(params, eps)
        sup, h1 = _distances(lim, sol, t)
        sups.append(sup)
        h1s.append(h1)
        cost = cost_closed_form(params, CostAPrime(eps))
        for key in gaps:
            gaps[key].append(float(np.max(np.abs(getattr(cost, key) - getattr(lim_cost, key)))))
        rel.append(_relative(cost.total, lim_cost.total))
        splits.append(instantaneous_cost_split(params, eps, delta))
    return ConvergenceReport("eps", epss, np.array(sups), np.array(h1s),
                             {k: np.array(v) for k, v in gaps.items()}, np.array(rel),
                             (delta, T - delta), splits)
