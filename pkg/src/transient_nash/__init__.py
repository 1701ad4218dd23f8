"""Closed-form Nash equilibria of N-trader execution games with transient impact."""

from .analytics import (AnarchyReport, PredationReport, UndefinedForZeroNetInventory,
                        anarchy_report, coa, coa_limit_n, cop, cost_of_anarchy, lic, pic)
from .constants import ConstantOverflow, ConstantsTable, eval_constants, stable_expm1_div
from .costs import CostBreakdown, GridTooCoarse, cost_by_quadrature, cost_closed_form
from .equilibria import (EquilibriumSolution, ImpactPath, NoEquilibrium, good_thetas,
                         impact_path, sample, solve, solve_A, solve_Aprime, solve_B)
from .limits import ConvergenceReport, eps_sweep, instantaneous_cost_split, phi_sweep
from .model import (CostA, CostAPrime, CostB, InvalidParameter, ModelParams, TimeGrid,
                    deviations, make_grid, mean_inventory, validate)
from .oracle import (DampedBestResponse, DiscreteEquilibrium, DiscreteGame, NotConverged,
                     OracleComparison, ResidualReport, SingularSystem, StackedLinear,
                     auto_damping, best_response, build_discrete_game, compare_with_oracle,
                     ode_residual_A, ode_residual_B, solve_discrete_equilibrium)

__version__ = "0.1.0"
