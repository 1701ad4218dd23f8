"""Measure the empirical convergence rates quoted in the notes.

* discrete oracle vs closed form: sup distance and cost gap against the grid size
* quadrature of the closed-form costs against the grid size
* head/tail split of the instantaneous cost against eps
* phi -> infinity and eps -> 0 sup distances
* contraction factor of damped best responses

    python scripts/convergence_rates.py [--x 1.5,1.0,-1.0]
"""

from __future__ import annotations

import argparse

import numpy as np

from transient_nash import (CostA, CostAPrime, CostB, ModelParams, compare_with_oracle,
                            cost_by_quadrature, cost_closed_form, good_thetas, make_grid, solve)
from transient_nash.limits import eps_sweep, instantaneous_cost_split, phi_sweep
from transient_nash.oracle import auto_damping, build_discrete_game


def _orders(values, factor=2.0):
    v = np.asarray(values, dtype=float)
    return np.log(v[:-1] / v[1:]) / np.log(factor)


def oracle_rates(p: ModelParams) -> None:
    print("== discrete oracle vs closed form ==")
    for spec in (CostA(0.05, 5.0), CostAPrime(0.05), CostB(*good_thetas(p))):
        Ms = [125, 250, 500, 1000]
        comps = [compare_with_oracle(p, spec, M) for M in Ms]
        sups = [c.sup_distance for c in comps]
        gaps = [c.cost_gap for c in comps]
        print(f"{spec.variant:7s} M={Ms}")
        print(f"        sup   {np.array2string(np.array(sups), precision=2)}  order {np.array2string(_orders(sups), precision=2)}")
        print(f"        cost  {np.array2string(np.array(gaps), precision=2)}  order {np.array2string(_orders(gaps), precision=2)}")
        print(f"        seconds at M=1000: {comps[-1].seconds:.2f}, br_gap {comps[-1].br_gap:.1e}")


def quadrature_rates(p: ModelParams) -> None:
    print("== trapezoid quadrature of the cost functionals ==")
    for spec in (CostA(0.05, 5.0), CostAPrime(0.05), CostB(*good_thetas(p))):
        exact = cost_closed_form(p, spec).total
        sol = solve(p, spec)
        Ms = [250, 500, 1000, 2000]
        errs = [np.max(np.abs(cost_by_quadrature(p, spec, sol, make_grid(p.T, M)).total - exact))
                for M in Ms]
        print(f"{spec.variant:7s} err {np.array2string(np.array(errs), precision=2)}  order {np.array2string(_orders(errs), precision=2)}")


def split_rates(p: ModelParams) -> None:
    print("== head/tail split of eps int v^2 (delta = 0.1) ==")
    epss = [1e-2, 1e-3, 1e-4, 1e-5]
    errs = []
    for eps in epss:
        head, tail = instantaneous_cost_split(p, eps, 0.1).relative_errors()
        errs.append(max(head.max(), tail.max()))
        print(f"eps={eps:.0e} max relative error {errs[-1]:.3e}")
    print(f"orders per decade of eps: {np.array2string(_orders(errs, 10.0), precision=2)}")


def limit_sweeps(p: ModelParams) -> None:
    print("== phi -> infinity (eps = 0.05) ==")
    rep = phi_sweep(p, 0.05, [1.0, 10.0, 1e2, 1e3, 1e4])
    print("sup   ", np.array2string(rep.sup_distances, precision=3))
    print("cost  ", np.array2string(rep.total_gaps_relative, precision=3))
    print("== eps -> 0 on [0.1, 0.9] ==")
    rep = eps_sweep(p, [0.1, 0.03, 0.005, 1e-3, 1e-4])
    print("sup   ", np.array2string(rep.sup_distances, precision=3))
    print("cost  ", np.array2string(rep.total_gaps_relative, precision=3))


def damping(p: ModelParams) -> None:
    print("== damped best responses: chosen step and contraction factor ==")
    for spec in (CostA(0.05, 5.0), CostAPrime(1e-3), CostB(*good_thetas(p))):
        for M in (50, 100, 200):
            d, rho = auto_damping(build_discrete_game(p, spec, make_grid(p.T, M)))
            its = np.log(1e-10) / np.log(rho)
            print(f"{spec.variant:7s} M={M:4d} step {d:.2e} contraction {rho:.7f} ~{its:.0f} iterations to 1e-10")


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__.split("\n")[0])
    parser.add_argument("--x", default="1.5,1.0,-1.0", help="inventories, comma separated")
    parser.add_argument("--lam", type=float, default=0.2)
    parser.add_argument("--beta", type=float, default=1.0)
    parser.add_argument("--T", type=float, default=1.0)
    args = parser.parse_args()
    p = ModelParams(args.lam, args.beta, args.T, tuple(float(v) for v in args.x.split(",")))
    oracle_rates(p)
    quadrature_rates(p)
    split_rates(p)
    limit_sweeps(p)
    damping(p)


if __name__ == "__main__":
    main()
