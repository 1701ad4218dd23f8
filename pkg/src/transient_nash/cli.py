"""Command-line front end.

    transient-nash solve --input cfg.json [--output out.csv] [--format csv|json] [--grid M]
    transient-nash cost|verify|sweep-phi|sweep-eps --input cfg.json ...
    transient-nash anarchy|predation [--input cfg.json] [--betas ...] [--ns ...]
    transient-nash figures --output DIR

Exit codes: 0 success, 2 configuration error, 3 no equilibrium, 4 verification failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import analytics
from .costs import GridTooCoarse, cost_closed_form
from .equilibria import (DEFAULT_TOL_THETA, NoEquilibrium, NoEquilibriumError, good_thetas, sample,
                         solve)
from .limits import eps_sweep, phi_sweep
from .model import (CostA, CostAPrime, CostB, InvalidParameter, ModelParams, load_config,
                    make_grid)
from .oracle import (DampedBestResponse, NotConverged, build_discrete_game, compare_with_oracle,
                     ode_residual_A, ode_residual_B, solve_discrete_equilibrium)

COMMANDS = ("solve", "cost", "verify", "sweep-phi", "sweep-eps", "anarchy", "predation", "figures")
EXIT_OK, EXIT_CONFIG, EXIT_NO_EQ, EXIT_VERIFY = 0, 2, 3, 4

FIG1 = dict(lam=0.2, beta=1.0, T=1.0, x=(1.0, 0.0, -1.0), eps=0.05, phis=(1.0, 2.0, 5.0, np.inf))
FIG2 = dict(lam=0.2, beta=1.0, T=1.0, x=(1.0, 0.0, -1.0), epss=(0.1, 0.03, 0.005, 0.0))
FIG_BETAS = tuple(float(b) for b in np.logspace(-2, 2, 81))
FIG_NS = (2, 3, 5, 10, 50)
FIG4_BETAS = (0.1, 0.5, 1.0, 2.0, 10.0)


@dataclass(frozen=True)
class RunConfig:
    command: str
    input: str | None = None
    output: str | None = None
    format: str = "csv"
    grid_M: int = 200
    seed: int = 0
    tol_theta: float = DEFAULT_TOL_THETA
    tol_resid: float = 1e-8
    values: tuple[float, ...] | None = None
    delta: float | None = None
    betas: tuple[float, ...] | None = None
    ns: tuple[float, ...] | None = None
    probe_starts: int = 0


class ConfigError(Exception):
    pass


# ---------------------------------------------------------------------------
# formatting


def _fmt(value) -> str:
    if isinstance(value, str):
        return value
    if isinstance(value, (int, np.integer)) and not isinstance(value, bool):
        return str(int(value))
    return repr(float(value))


def to_csv(rows: list[dict], columns: list[str] | None = None) -> str:
    if columns is None:
        columns = list(rows[0].keys()) if rows else []
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([_fmt(row.get(c, "")) for c in columns])
    return buf.getvalue()


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple, np.ndarray)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        return float(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def to_json(obj) -> str:
    return json.dumps(_jsonable(obj), indent=2, allow_nan=False) + "\n"


def _emit(text: str, output: str | None) -> None:
    if output is None or output == "-":
        sys.stdout.write(text)
    else:
        Path(output).write_text(text)


# ---------------------------------------------------------------------------
# commands


def _load(cfg: RunConfig, need_cost: bool = True):
    if not cfg.input:
        raise ConfigError("--input is required for this command")
    try:
        params, spec = load_config(cfg.input)
    except FileNotFoundError:
        raise ConfigError(f"input file not found: {cfg.input}") from None
    if need_cost and spec is None:
        raise ConfigError("config needs a 'cost' section for this command")
    return params, spec


def _check_grid(cfg: RunConfig) -> None:
    if cfg.grid_M < 8:
        raise ConfigError(f"--grid must be at least 8, got {cfg.grid_M}")


def _solution_payload(params, spec, sol, grid) -> dict:
    t = grid.nodes
    X = sample(sol, grid)
    I = sol.impact(t)
    payload = {"variant": sol.variant, "t": t, "X": X, "I": I,
               "terminal_inventory": sol.terminal_inventory}
    if isinstance(spec, CostB):
        payload["pre_trade"] = params.x
        payload["jumps"] = {"a": sol.initial_jumps, "b": sol.terminal_jumps,
                            "dI0": sol.impact.jump_at_0}
    return payload


def cmd_solve(cfg: RunConfig) -> int:
    _check_grid(cfg)
    params, spec = _load(cfg)
    sol = solve(params, spec, tol_theta=cfg.tol_theta)
    if isinstance(sol, NoEquilibrium):
        raise NoEquilibriumError(sol)
    grid = make_grid(params.T, cfg.grid_M)
    payload = _solution_payload(params, spec, sol, grid)
    if cfg.format == "json":
        _emit(to_json(payload), cfg.output)
        return EXIT_OK
    N = params.n_traders
    columns = ["t", *[f"X_{i + 1}" for i in range(N)], "I"]
    rows = []
    if isinstance(spec, CostB):
        rows.append({"t": "0-", **{f"X_{i + 1}": params.x[i] for i in range(N)}, "I": 0.0})
    X, I = payload["X"], payload["I"]
    for k, tk in enumerate(payload["t"]):
        rows.append({"t": tk, **{f"X_{i + 1}": X[i, k] for i in range(N)}, "I": I[k]})
    _emit(to_csv(rows, columns), cfg.output)
    if isinstance(spec, CostB):
        sidecar = to_json(payload["jumps"])
        if cfg.output and cfg.output != "-":
            Path(cfg.output + ".jumps.json").write_text(sidecar)
        else:
            sys.stderr.write(sidecar)
    return EXIT_OK


def cmd_cost(cfg: RunConfig) -> int:
    params, spec = _load(cfg)
    cost = cost_closed_form(params, spec, tol_theta=cfg.tol_theta)
    rows = cost.rows()
    if cfg.format == "json":
        _emit(to_json({"variant": spec.variant, "rows": rows}), cfg.output)
    else:
        _emit(to_csv(rows, ["trader", "impact", "smoothing", "terminal", "total"]), cfg.output)
    return EXIT_OK


def oracle_tolerances(params: ModelParams, M: int) -> tuple[float, float]:
    """Sup-distance and relative cost-gap limits for the discrete oracle at ``M`` steps.

    Pinned at ``2e-3`` and ``1e-3`` for ``M = 1000`` and scaled with the
    measured second-order convergence of the discretisation.
    """
    scale = (1000.0 / M) ** 2
    return 2e-3 * max(1.0, float(np.max(np.abs(params.x)))) * scale, 1e-3 * scale


def uniqueness_probe(params, spec, M: int, starts: int, seed: int, tol: float = 1e-12) -> float:
    """Largest distance between damped best-response limits from random starts."""
    game = build_discrete_game(params, spec, make_grid(params.T, M))
    ref = solve_discrete_equilibrium(game).profile
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(starts):
        init = rng.normal(size=ref.shape)
        eq = solve_discrete_equilibrium(game, DampedBestResponse(None, init), tol=tol, max_iter=20000)
        worst = max(worst, float(np.max(np.abs(eq.profile - ref))))
    return worst


def cmd_verify(cfg: RunConfig) -> int:
    _check_grid(cfg)
    params, spec = _load(cfg)
    sol = solve(params, spec, tol_theta=cfg.tol_theta)
    if isinstance(sol, NoEquilibrium):
        raise NoEquilibriumError(sol)
    report: dict = {"variant": spec.variant}
    checks: dict = {}
    resid_grid = make_grid(params.T, 2000)
    if isinstance(spec, CostA):
        res = ode_residual_A(params, spec.eps, spec.phi, sol, resid_grid)
    elif isinstance(spec, CostB):
        res = ode_residual_B(params, spec.theta0, spec.thetaT, sol, resid_grid)
    else:
        res = None
    if res is not None:
        report["residual"] = res.to_dict()
        checks["residual"] = res.worst <= cfg.tol_resid
    if not isinstance(spec, CostA):
        exact = float(np.max(np.abs(sol.inventory(params.T))))
        report["terminal_inventory_max"] = exact
        checks["liquidation"] = exact == 0.0
    comp = compare_with_oracle(params, spec, cfg.grid_M)
    tol_sup, tol_cost = oracle_tolerances(params, cfg.grid_M)
    oracle = comp.to_dict()
    oracle.pop("seconds")
    report["oracle"] = oracle
    report["tolerances"] = {"residual": cfg.tol_resid, "sup_distance": tol_sup, "cost_gap": tol_cost}
    checks["oracle_sup"] = comp.sup_distance <= tol_sup
    checks["oracle_cost"] = comp.cost_gap <= tol_cost
    checks["br_gap"] = comp.br_gap <= 1e-10 * max(1.0, float(np.max(np.abs(params.x)))) ** 2
    if cfg.probe_starts > 0 and not isinstance(spec, CostB):
        try:
            spread = uniqueness_probe(params, spec, min(cfg.grid_M, 200), cfg.probe_starts, cfg.seed)
            report["uniqueness_probe"] = {"starts": cfg.probe_starts, "seed": cfg.seed,
                                          "max_spread": spread}
            checks["uniqueness"] = spread <= 1e-8
        except NotConverged as exc:
            report["uniqueness_probe"] = {"error": str(exc)}
            checks["uniqueness"] = False
    report["checks"] = checks
    report["passed"] = all(checks.values())
    _emit(to_json(report), cfg.output)
    return EXIT_OK if report["passed"] else EXIT_VERIFY


def _report_output(cfg: RunConfig, report) -> None:
    rows = report.rows()
    if cfg.format == "json":
        _emit(to_json({"kind": report.kind, "window": report.window,
                       "strictly_decreasing": report.strictly_decreasing,
                       "flagged_steps": report.flagged_steps,
                       "total_gaps_relative": report.total_gaps_relative, "rows": rows}), cfg.output)
    else:
        _emit(to_csv(rows), cfg.output)


def cmd_sweep_phi(cfg: RunConfig) -> int:
    params, spec = _load(cfg)
    if isinstance(spec, CostB):
        raise ConfigError("sweep-phi needs a cost section with eps (variant A or Aprime)")
    values = cfg.values or (1.0, 10.0, 100.0, 1000.0, 10000.0)
    _report_output(cfg, phi_sweep(params, spec.eps, values, grid_M=max(cfg.grid_M, 8)))
    return EXIT_OK


def cmd_sweep_eps(cfg: RunConfig) -> int:
    params, _ = _load(cfg, need_cost=False)
    values = cfg.values or (0.1, 0.03, 0.005, 1e-3, 1e-4)
    _report_output(cfg, eps_sweep(params, values, cfg.delta, grid_M=max(cfg.grid_M, 8)))
    return EXIT_OK


def _optional_params(cfg: RunConfig) -> ModelParams | None:
    return _load(cfg, need_cost=False)[0] if cfg.input else None


def _count(n: float):
    return int(n) if float(n).is_integer() else n


def anarchy_rows(betas, ns, T: float) -> list[dict]:
    ns = [_count(n) for n in ns]
    return [{"beta": b, "N": n, "T": T, "coa": analytics.cost_of_anarchy(b, T, n),
             "coa_limit": analytics.coa_limit_n(b, T)} for n in ns for b in betas]


def predation_rows(betas, ns, T: float) -> list[dict]:
    ns = [_count(n) for n in ns]
    rows = []
    for n in ns:
        for b in betas:
            cop, friction, share = analytics.predation_terms(b, T, n)
            rows.append({"beta": b, "N": n, "T": T, "cop": cop, "friction_term": friction,
                         "coa_share": share})
    return rows


def cmd_anarchy(cfg: RunConfig) -> int:
    params = _optional_params(cfg)
    T = params.T if params else 1.0
    rows = anarchy_rows(cfg.betas or FIG_BETAS, cfg.ns or FIG_NS, T)
    if cfg.format == "json":
        out = {"curves": rows}
        if params is not None:
            rep = analytics.anarchy_report(params)
            out["report"] = {"pic_n": rep.pic_n, "pic_1": rep.pic_1, "coa": rep.coa}
        _emit(to_json(out), cfg.output)
    else:
        _emit(to_csv(rows), cfg.output)
    return EXIT_OK


def cmd_predation(cfg: RunConfig) -> int:
    params = _optional_params(cfg)
    T = params.T if params else 1.0
    rows = predation_rows(cfg.betas or FIG_BETAS, cfg.ns or FIG_NS, T)
    if cfg.format == "json":
        out = {"curves": rows}
        if params is not None:
            rep = analytics.cop(params)
            out["report"] = {"lic_n": rep.lic_n, "lic_1": rep.lic_1, "cop": rep.cop,
                             "friction_term": rep.friction_term, "coa_share": rep.coa_share}
        _emit(to_json(out), cfg.output)
    else:
        _emit(to_csv(rows), cfg.output)
    return EXIT_OK


def _strategy_rows(label: str, value: float, sol, t: np.ndarray) -> list[dict]:
    X, I = sol.inventory(t), sol.impact(t)
    if sol.variant == "B":
        X[:, -1] = 0.0
    return [{"panel_param": label, "value": value, "t": tk,
             **{f"X_{i + 1}": X[i, k] for i in range(X.shape[0])}, "I": I[k]}
            for k, tk in enumerate(t)]


def _cost_rows(label: str, value: float, cost) -> list[dict]:
    return [{"panel_param": label, "value": value, **row} for row in cost.rows()]


def figure_datasets(grid_M: int = 200) -> dict[str, list[dict]]:
    """The four figure datasets keyed by output file stem."""
    out: dict[str, list[dict]] = {}
    p1 = ModelParams(FIG1["lam"], FIG1["beta"], FIG1["T"], FIG1["x"])
    t = make_grid(p1.T, grid_M).nodes
    strat, costs = [], []
    for phi in FIG1["phis"]:
        spec = CostAPrime(FIG1["eps"]) if np.isinf(phi) else CostA(FIG1["eps"], phi)
        label = "phi"
        value = float("inf") if np.isinf(phi) else phi
        strat += _strategy_rows(label, value, solve(p1, spec), t)
        costs += _cost_rows(label, value, cost_closed_form(p1, spec))
    out["fig1_strategies"], out["fig1_costs"] = strat, costs
    p2 = ModelParams(FIG2["lam"], FIG2["beta"], FIG2["T"], FIG2["x"])
    strat, costs = [], []
    for eps in FIG2["epss"]:
        spec = CostB(*good_thetas(p2)) if eps == 0 else CostAPrime(eps)
        strat += _strategy_rows("eps", eps, solve(p2, spec), t)
        costs += _cost_rows("eps", eps, cost_closed_form(p2, spec))
    out["fig2_strategies"], out["fig2_costs"] = strat, costs
    out["fig3_coa_vs_beta"] = anarchy_rows(FIG_BETAS, FIG_NS, 1.0)
    out["fig4_cop_vs_beta"] = predation_rows(FIG_BETAS, FIG_NS, 1.0)
    out["fig4_cop_vs_n"] = predation_rows(FIG4_BETAS, tuple(range(2, 51)), 1.0)
    return out


def _inf_safe(rows: list[dict]) -> list[dict]:
    return [{k: ("inf" if isinstance(v, float) and np.isinf(v) else v) for k, v in r.items()}
            for r in rows]


def cmd_figures(cfg: RunConfig) -> int:
    _check_grid(cfg)
    if not cfg.output or cfg.output == "-":
        raise ConfigError("figures needs --output DIR")
    outdir = Path(cfg.output)
    outdir.mkdir(parents=True, exist_ok=True)
    for stem, rows in figure_datasets(cfg.grid_M).items():
        rows = _inf_safe(rows)
        if cfg.format == "json":
            (outdir / f"{stem}.json").write_text(to_json(rows))
        else:
            (outdir / f"{stem}.csv").write_text(to_csv(rows))
    return EXIT_OK


HANDLERS = {"solve": cmd_solve, "cost": cmd_cost, "verify": cmd_verify,
            "sweep-phi": cmd_sweep_phi, "sweep-eps": cmd_sweep_eps, "anarchy": cmd_anarchy,
            "predation": cmd_predation, "figures": cmd_figures}


def run(cfg: RunConfig) -> int:
    if cfg.command not in HANDLERS:
        sys.stderr.write(f"unknown command {cfg.command!r}\n")
        return EXIT_CONFIG
    if cfg.format not in ("csv", "json"):
        sys.stderr.write(f"unknown format {cfg.format!r}\n")
        return EXIT_CONFIG
    try:
        return HANDLERS[cfg.command](cfg)
    except NoEquilibriumError as exc:
        res = exc.result
        sys.stderr.write(to_json({"error": "NoEquilibrium", "reason": res.reason,
                                  "witness": res.witness}))
        return EXIT_NO_EQ
    except (ConfigError, InvalidParameter, GridTooCoarse) as exc:
        sys.stderr.write(f"configuration error: {exc}\n")
        return EXIT_CONFIG


def _floats(text: str) -> tuple[float, ...]:
    try:
        return tuple(float(v) for v in text.split(",") if v.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="transient-nash", description=__doc__.split("\n")[0])
    parser.add_argument("command", choices=COMMANDS)
    parser.add_argument("--input", help="JSON model config")
    parser.add_argument("--output", help="output path (default stdout; a directory for figures)")
    parser.add_argument("--format", default="csv", choices=("csv", "json"))
    parser.add_argument("--grid", type=int, default=None,
                        help="grid steps M (default 200; 1000 for verify)")
    parser.add_argument("--tol-theta", type=float, default=DEFAULT_TOL_THETA)
    parser.add_argument("--tol-resid", type=float, default=1e-8)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--values", type=_floats, help="sweep values, comma separated")
    parser.add_argument("--delta", type=float, help="boundary window for sweep-eps")
    parser.add_argument("--betas", type=_floats, help="beta grid for anarchy/predation")
    parser.add_argument("--ns", type=_floats, help="population sizes for anarchy/predation")
    parser.add_argument("--probe-starts", type=int, default=0,
                        help="verify: random starts for the best-response uniqueness probe")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    grid = args.grid if args.grid is not None else (1000 if args.command == "verify" else 200)
    cfg = RunConfig(command=args.command, input=args.input, output=args.output,
                    format=args.format, grid_M=grid, seed=args.seed, tol_theta=args.tol_theta,
                    tol_resid=args.tol_resid, values=args.values, delta=args.delta,
                    betas=args.betas, ns=args.ns, probe_starts=args.probe_starts)
    return run(cfg)


if __name__ == "__main__":
    sys.exit(main())
