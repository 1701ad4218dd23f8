"""Parameter containers, validation, inventory statistics and time grids."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import NamedTuple, Union

import numpy as np


class InvalidParameter(ValueError):
    """Raised when an input violates a documented invariant."""

    def __init__(self, field: str, reason: str):
        super().__init__(f"{field}: {reason}")
        self.field = field
        self.reason = reason


@dataclass(frozen=True)
class ModelParams:
    """Market and population parameters.

    Attributes
    ----------
    lam : float
        Impact push per share (lambda), > 0.
    beta : float
        Resilience rate, > 0.
    T : float
        Trading horizon, > 0.
    inventories : tuple of float
        Initial holdings ``x^1..x^N``; ``N`` is the length.
    """

    lam: float
    beta: float
    T: float
    inventories: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "inventories", tuple(float(v) for v in self.inventories))

    @property
    def n_traders(self) -> int:
        return len(self.inventories)

    @property
    def x(self) -> np.ndarray:
        return np.array(self.inventories, dtype=float)

    def with_inventories(self, x) -> "ModelParams":
        return ModelParams(self.lam, self.beta, self.T, tuple(np.asarray(x, dtype=float).tolist()))


@dataclass(frozen=True)
class CostA:
    """Instantaneous cost weight ``eps`` plus terminal penalty ``(phi/2) X_T^2``."""

    eps: float
    phi: float
    variant: str = field(default="A", init=False)


@dataclass(frozen=True)
class CostAPrime:
    """Instantaneous cost weight ``eps`` with the hard liquidation constraint."""

    eps: float
    variant: str = field(default="Aprime", init=False)


@dataclass(frozen=True)
class CostB:
    """Block costs at the two endpoints with the hard liquidation constraint."""

    theta0: float
    thetaT: float
    variant: str = field(default="B", init=False)


CostSpec = Union[CostA, CostAPrime, CostB]


class ValidatedInputs(NamedTuple):
    params: ModelParams
    spec: CostSpec | None


def _positive(name: str, value) -> None:
    if not isinstance(value, (int, float, np.floating, np.integer)) or isinstance(value, bool):
        raise InvalidParameter(name, "must be a real number")
    if not math.isfinite(value) or value <= 0:
        raise InvalidParameter(name, f"must be finite and > 0, got {value!r}")


def _nonnegative(name: str, value) -> None:
    if not isinstance(value, (int, float, np.floating, np.integer)) or isinstance(value, bool):
        raise InvalidParameter(name, "must be a real number")
    if not math.isfinite(value) or value < 0:
        raise InvalidParameter(name, f"must be finite and >= 0, got {value!r}")


def validate(params: ModelParams, spec: CostSpec | None = None) -> ValidatedInputs:
    """Check every invariant and return the inputs unchanged.

    Raises :class:`InvalidParameter` naming the first offending field.
    """
    _positive("lambda", params.lam)
    _positive("beta", params.beta)
    _positive("T", params.T)
    if params.n_traders < 2:
        raise InvalidParameter("N", f"need at least 2 traders, got {params.n_traders}")
    if not all(math.isfinite(v) for v in params.inventories):
        raise InvalidParameter("x", "inventories must be finite")
    if isinstance(spec, CostA):
        _positive("eps", spec.eps)
        _positive("phi", spec.phi)
    elif isinstance(spec, CostAPrime):
        _positive("eps", spec.eps)
    elif isinstance(spec, CostB):
        _nonnegative("theta0", spec.theta0)
        _nonnegative("thetaT", spec.thetaT)
    elif spec is not None:
        raise InvalidParameter("cost", f"unknown cost specification {spec!r}")
    return ValidatedInputs(params, spec)


def mean_inventory(params: ModelParams) -> float:
    return float(np.mean(params.x))


def deviations(params: ModelParams) -> np.ndarray:
    """Return ``x - mean(x)``; the entries sum to zero up to rounding."""
    x = params.x
    return x - np.mean(x)


@dataclass(frozen=True)
class TimeGrid:
    """Uniform grid ``t_k = k T / M`` for ``k = 0..M``."""

    T: float
    n_steps: int

    @property
    def dt(self) -> float:
        return self.T / self.n_steps

    @property
    def nodes(self) -> np.ndarray:
        t = self.T * np.arange(self.n_steps + 1) / self.n_steps
        t[-1] = self.T
        return t

    @property
    def midpoints(self) -> np.ndarray:
        return self.T * (np.arange(self.n_steps) + 0.5) / self.n_steps


def make_grid(T: float, M: int) -> TimeGrid:
    _positive("T", T)
    if isinstance(M, bool) or not isinstance(M, (int, np.integer)) or M < 2:
        raise InvalidParameter("n_steps", f"need an integer M >= 2, got {M!r}")
    return TimeGrid(float(T), int(M))


def spec_from_dict(cost: dict) -> CostSpec:
    variant = cost.get("variant")
    try:
        if variant == "A":
            return CostA(float(cost["eps"]), float(cost["phi"]))
        if variant in ("Aprime", "APrime", "A'"):
            return CostAPrime(float(cost["eps"]))
        if variant == "B":
            return CostB(float(cost["theta0"]), float(cost["thetaT"]))
    except KeyError as exc:
        raise InvalidParameter(str(exc.args[0]), f"required for variant {variant}") from None
    except (TypeError, ValueError):
        raise InvalidParameter("cost", "cost fields must be numbers") from None
    raise InvalidParameter("cost.variant", f"expected A, Aprime or B, got {variant!r}")


def spec_to_dict(spec: CostSpec) -> dict:
    if isinstance(spec, CostA):
        return {"variant": "A", "eps": spec.eps, "phi": spec.phi}
    if isinstance(spec, CostAPrime):
        return {"variant": "Aprime", "eps": spec.eps}
    return {"variant": "B", "theta0": spec.theta0, "thetaT": spec.thetaT}


def config_from_dict(cfg: dict) -> ValidatedInputs:
    """Build and validate inputs from the JSON config layout.

    ``{"lambda", "beta", "T", "N", "x", "cost": {...}}``; ``cost`` is optional.
    """
    for key in ("lambda", "beta", "T", "x"):
        if key not in cfg:
            raise InvalidParameter(key, "missing from config")
    x = cfg["x"]
    if not isinstance(x, list):
        raise InvalidParameter("x", "must be a list of numbers")
    try:
        xs = tuple(float(v) for v in x)
    except (TypeError, ValueError):
        raise InvalidParameter("x", "must be a list of numbers") from None
    if "N" in cfg and cfg["N"] != len(xs):
        raise InvalidParameter("N", f"N={cfg['N']} but x has {len(xs)} entries")
    params = ModelParams(cfg["lambda"], cfg["beta"], cfg["T"], xs)
    spec = spec_from_dict(cfg["cost"]) if cfg.get("cost") is not None else None
    return validate(params, spec)


def config_to_dict(params: ModelParams, spec: CostSpec | None = None) -> dict:
    out = {"lambda": params.lam, "beta": params.beta, "T": params.T,
           "N": params.n_traders, "x": list(params.inventories)}
    if spec is not None:
        out["cost"] = spec_to_dict(spec)
    return out


def load_config(path: str | Path) -> ValidatedInputs:
    try:
        cfg = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise InvalidParameter("input", f"not valid JSON: {exc}") from None
    if not isinstance(cfg, dict):
        raise InvalidParameter("input", "config must be a JSON object")
    return config_from_dict(cfg)
