import numpy as np
import pytest
from hypothesis import given, settings

from transient_nash.model import (CostA, CostAPrime, CostB, InvalidParameter, ModelParams,
                                  config_from_dict, config_to_dict, deviations, make_grid,
                                  mean_inventory, validate)

from conftest import inventories


def test_grid_examples():
    assert make_grid(1.0, 4).nodes.tolist() == [0, 0.25, 0.5, 0.75, 1]
    assert make_grid(2.0, 2).nodes.tolist() == [0, 1, 2]
    with pytest.raises(InvalidParameter) as err:
        make_grid(1.0, 1)
    assert err.value.field == "n_steps"


def test_grid_endpoints_exact():
    g = make_grid(0.7, 3000)
    t = g.nodes
    assert t[0] == 0.0 and t[-1] == 0.7
    assert np.all(np.diff(t) > 0)
    assert g.dt == 0.7 / 3000


@pytest.mark.parametrize("kwargs, field", [
    (dict(lam=0.0), "lambda"), (dict(beta=-1.0), "beta"), (dict(T=float("nan")), "T"),
    (dict(x=(1.0,)), "N"), (dict(x=(1.0, float("inf"))), "x"),
])
def test_invalid_params(kwargs, field):
    base = dict(lam=0.2, beta=1.0, T=1.0, x=(1.0, 2.0))
    base.update(kwargs)
    with pytest.raises(InvalidParameter) as err:
        validate(ModelParams(base["lam"], base["beta"], base["T"], base["x"]))
    assert err.value.field == field


@pytest.mark.parametrize("spec, field", [
    (CostA(0.0, 1.0), "eps"), (CostA(0.1, -1.0), "phi"), (CostAPrime(-0.1), "eps"),
    (CostB(-1.0, 0.1), "theta0"), (CostB(0.1, -0.1), "thetaT"),
])
def test_invalid_specs(spec, field):
    with pytest.raises(InvalidParameter) as err:
        validate(ModelParams(0.2, 1.0, 1.0, (1.0, 2.0)), spec)
    assert err.value.field == field


def test_zero_thetas_are_valid():
    validate(ModelParams(0.2, 1.0, 1.0, (0.0, 0.0)), CostB(0.0, 0.0))


@settings(derandomize=True, max_examples=50)
@given(inventories())
def test_deviations_sum_to_zero(x):
    p = ModelParams(0.2, 1.0, 1.0, tuple(x))
    d = deviations(p)
    assert abs(d.sum()) <= len(x) * np.spacing(max(1.0, np.max(np.abs(p.x))))
    assert mean_inventory(p) == pytest.approx(np.mean(x))


@settings(derandomize=True, max_examples=30)
@given(inventories())
def test_validate_idempotent(x):
    p, s = ModelParams(0.2, 1.0, 1.0, tuple(x)), CostA(0.1, 2.0)
    once = validate(p, s)
    assert validate(*once) == once == (p, s)


def test_config_round_trip():
    cfg = {"lambda": 0.2, "beta": 1.0, "T": 1.0, "N": 3, "x": [1.0, 0.0, -1.0],
           "cost": {"variant": "Aprime", "eps": 0.05}}
    params, spec = config_from_dict(cfg)
    assert spec == CostAPrime(0.05)
    assert config_to_dict(params, spec) == cfg


def test_config_errors():
    with pytest.raises(InvalidParameter):
        config_from_dict({"lambda": 0.2, "beta": 1.0, "T": 1.0, "N": 2, "x": [1.0, 2.0, 3.0]})
    with pytest.raises(InvalidParameter):
        config_from_dict({"lambda": 0.2, "beta": 1.0, "T": 1.0, "x": [1.0, 2.0],
                          "cost": {"variant": "C"}})
    with pytest.raises(InvalidParameter) as err:
        config_from_dict({"lambda": 0.2, "beta": 1.0, "T": 1.0, "x": [1.0, 2.0],
                          "cost": {"variant": "A", "eps": 0.1}})
    assert err.value.field == "phi"
