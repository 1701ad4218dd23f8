import numpy as np
import pytest

from transient_nash.costs import cost_closed_form
from transient_nash.limits import eps_sweep, instantaneous_cost_split, phi_sweep
from transient_nash.model import CostAPrime, InvalidParameter

PHIS = [1.0, 10.0, 1e2, 1e3, 1e4]
EPSS = [0.1, 0.03, 0.005, 1e-3, 1e-4]


def test_phi_sweep_decreases(fig_params):
    rep = phi_sweep(fig_params, 0.05, PHIS, grid_M=500)
    assert rep.strictly_decreasing and rep.flagged_steps == []
    assert rep.sup_distances[-1] <= 1e-3 * rep.sup_distances[0]
    gaps = rep.total_gaps_relative
    # the first gap sits near a sign change of the cost difference, so check the 1/phi tail
    assert np.all(np.diff(gaps[1:]) < 0)
    assert gaps[-1] / gaps[1:-1] == pytest.approx(np.array([1e-3, 1e-2, 1e-1]), rel=0.2)
    assert np.all(rep.h1_distances >= rep.sup_distances)


def test_phi_sweep_rejects_unsorted(fig_params):
    with pytest.raises(InvalidParameter):
        phi_sweep(fig_params, 0.05, [10.0, 1.0])


def test_eps_sweep_decreases(mixed_params):
    rep = eps_sweep(mixed_params, EPSS, grid_M=500)
    assert rep.window == (0.1, 0.9)
    assert rep.strictly_decreasing
    assert np.all(np.diff(rep.total_gaps_relative) < 0)
    assert rep.total_gaps_relative[-1] < 0.02
    assert len(rep.splits) == len(EPSS)


def test_eps_sweep_rows_have_split_columns(mixed_params):
    rows = eps_sweep(mixed_params, [0.1, 0.01], grid_M=100).rows()
    assert {"sweep_value", "sup_distance", "cost_gap_total", "head_1", "tail_3",
            "target_head_2", "target_tail_1"} <= set(rows[0])


@pytest.mark.parametrize("delta", [0.0, 0.6])
def test_eps_sweep_rejects_bad_window(mixed_params, delta):
    with pytest.raises(InvalidParameter):
        eps_sweep(mixed_params, [0.1, 0.01], delta=delta)


def test_split_errors_shrink_linearly(mixed_params):
    errs = []
    for eps in (1e-2, 1e-3, 1e-4):
        head, tail = instantaneous_cost_split(mixed_params, eps, 0.1).relative_errors()
        errs.append(max(head.max(), tail.max()))
    rates = np.log10(np.array(errs[:-1]) / np.array(errs[1:]))
    assert np.all(rates > 0.8), rates
    assert errs[-1] < 0.05


def test_split_sums_to_instantaneous_cost(mixed_params):
    s = instantaneous_cost_split(mixed_params, 1e-3, 0.2)
    total = cost_closed_form(mixed_params, CostAPrime(1e-3)).smoothing
    assert s.head + s.tail == pytest.approx(2 * total, rel=1e-10)


def test_zero_mean_has_no_head_target(fig_params):
    s = instantaneous_cost_split(fig_params, 1e-4, 0.1)
    assert np.all(s.target_head == 0)
    head, _ = s.relative_errors(floor=1.0)
    assert np.all(head < 1e-3)


def test_split_rejects_delta(fig_params):
    with pytest.raises(InvalidParameter):
        instantaneous_cost_split(fig_params, 1e-3, 1.5)
