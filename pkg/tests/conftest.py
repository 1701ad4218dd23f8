from __future__ import annotations

import numpy as np
import pytest
from hypothesis import strategies as st
from scipy.linalg import expm

from transient_nash.model import ModelParams

# Reference market used across the suite.
LAM, BETA, T = 0.2, 1.0, 1.0


@pytest.fixture
def fig_params():
    return ModelParams(LAM, BETA, T, (1.0, 0.0, -1.0))


@pytest.fixture
def mixed_params():
    """Nonzero mean and nonzero deviations for every trader."""
    return ModelParams(LAM, BETA, T, (1.5, 1.0, -1.0))


def inventories(n_min=2, n_max=5):
    return st.integers(n_min, n_max).flatmap(
        lambda n: st.lists(st.floats(-3, 3, allow_nan=False), min_size=n, max_size=n))


def market():
    return st.tuples(st.floats(0.05, 1.0), st.floats(0.2, 3.0), st.floats(0.5, 2.0))


def bvp_solution(params: ModelParams, eps: float, phi: float | None):
    """Solve the first-order system of the smoothed game by a matrix exponential.

    State is ``(I, Y_1..Y_N, v_1..v_N, X_1..X_N)`` with
    ``I' = -beta I + lam sum v``, ``Y_i' = beta Y_i - lam v_i``,
    ``eps v_i' = beta I - beta Y_i - lam sum_{j != i} v_j`` and ``X_i' = v_i``.
    Boundary data: ``I_0 = 0``, ``X_0 = x``, ``Y_T = 0`` and either
    ``eps v_T + I_T + phi X_T = 0`` (penalty) or ``X_T = 0`` (``phi=None``).
    Returns a function ``t -> state``.
    """
    lam, beta, horizon = params.lam, params.beta, params.T
    x = params.x
    N = len(x)
    n = 1 + 3 * N
    A = np.zeros((n, n))
    A[0, 0] = -beta
    A[0, 1 + N:1 + 2 * N] = lam
    for i in range(N):
        A[1 + i, 1 + i] = beta
        A[1 + i, 1 + N + i] = -lam
        A[1 + N + i, 0] = beta / eps
        A[1 + N + i, 1 + i] = -beta / eps
        for j in range(N):
            if j != i:
                A[1 + N + i, 1 + N + j] = -lam / eps
        A[1 + 2 * N + i, 1 + N + i] = 1.0
    known = np.zeros(n)
    known[1 + 2 * N:] = x
    U = np.zeros((n, 2 * N))
    U[1:1 + 2 * N, :] = np.eye(2 * N)
    B = np.zeros((2 * N, n))
    for i in range(N):
        B[i, 1 + i] = 1.0
        if phi is None:
            B[N + i, 1 + 2 * N + i] = 1.0
        else:
            B[N + i, 1 + N + i] = eps
            B[N + i, 1 + 2 * N + i] = phi
            B[N + i, 0] = 1.0
    E = expm(A * horizon)
    z = np.linalg.solve(B @ E @ U, -B @ E @ known)
    s0 = known + U @ z
    return lambda t: expm(A * t) @ s0


# One line per acceptance criterion, printed after the run.
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
