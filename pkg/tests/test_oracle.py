import math

import numpy as np
import pytest

from optonr.model import Direction, DriveScenario
from optonr.oracle import (
    MeanFieldState,
    default_dt,
    derivative,
    derivative_terms,
    relative_distance,
    settle,
    trajectory,
)
from optonr.steadystate import solve
from tests.helpers import linear_two_mode


def test_undriven_vacuum_is_stationary(fig2b):
    d = derivative(MeanFieldState(), fig2b, DriveScenario(Direction.FORWARD, 0.0))
    assert np.all(d == 0)


@pytest.mark.parametrize("direction", list(Direction))
def test_steady_states_are_fixed_points_of_the_flow(fig2c, direction):
    sc = DriveScenario(direction, 20e-3)
    for sol in solve(fig2c, sc):
        st = MeanFieldState.from_solution(sol)
        d = np.abs(derivative(st, fig2c, sc))
        assert np.all(d <= 1e-8 * derivative_terms(st, fig2c, sc))


def test_no_coupling_leaves_mechanics_alone(fig2b):
    p = fig2b.replace(g=0.0)
    sc = DriveScenario(Direction.FORWARD, 15e-3)
    d = derivative(MeanFieldState(1e8 + 2e8j, 3e7j, 0.0, 0.0), p, sc)
    assert d[2] == 0 and d[3] == 0


def test_mechanics_alone_is_a_damped_oscillator(fig2b):
    # q'' + gamma_m q' + omega_m^2 q = 0 from q(0) = 1, p(0) = 0
    p = fig2b
    sc = DriveScenario(Direction.FORWARD, 0.0)
    T = 2 * math.pi / p.omega_m
    # global RK4 error goes as dt^4; a tenth of the default step brings it below 1e-7
    dt = default_dt(p) / 10
    times, trace, _ = trajectory(p, sc, MeanFieldState(q=1.0), horizon=5 * T, dt=dt, samples=500)
    wd = math.sqrt(p.omega_m**2 - p.gamma_m**2 / 4)
    q = np.exp(-p.gamma_m * times / 2) * (np.cos(wd * times) + p.gamma_m / (2 * wd) * np.sin(wd * times))
    assert np.max(np.abs(trace[:, 2].real - q)) < 1e-6
    assert np.all(trace[:, :2] == 0)


def test_start_at_steady_state_converges_in_one_check(fig2b):
    sc = DriveScenario(Direction.FORWARD, 15e-3)
    sol = solve(fig2b, sc)[-1]
    res = settle(fig2b, sc, MeanFieldState.from_solution(sol))
    assert res.converged and not res.diverged
    assert relative_distance(res.state, sol) < 1e-9
    # the first stroboscopic check fires after one mechanical period
    assert res.state.t <= 2.5 * 2 * math.pi / fig2b.omega_m


@pytest.mark.parametrize("direction", list(Direction))
def test_from_vacuum_reaches_unique_root(fig2a, direction):
    sc = DriveScenario(direction, 2e-3)
    (sol,) = solve(fig2a, sc)
    res = settle(fig2a, sc)
    assert res.converged
    assert relative_distance(res.state, sol) < 1e-6


def test_perturbed_middle_branch_departs(fig2c):
    sc = DriveScenario(Direction.FORWARD, 20e-3)
    lower, middle, upper = solve(fig2c, sc)
    start = MeanFieldState(middle.alpha1 * (1 + 1e-4), middle.alpha2, middle.qbar, 0.0)
    res = settle(fig2c, sc, start)
    assert relative_distance(res.state, middle) > 1e-2
    if res.converged:
        assert min(relative_distance(res.state, lower), relative_distance(res.state, upper)) < 1e-6


def test_step_halving_gives_same_settled_state(fig2b):
    sc = DriveScenario(Direction.BACKWARD, 15e-3)
    sol = solve(fig2b, sc)[0]
    start = MeanFieldState(sol.alpha1 * 1.01, sol.alpha2, sol.qbar, 0.0)
    dt = default_dt(fig2b)
    a = settle(fig2b, sc, start, dt=dt)
    b = settle(fig2b, sc, start, dt=dt / 2)
    assert a.converged and b.converged
    ref = max(abs(a.state.alpha1), abs(a.state.alpha2))
    assert abs(a.state.alpha1 - b.state.alpha1) < 1e-8 * ref
    assert abs(a.state.alpha2 - b.state.alpha2) < 1e-8 * ref


@pytest.mark.parametrize("direction", list(Direction))
def test_linear_limit_matches_two_mode_solve(fig2b, direction):
    p = fig2b.replace(g=0.0)
    sc = DriveScenario(direction, 5e-3)
    a1, a2 = linear_two_mode(p, direction, sc.s_in(p))
    res = settle(p, sc)
    assert res.converged
    scale = max(abs(a1), abs(a2))
    assert abs(res.state.alpha1 - a1) < 1e-9 * scale
    assert abs(res.state.alpha2 - a2) < 1e-9 * scale


def test_unstable_high_power_state_is_not_a_settled_point(fig2c):
    # above about 44 mW from a1 the single root is unstable: the oracle must not converge onto it
    sc = DriveScenario(Direction.FORWARD, 46e-3)
    (sol,) = solve(fig2c, sc)
    start = MeanFieldState(sol.alpha1 * (1 + 1e-4), sol.alpha2, sol.qbar, 0.0)
    res = settle(fig2c, sc, start)
    assert not (res.converged and relative_distance(res.state, sol) < 1e-6)


def test_trajectory_shapes(fig2b):
    sc = DriveScenario(Direction.FORWARD, 1e-3)
    times, trace, res = trajectory(fig2b, sc, horizon=1e-9, samples=100)
    assert trace.shape == (len(times), 4)
    assert np.all(np.diff(times) > 0)
    assert not res.diverged


def test_nonpositive_horizon_rejected(fig2b):
    with pytest.raises(ValueError):
        settle(fig2b, DriveScenario(Direction.FORWARD, 1e-3), horizon=0.0)
