import math
from dataclasses import replace

import numpy as np
import pytest
from hypothesis import assume, given
from hypothesis import strategies as st

from optonr.model import HBAR, Direction, DriveScenario, EffectiveModel, SystemParams, UncoupledPathError, effective_model
from optonr.steadystate import (
    Branch,
    cubic_lhs,
    fold_drives,
    fold_powers,
    is_bistable_capable,
    recover_fields,
    scaled_residual,
    solve,
    solve_cubic,
    steady_state_residual,
    turning_points,
)
from tests.helpers import linear_two_mode, params_ghz, sign_change_roots
from tests.strategies import system_params


def _s(params, p_in):
    return DriveScenario(Direction.FORWARD, p_in).s_in(params)


def test_linear_limit_single_root(fig2b):
    p = fig2b.replace(g=0.0)
    eff = effective_model(p, Direction.FORWARD)
    s = _s(p, 15e-3)
    roots = solve_cubic(eff, s)
    assert roots == [pytest.approx(abs(eff.eps_eff * s) ** 2 / (eff.Gamma**2 / 4 + eff.delta_bar**2), rel=1e-15)]


def test_undriven_single_zero_root(fig2b):
    assert solve_cubic(effective_model(fig2b, Direction.FORWARD), 0.0) == [0.0]


def test_negative_amplitude_rejected(fig2b):
    with pytest.raises(ValueError):
        solve_cubic(effective_model(fig2b, Direction.FORWARD), -1.0)


def test_fig2b_inside_window_three_roots(fig2b):
    eff = effective_model(fig2b, Direction.FORWARD)
    s = _s(fig2b, 12.5e-3)
    roots = solve_cubic(eff, s)
    brute = sign_change_roots(eff, s)
    assert len(roots) == 3 == len(brute)
    for r, b in zip(roots, brute):
        assert r == pytest.approx(b, rel=1e-4)


def test_fig2b_15mW_forward_is_past_the_window(fig2b):
    # 15 mW lies just above the forward bistable window (about 11.4 to 14.0 mW)
    eff = effective_model(fig2b, Direction.FORWARD)
    s = _s(fig2b, 15e-3)
    assert len(solve_cubic(eff, s)) == 1 == len(sign_change_roots(eff, s))
    lo, hi = fold_powers(eff, fig2b.omega_d)
    assert 11e-3 < lo < hi < 15e-3


def test_roots_satisfy_scaled_cubic(fig2c):
    for d in Direction:
        eff = effective_model(fig2c, d)
        for p_in in np.linspace(1e-3, 60e-3, 60):
            s = _s(fig2c, p_in)
            for x in solve_cubic(eff, s):
                y = eff.U_eff * x / eff.Gamma
                assert scaled_residual(y, eff, s) < 1e-10


def _eff(Gamma, delta_bar, U=-1.0):
    return EffectiveModel(Direction.BACKWARD, Gamma, delta_bar, U, U, 1.0 + 0j)


def test_turning_points_degenerate_at_threshold():
    G = 2.0
    D = math.sqrt(3) * G / 2
    eff = _eff(G, D, U=-0.5)
    lo, hi = turning_points(eff)
    assert lo == pytest.approx(hi, rel=1e-6)
    assert lo == pytest.approx(-2 * D / (3 * eff.U_eff), rel=1e-6)


def test_turning_points_absent_below_threshold():
    assert turning_points(_eff(2.0, 0.99 * math.sqrt(3))) is None
    assert turning_points(_eff(2.0, -5.0)) is None


def test_turning_points_need_nonlinearity():
    with pytest.raises(ValueError):
        turning_points(_eff(1.0, 3.0, U=0.0))


def test_turning_points_are_derivative_zeros(fig2b):
    eff = effective_model(fig2b, Direction.FORWARD)
    for x in turning_points(eff):
        deriv = (eff.Gamma**2 / 4 + eff.delta_bar**2) + 4 * eff.delta_bar * eff.U_eff * x + 3 * eff.U_eff**2 * x**2
        assert abs(deriv) < 1e-9 * (eff.Gamma**2 / 4 + eff.delta_bar**2)


def test_turning_points_bracket_three_root_region(fig2b):
    for d in Direction:
        eff = effective_model(fig2b, d)
        lo, hi = fold_drives(eff)
        for p_in in np.linspace(0.5e-3, 40e-3, 400):
            s = _s(fig2b, p_in)
            drive = abs(eff.eps_eff * s) ** 2
            n = len(solve_cubic(eff, s))
            if lo * (1 + 1e-9) < drive < hi * (1 - 1e-9):
                assert n == 3
            elif drive < lo * (1 - 1e-9) or drive > hi * (1 + 1e-9):
                assert n == 1


def test_bistable_capable_fig2b(fig2b):
    eff = effective_model(fig2b, Direction.FORWARD)
    assert eff.delta_bar / eff.Gamma == pytest.approx(116 / 101, rel=1e-14)
    assert is_bistable_capable(eff)


def test_not_bistable_for_nonpositive_detuning():
    assert not is_bistable_capable(_eff(1.0, 0.0))
    assert not is_bistable_capable(_eff(1.0, -3.0))


def test_not_bistable_without_nonlinearity(fig2b):
    assert not is_bistable_capable(effective_model(fig2b.replace(g=0.0), Direction.FORWARD))


def test_recover_fields_undriven(fig2b):
    for d in Direction:
        sc = DriveScenario(d, 0.0)
        sol = recover_fields(0.0, effective_model(fig2b, d), fig2b, sc)
        assert sol.alpha1 == 0 and sol.alpha2 == 0 and sol.alpha_out == 0 and sol.qbar == 0


def test_recover_fields_forward_requires_coupling():
    p = params_ghz(J=0.0)
    eff = effective_model(p, Direction.BACKWARD)
    with pytest.raises(UncoupledPathError):
        recover_fields(1.0, eff, p, DriveScenario(Direction.FORWARD, 1e-3))


@pytest.mark.parametrize("direction", list(Direction))
def test_linear_fields_match_two_mode_solve(fig2a, direction):
    p = fig2a.replace(g=0.0)
    sc = DriveScenario(direction, 5e-3)
    (sol,) = solve(p, sc)
    a1, a2 = linear_two_mode(p, direction, sc.s_in(p))
    assert sol.alpha1 == pytest.approx(a1, rel=1e-12)
    assert sol.alpha2 == pytest.approx(a2, rel=1e-12)
    assert sol.qbar == 0


def test_branch_labels(fig2c):
    sols = solve(fig2c, DriveScenario(Direction.FORWARD, 20e-3))
    assert [s.branch for s in sols] == [Branch.LOWER, Branch.MIDDLE, Branch.UPPER]
    (single,) = solve(fig2c, DriveScenario(Direction.BACKWARD, 20e-3))
    assert single.branch is Branch.UNIQUE


@st.composite
def drive_cases(draw):
    p = draw(system_params(J_min=0.5))
    assume(p.g > 0)
    d = draw(st.sampled_from(list(Direction)))
    eff = effective_model(p, d)
    window = fold_drives(eff) if is_bistable_capable(eff) else None
    if window is not None and draw(st.booleans()):
        u = draw(st.floats(0.02, 0.98))
        drive = window[0] + u * (window[1] - window[0])
    else:
        # drives spanning weak to strongly nonlinear
        scale = eff.Gamma**3 / abs(eff.U_eff)
        drive = scale * 10 ** draw(st.floats(-3, 2))
    s = math.sqrt(drive) / abs(eff.eps_eff)
    return p, d, eff, s


@given(drive_cases())
def test_root_count_matches_window(case):
    p, d, eff, s = case
    drive = abs(eff.eps_eff * s) ** 2
    roots = solve_cubic(eff, s)
    window = fold_drives(eff) if is_bistable_capable(eff) else None
    inside = window is not None and window[0] * (1 + 1e-7) < drive < window[1] * (1 - 1e-7)
    outside = window is None or drive < window[0] * (1 - 1e-7) or drive > window[1] * (1 + 1e-7)
    if inside:
        assert len(roots) == 3
    elif outside:
        assert len(roots) == 1
    brute = sign_change_roots(eff, s, n=20001)
    if inside or outside:
        assert len(brute) == len(roots)


@given(drive_cases())
def test_recovered_fields_close_the_full_equations(case):
    p, d, eff, s = case
    p_in = s**2 * HBAR * p.omega_d
    sc = DriveScenario(d, p_in)
    for x in solve_cubic(eff, sc.s_in(p)):
        y = eff.U_eff * x / eff.Gamma
        assert scaled_residual(y, eff, sc.s_in(p)) < 1e-10
        sol = recover_fields(x, eff, p, sc)
        assert sol.x == pytest.approx(x, rel=1e-9)
        assert sol.qbar <= 0
        assert sol.qbar == -p.g * abs(sol.alpha1) ** 2 / p.omega_m
        assert steady_state_residual(sol, p, sc) < 1e-8


def test_cubic_lhs_matches_definition(fig2b):
    eff = effective_model(fig2b, Direction.FORWARD)
    x = 3.2e16
    want = (eff.Gamma**2 / 4 + eff.delta_bar**2) * x + 2 * eff.delta_bar * eff.U_eff * x**2 + eff.U_eff**2 * x**3
    assert float(cubic_lhs(x, eff)) == pytest.approx(want, rel=1e-15)
