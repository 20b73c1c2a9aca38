"""Time-domain integration of the classical mean-field equations.

This is the brute-force check on the reduced cubic: integrate the full
three-mode dynamics with a fixed-step classical RK4 until the state stops
changing, or until it runs away.  Noise terms are dropped.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numba
import numpy as np

from .model import DriveScenario, SystemParams

STEPS_PER_FAST_PERIOD = 40
CONVERGENCE_TOL = 1e-10
BLOWUP_FACTOR = 1e6

_RUNNING, _CONVERGED, _DIVERGED = 0, 1, 2


@dataclass(frozen=True)
class MeanFieldState:
    alpha1: complex = 0j
    alpha2: complex = 0j
    q: float = 0.0
    p: float = 0.0
    t: float = 0.0

    def to_array(self) -> np.ndarray:
        return np.array([self.alpha1, self.alpha2, self.q, self.p], dtype=np.complex128)

    @classmethod
    def from_array(cls, y, t: float = 0.0) -> "MeanFieldState":
        return cls(complex(y[0]), complex(y[1]), float(y[2].real), float(y[3].real), t)

    @classmethod
    def from_solution(cls, sol) -> "MeanFieldState":
        return cls(sol.alpha1, sol.alpha2, sol.qbar, 0.0)

    def is_finite(self) -> bool:
        return all(math.isfinite(abs(v)) for v in (self.alpha1, self.alpha2, self.q, self.p))


class SettleResult(NamedTuple):
    state: MeanFieldState
    converged: bool
    diverged: bool = False


def _pack(params: SystemParams, scenario: DriveScenario) -> np.ndarray:
    p = params
    a_in1, a_in2 = scenario.input_amplitudes(p)
    return np.array(
        [
            p.gamma1, p.gamma2, p.delta1, p.delta2, p.J, p.g, p.omega_m, p.gamma_m,
            math.sqrt(p.eta1 * p.gamma1) * a_in1,
            math.sqrt(p.eta2 * p.gamma2) * a_in2,
        ],
        dtype=np.float64,
    )


@numba.njit(cache=True)
def _rhs(y, c):
    g1, g2, d1, d2, J, g, wm, gm, f1, f2 = c[0], c[1], c[2], c[3], c[4], c[5], c[6], c[7], c[8], c[9]
    a1, a2, q, p = y[0], y[1], y[2].real, y[3].real
    out = np.empty(4, dtype=np.complex128)
    out[0] = -(0.5 * g1 + 1j * d1) * a1 - 1j * g * q * a1 - 1j * J * a2 + f1
    out[1] = -(0.5 * g2 + 1j * d2) * a2 - 1j * J * a1 + f2
    out[2] = wm * p
    out[3] = -wm * q - g * (a1.real * a1.real + a1.imag * a1.imag) - gm * p
    return out


@numba.njit(cache=True)
def _step(y, c, dt):
    k1 = _rhs(y, c)
    k2 = _rhs(y + 0.5 * dt * k1, c)
    k3 = _rhs(y + 0.5 * dt * k2, c)
    k4 = _rhs(y + dt * k3, c)
    return y + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


@numba.njit(cache=True)
def _relative_change(y, ref):
    opt_scale = max(abs(ref[0]), abs(ref[1]))
    opt_diff = max(abs(y[0] - ref[0]), abs(y[1] - ref[1]))
    mech_scale = max(abs(ref[2]), abs(ref[3]))
    mech_diff = max(abs(y[2] - ref[2]), abs(y[3] - ref[3]))
    r = 0.0
    if opt_diff > 0.0:
        r = opt_diff / opt_scale if opt_scale > 0.0 else np.inf
    if mech_diff > 0.0:
        m = mech_diff / mech_scale if mech_scale > 0.0 else np.inf
        r = max(r, m)
    return r


@numba.njit(cache=True)
def _integrate(y0, c, dt, n_steps, stride, tol, opt_limit, mech_limit, record_every):
    y = y0.copy()
    ref = y0.copy()
    n_rec = n_steps // record_every + 1 if record_every > 0 else 0
    trace = np.empty((n_rec, 4), dtype=np.complex128)
    n_done = 0
    if record_every > 0:
        trace[0] = y
        n_done = 1
    status = _RUNNING
    last_change = np.inf
    k = 0
    while k < n_steps:
        y = _step(y, c, dt)
        k += 1
        if record_every > 0 and k % record_every == 0 and n_done < n_rec:
            trace[n_done] = y
            n_done += 1
        if not (abs(y[0]) < opt_limit and abs(y[1]) < opt_limit and abs(y[2]) < mech_limit and abs(y[3]) < mech_limit):
            status = _DIVERGED
            break
        if k % stride == 0:
            last_change = _relative_change(y, ref)
            if last_change < tol:
                status = _CONVERGED
                break
            ref = y.copy()
    return y, k, status, trace[:n_done], last_change


def derivative(state: MeanFieldState, params: SystemParams, scenario: DriveScenario) -> np.ndarray:
    """Time derivative ``[dalpha1, dalpha2, dq, dp]`` of the noiseless mean-field equations."""
    return _rhs(state.to_array(), _pack(params, scenario))


def derivative_terms(state: MeanFieldState, params: SystemParams, scenario: DriveScenario) -> np.ndarray:
    """Largest single term in each derivative component (a scale for residual checks)."""
    p = params
    a_in1, a_in2 = scenario.input_amplitudes(p)
    a1, a2, q, pp = state.alpha1, state.alpha2, state.q, state.p
    return np.array(
        [
            max(abs((p.gamma1 / 2 + 1j * p.delta1) * a1), abs(p.g * q * a1), abs(p.J * a2), math.sqrt(p.eta1 * p.gamma1) * a_in1),
            max(abs((p.gamma2 / 2 + 1j * p.delta2) * a2), abs(p.J * a1), math.sqrt(p.eta2 * p.gamma2) * a_in2),
            abs(p.omega_m * pp),
            max(abs(p.omega_m * q), p.g * abs(a1) ** 2, abs(p.gamma_m * pp)),
        ]
    )


def fast_rate(params: SystemParams) -> float:
    p = params
    return max(p.omega_m, abs(p.delta1), abs(p.delta2), p.J, p.gamma1, p.gamma2)


def default_dt(params: SystemParams) -> float:
    return 2 * math.pi / fast_rate(params) / STEPS_PER_FAST_PERIOD


def default_horizon(params: SystemParams) -> float:
    return max(200 * 2 * math.pi / params.omega_m, 50.0 / params.gamma_m)


def linear_scale(params: SystemParams, scenario: DriveScenario) -> tuple[float, float]:
    """Rough optical and mechanical amplitude scales of the driven system."""
    p = params
    s = scenario.s_in(p)
    rate = max(math.sqrt(p.eta1 * p.gamma1), math.sqrt(p.eta2 * p.gamma2))
    opt = 2 * rate * s / min(p.gamma1, p.gamma2)
    mech = p.g * opt**2 / p.omega_m
    return opt, mech


def _limits(params, scenario, y0):
    opt, mech = linear_scale(params, scenario)
    opt = max(opt, abs(y0[0]), abs(y0[1]), 1.0)
    mech = max(mech, abs(y0[2]), abs(y0[3]), 1.0)
    return BLOWUP_FACTOR * opt, BLOWUP_FACTOR * mech


def _stride(params: SystemParams, dt: float) -> int:
    return max(1, int(round(2 * math.pi / params.omega_m / dt)))


def settle(
    params: SystemParams,
    scenario: DriveScenario,
    initial: MeanFieldState | None = None,
    horizon: float | None = None,
    dt: float | None = None,
    tol: float = CONVERGENCE_TOL,
) -> SettleResult:
    """Integrate until the stroboscopic change over one mechanical period drops below ``tol``.

    Returns the final state with ``converged``/``diverged`` flags; running
    out of ``horizon`` leaves both False.
    """
    if initial is None:
        initial = MeanFieldState()
    horizon = default_horizon(params) if horizon is None else horizon
    if not horizon > 0:
        raise ValueError("horizon must be positive")
    dt = default_dt(params) if dt is None else dt
    y0 = initial.to_array()
    n_steps = int(math.ceil(horizon / dt))
    opt_lim, mech_lim = _limits(params, scenario, y0)
    y, k, status, _, _ = _integrate(y0, _pack(params, scenario), dt, n_steps, _stride(params, dt), tol, opt_lim, mech_lim, 0)
    state = MeanFieldState.from_array(y, initial.t + k * dt)
    return SettleResult(state, status == _CONVERGED, status == _DIVERGED or not state.is_finite())


def trajectory(
    params: SystemParams,
    scenario: DriveScenario,
    initial: MeanFieldState | None = None,
    horizon: float | None = None,
    dt: float | None = None,
    samples: int = 2000,
    stop_on_convergence: bool = False,
) -> tuple[np.ndarray, np.ndarray, SettleResult]:
    """Sampled trajectory: times, an ``(n, 4)`` complex state array, and the settle outcome."""
    if initial is None:
        initial = MeanFieldState()
    horizon = default_horizon(params) if horizon is None else horizon
    dt = default_dt(params) if dt is None else dt
    n_steps = int(math.ceil(horizon / dt))
    every = max(1, n_steps // max(1, samples))
    y0 = initial.to_array()
    opt_lim, mech_lim = _limits(params, scenario, y0)
    tol = CONVERGENCE_TOL if stop_on_convergence else 0.0
    y, k, status, trace, change = _integrate(y0, _pack(params, scenario), dt, n_steps, _stride(params, dt), tol, opt_lim, mech_lim, every)
    times = initial.t + dt * every * np.arange(len(trace))
    state = MeanFieldState.from_array(y, initial.t + k * dt)
    converged = status != _DIVERGED and change < CONVERGENCE_TOL
    return times, trace, SettleResult(state, converged, status == _DIVERGED or not state.is_finite())


def relative_distance(state: MeanFieldState, sol) -> float:
    """Largest relative mismatch between a settled state and a steady-state solution."""
    a = max(abs(state.alpha1 - sol.alpha1), abs(state.alpha2 - sol.alpha2)) / max(abs(sol.alpha1), abs(sol.alpha2), 1e-300)
    qs = abs(sol.qbar)
    m = abs(state.q - sol.qbar) / qs if qs > 0 else abs(state.q)
    return max(a, m)
