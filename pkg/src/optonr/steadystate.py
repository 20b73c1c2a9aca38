"""Steady states of the reduced cubic and recovery of the three-mode fields.

The detected output flux ``x = |alpha_out|^2`` obeys

    (Gamma^2/4 + D^2) x + 2 D U x^2 + U^2 x^3 = |eps s_in|^2

with ``D`` the effective detuning and ``U`` the directional nonlinearity.
Roots are found in the dimensionless shift ``y = U x / Gamma`` where the
coefficients are O(1).
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from .model import (
    HBAR,
    Direction,
    DriveScenario,
    EffectiveModel,
    SystemParams,
    UncoupledPathError,
    effective_model,
)

IMAG_TOL = 1e-9
MERGE_TOL = 1e-7
NEWTON_STEPS = 2


class Branch(enum.Enum):
    LOWER = "lower"
    MIDDLE = "middle"
    UPPER = "upper"
    UNIQUE = "unique"


class Verdict(enum.Enum):
    STABLE = "stable"
    UNSTABLE = "unstable"
    UNCHECKED = "unchecked"


@dataclass(frozen=True)
class SteadyStateSolution:
    x: float
    alpha_out: complex
    alpha1: complex
    alpha2: complex
    qbar: float
    branch: Branch = Branch.UNIQUE
    stability: Verdict = Verdict.UNCHECKED
    direction: Direction = Direction.FORWARD
    s_in: float = 0.0
    report: object = field(default=None, compare=False, repr=False)

    @property
    def transmission(self) -> float:
        if self.s_in == 0:
            return math.nan
        return self.x / self.s_in**2


def _cubic_coefficients(eff: EffectiveModel, s_in: float) -> tuple[float, float, float]:
    ratio = eff.delta_bar / eff.Gamma
    rhs = eff.U_eff * abs(eff.eps_eff * s_in) ** 2 / eff.Gamma**3
    return 2.0 * ratio, 0.25 + ratio * ratio, rhs


def scaled_residual(y: float, eff: EffectiveModel, s_in: float) -> float:
    b, c, rhs = _cubic_coefficients(eff, s_in)
    return abs(((y + b) * y + c) * y - rhs) / (1.0 + abs(rhs))


def cubic_lhs(x, eff: EffectiveModel):
    """Left-hand side of the output-flux cubic, in (photons/s)(rad/s)^2."""
    x = np.asarray(x, dtype=float)
    return (eff.Gamma**2 / 4 + eff.delta_bar**2) * x + 2 * eff.delta_bar * eff.U_eff * x**2 + eff.U_eff**2 * x**3


def _polish(y: float, b: float, c: float, rhs: float) -> float:
    for _ in range(NEWTON_STEPS):
        f = ((y + b) * y + c) * y - rhs
        df = (3.0 * y + 2.0 * b) * y + c
        if df == 0.0 or not math.isfinite(df):
            break
        step = f / df
        # a vanishing derivative marks a fold; Newton there is only linear
        if abs(step) > 1e-3 * (1.0 + abs(y)):
            break
        y -= step
    return y


def solve_cubic(eff: EffectiveModel, s_in: float) -> list[float]:
    """All physical roots ``x >= 0`` in ascending order (1, 2 at a fold, or 3)."""
    if s_in < 0:
        raise ValueError("s_in must be nonnegative")
    drive = abs(eff.eps_eff * s_in) ** 2
    if drive == 0.0:
        return [0.0]
    if eff.U_eff == 0.0:
        return [drive / (eff.Gamma**2 / 4 + eff.delta_bar**2)]

    b, c, rhs = _cubic_coefficients(eff, s_in)
    companion = np.array([[-b, -c, rhs], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0]])
    eig = np.linalg.eigvals(companion)
    ys = []
    for z in eig:
        if abs(z.imag) < IMAG_TOL * (1.0 + abs(z.real)):
            ys.append(_polish(float(z.real), b, c, rhs))
    if not ys:
        # a real cubic always has a real root; recover it if the tolerance was too strict
        z = eig[np.argmin(np.abs(eig.imag))]
        ys.append(_polish(float(z.real), b, c, rhs))

    ys.sort()
    merged: list[float] = []
    for y in ys:
        if merged and abs(y - merged[-1]) < MERGE_TOL * (1.0 + abs(y)):
            continue
        merged.append(y)

    scale = eff.Gamma / eff.U_eff
    xs = []
    for y in merged:
        x = y * scale
        if x < 0:
            if x >= -1e-12 * abs(scale):
                x = 0.0
            else:
                continue
        xs.append(x)
    return sorted(xs)


def turning_points(eff: EffectiveModel) -> tuple[float, float] | None:
    """Output fluxes ``(x_minus, x_plus)`` where the cubic's derivative vanishes.

    ``x_minus`` ends the lower branch, ``x_plus`` ends the upper one.  None
    when there is no positive pair (no bistability).
    """
    if eff.U_eff == 0:
        raise ValueError("turning points need a nonzero nonlinearity")
    D, G = eff.delta_bar, eff.Gamma
    disc = 4 * D * D - 3 * G * G
    if disc < 0:
        if disc > -1e-12 * 4 * D * D:
            disc = 0.0
        else:
            return None
    root = math.sqrt(disc)
    a = (-4 * D + root) / (6 * eff.U_eff)
    b = (-4 * D - root) / (6 * eff.U_eff)
    lo, hi = min(a, b), max(a, b)
    if lo <= 0:
        return None
    return lo, hi


def fold_drives(eff: EffectiveModel) -> tuple[float, float] | None:
    """Values of ``|eps s_in|^2`` at the two turning points, ascending.

    Three roots exist strictly between them.
    """
    tp = turning_points(eff)
    if tp is None:
        return None
    lo, hi = (float(v) for v in cubic_lhs(np.array(tp), eff))
    return min(lo, hi), max(lo, hi)


def fold_powers(eff: EffectiveModel, omega_d: float) -> tuple[float, float] | None:
    """Input powers (W) bounding the bistable window, ascending."""
    drives = fold_drives(eff)
    if drives is None:
        return None
    e2 = abs(eff.eps_eff) ** 2
    return drives[0] / e2 * HBAR * omega_d, drives[1] / e2 * HBAR * omega_d


def is_bistable_capable(eff: EffectiveModel) -> bool:
    return eff.U_eff != 0 and eff.delta_bar > math.sqrt(3.0) / 2.0 * eff.Gamma


def recover_fields(
    x: float,
    eff: EffectiveModel,
    params: SystemParams,
    scenario: DriveScenario,
    branch: Branch = Branch.UNIQUE,
) -> SteadyStateSolution:
    """Intracavity amplitudes and displacement for one root of the cubic."""
    s = scenario.s_in(params)
    alpha_out = eff.eps_eff * s / (eff.Gamma / 2 + 1j * (eff.delta_bar + eff.U_eff * x))
    p = params
    if scenario.direction is Direction.FORWARD:
        if p.J == 0:
            raise UncoupledPathError("no forward transmission path with J = 0")
        alpha2 = alpha_out / math.sqrt(p.eta2 * p.gamma2)
        alpha1 = alpha2 * (p.gamma2 + 2j * p.delta2) / (-2j * p.J)
    else:
        alpha1 = alpha_out / math.sqrt(p.eta1 * p.gamma1)
        alpha2 = (-2j * p.J * alpha1 + 2 * math.sqrt(p.eta2 * p.gamma2) * s) / (p.gamma2 + 2j * p.delta2)
    qbar = -p.g * abs(alpha1) ** 2 / p.omega_m
    return SteadyStateSolution(
        x=float(abs(alpha_out) ** 2),
        alpha_out=complex(alpha_out),
        alpha1=complex(alpha1),
        alpha2=complex(alpha2),
        qbar=float(qbar),
        branch=branch,
        direction=scenario.direction,
        s_in=s,
    )


def branch_labels(n: int) -> list[Branch]:
    if n == 1:
        return [Branch.UNIQUE]
    if n == 2:
        return [Branch.LOWER, Branch.UPPER]
    if n == 3:
        return [Branch.LOWER, Branch.MIDDLE, Branch.UPPER]
    raise ValueError(f"unexpected root count {n}")


def solve(params: SystemParams, scenario: DriveScenario) -> list[SteadyStateSolution]:
    """Every steady state for one drive, ascending in output flux, stability unchecked."""
    eff = effective_model(params, scenario.direction)
    xs = solve_cubic(eff, scenario.s_in(params))
    return [recover_fields(x, eff, params, scenario, b) for x, b in zip(xs, branch_labels(len(xs)))]


def steady_state_residual(sol: SteadyStateSolution, params: SystemParams, scenario: DriveScenario) -> float:
    """Largest residual of the full three-mode steady-state equations, relative to their largest term."""
    p = params
    a_in1, a_in2 = scenario.input_amplitudes(p)
    a1, a2, q = sol.alpha1, sol.alpha2, sol.qbar
    terms1 = [
        -(p.gamma1 / 2 + 1j * p.delta1) * a1,
        -1j * p.g * q * a1,
        -1j * p.J * a2,
        math.sqrt(p.eta1 * p.gamma1) * a_in1,
    ]
    terms2 = [-(p.gamma2 / 2 + 1j * p.delta2) * a2, -1j * p.J * a1, math.sqrt(p.eta2 * p.gamma2) * a_in2]
    terms3 = [p.omega_m * q, p.g * abs(a1) ** 2]
    worst = 0.0
    for terms in (terms1, terms2, terms3):
        scale = max(abs(t) for t in terms)
        if scale > 0:
            worst = max(worst, abs(sum(terms)) / scale)
    return worst
