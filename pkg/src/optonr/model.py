"""Physical parameters and the directional single-mode reduction.

Cavity ``a1`` carries the mechanical mode, ``a2`` is purely optical, and the
two are coupled by a beam-splitter rate ``J``.  Eliminating ``a2`` (and the
mechanical displacement) leaves a Kerr-like equation for the output field of
whichever port is detected.  The damping, detuning and drive of that equation
do not depend on the injection direction; the effective nonlinearity does.

All rates and frequencies are angular (rad/s).
"""
from __future__ import annotations

import enum
import math
import warnings
from dataclasses import dataclass, replace

HBAR = 1.054571817e-34  # J s
TWO_PI = 2.0 * math.pi


class Direction(enum.Enum):
    """Injection port. FORWARD: in at a1, out at a2. BACKWARD: in at a2, out at a1."""

    FORWARD = "forward"
    BACKWARD = "backward"

    @property
    def label(self) -> str:
        return "21" if self is Direction.FORWARD else "12"


class UncoupledPathError(ValueError):
    """Forward transmission requested with J = 0 (no path from a1 to a2)."""


class StrongDriveWarning(UserWarning):
    pass


@dataclass(frozen=True)
class SystemParams:
    """Rates of the three-mode model, in rad/s (``eta1``/``eta2`` dimensionless)."""

    omega_d: float
    gamma1: float
    gamma2: float
    eta1: float
    eta2: float
    J: float
    g: float
    omega_m: float
    gamma_m: float
    delta1: float
    delta2: float

    def __post_init__(self):
        for name in ("omega_d", "gamma1", "gamma2", "gamma_m", "omega_m"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0):
                raise ValueError(f"{name} must be positive and finite, got {value!r}")
        for name in ("eta1", "eta2"):
            value = getattr(self, name)
            if not (0.0 < value <= 1.0):
                raise ValueError(f"{name} must lie in (0, 1], got {value!r}")
        for name in ("J", "g"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value >= 0):
                raise ValueError(f"{name} must be nonnegative and finite, got {value!r}")
        for name in ("delta1", "delta2"):
            if not math.isfinite(getattr(self, name)):
                raise ValueError(f"{name} must be finite")

    def replace(self, **changes) -> "SystemParams":
        return replace(self, **changes)

    @classmethod
    def baseline(cls, **overrides) -> "SystemParams":
        """Optomechanical-crystal parameter set used by every figure preset.

        Detunings and ``J`` default to ``Delta/2pi = 4 GHz`` and
        ``J/2pi = 3 GHz``; override as needed.
        """
        values = dict(
            omega_d=TWO_PI * 200e12,
            gamma1=TWO_PI * 1e9,
            gamma2=TWO_PI * 1e9,
            eta1=0.7,
            eta2=0.7,
            J=TWO_PI * 3e9,
            g=TWO_PI * 0.8e6,
            omega_m=TWO_PI * 6e9,
            gamma_m=TWO_PI * 5e6,
            delta1=TWO_PI * 4e9,
            delta2=TWO_PI * 4e9,
        )
        values.update(overrides)
        return cls(**values)


@dataclass(frozen=True)
class DriveScenario:
    direction: Direction
    p_in: float  # W

    def __post_init__(self):
        if not isinstance(self.direction, Direction):
            object.__setattr__(self, "direction", Direction(self.direction))
        if not (math.isfinite(self.p_in) and self.p_in >= 0):
            raise ValueError(f"p_in must be nonnegative, got {self.p_in!r}")

    def s_in(self, params: SystemParams) -> float:
        return drive_amplitude(params.omega_d, self.p_in)

    def input_amplitudes(self, params: SystemParams) -> tuple[float, float]:
        """(alpha_1in, alpha_2in) for this injection port."""
        s = self.s_in(params)
        return (s, 0.0) if self.direction is Direction.FORWARD else (0.0, s)


@dataclass(frozen=True)
class EffectiveModel:
    """Reduced single-mode equation for the detected output field.

    ``eps_eff`` is the drive per unit input amplitude; multiply by ``s_in``.
    """

    direction: Direction
    Gamma: float
    delta_bar: float
    U: float
    U_eff: float
    eps_eff: complex


def drive_amplitude(omega_d: float, p_in: float) -> float:
    """Input amplitude ``sqrt(p_in / (hbar omega_d))`` in sqrt(photons/s)."""
    if not omega_d > 0:
        raise ValueError(f"omega_d must be positive, got {omega_d!r}")
    if not p_in >= 0:
        raise ValueError(f"p_in must be nonnegative, got {p_in!r}")
    return math.sqrt(p_in / (HBAR * omega_d))


def bare_nonlinearity(params: SystemParams) -> float:
    return -params.g**2 / params.omega_m


def transfer_a1_to_a2(params: SystemParams) -> complex:
    """Ratio alpha2/alpha1 imposed by the undriven a2 equation."""
    return -2j * params.J / (params.gamma2 + 2j * params.delta2)


def effective_model(params: SystemParams, direction: Direction) -> EffectiveModel:
    direction = Direction(direction)
    p = params
    lorentz = p.gamma2**2 + 4.0 * p.delta2**2
    Gamma = p.gamma1 + 4.0 * p.gamma2 * p.J**2 / lorentz
    delta_bar = p.delta1 - 4.0 * p.J**2 * p.delta2 / lorentz
    U = bare_nonlinearity(p)
    if direction is Direction.FORWARD:
        if p.J == 0:
            raise UncoupledPathError("J = 0: the forward effective nonlinearity U21 is infinite")
        U_eff = U * lorentz / (4.0 * p.eta2 * p.gamma2 * p.J**2)
    else:
        U_eff = U / (p.eta1 * p.gamma1)
    eps = -2j * p.J * math.sqrt(p.eta1 * p.gamma1 * p.eta2 * p.gamma2) / (p.gamma2 + 2j * p.delta2)
    return EffectiveModel(direction, Gamma, delta_bar, U, U_eff, complex(eps))


def impedance_mismatch(params: SystemParams) -> float:
    """Input coupling rate over the effective a1 -> a2_out coupling rate.

    1 means matched (reciprocal response at any power).  ``J = 0`` returns
    ``math.inf``.
    """
    if params.J == 0:
        return math.inf
    through = abs(transfer_a1_to_a2(params)) * math.sqrt(params.eta2 * params.gamma2)
    return math.sqrt(params.eta1 * params.gamma1) / through


def is_impedance_matched(params: SystemParams, rtol: float = 1e-12) -> bool:
    r = impedance_mismatch(params)
    return math.isfinite(r) and abs(r - 1.0) <= rtol


def matched_coupling(params: SystemParams) -> float:
    """The J that satisfies impedance matching for the other parameters."""
    lorentz = params.gamma2**2 + 4.0 * params.delta2**2
    return math.sqrt(params.eta1 * params.gamma1 * lorentz / (4.0 * params.eta2 * params.gamma2))


def check_strong_drive(params: SystemParams, scenario: DriveScenario, factor: float = 10.0) -> bool:
    """Warn when the injected rate is not well above the cavity linewidth.

    Returns True when the mean-field hierarchy holds at ``factor``.
    """
    s = scenario.s_in(params)
    if scenario.direction is Direction.FORWARD:
        rate, gamma = math.sqrt(params.eta1 * params.gamma1) * s, params.gamma1
    else:
        rate, gamma = math.sqrt(params.eta2 * params.gamma2) * s, params.gamma2
    ok = rate >= factor * gamma
    if not ok:
        warnings.warn(
            f"weak drive: sqrt(eta*gamma)*s_in = {rate:.3g} < {factor:g}*gamma = {factor * gamma:.3g}",
            StrongDriveWarning,
            stacklevel=2,
        )
    return ok
