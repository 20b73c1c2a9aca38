"""Directional transmission, isolation and hysteresis-aware sweeps."""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Callable, Iterable, NamedTuple, Sequence

import numpy as np

from .model import Direction, DriveScenario, SystemParams, effective_model
from .stability import classify
from .steadystate import Branch, SteadyStateSolution, Verdict, branch_labels, recover_fields, solve_cubic

CONTINUATION_EPS = 1.0  # photons/s
FOLD_RTOL = 1e-12


class BranchPolicy(enum.Enum):
    LOWEST_STABLE = "lowest"
    HIGHEST_STABLE = "highest"
    CONTINUED = "continued"
    ALL = "all"


class NoStableRootError(RuntimeError):
    def __init__(self, solutions):
        super().__init__("every steady state is unstable")
        self.solutions = solutions


class Isolation(NamedTuple):
    ratio: float
    dB: float


def isolation(T21: float, T12: float) -> Isolation:
    """``T21/T12`` and its value in dB.  ``T12 = 0`` gives an infinite ratio."""
    if T12 == 0:
        if T21 == 0:
            return Isolation(math.nan, math.nan)
        return Isolation(math.inf, math.inf)
    ratio = T21 / T12
    return Isolation(ratio, 10.0 * math.log10(ratio) if ratio > 0 else -math.inf)


@dataclass(frozen=True)
class TransmissionPoint:
    T21: float | None = None
    T12: float | None = None
    branch21: Branch | None = None
    branch12: Branch | None = None
    stable21: Verdict | None = None
    stable12: Verdict | None = None
    policy: BranchPolicy | None = None

    @property
    def isolation(self) -> Isolation:
        if self.T21 is None or self.T12 is None:
            return Isolation(math.nan, math.nan)
        return isolation(self.T21, self.T12)

    @property
    def isolation_dB(self) -> float:
        return self.isolation.dB

    def merge(self, other: "TransmissionPoint") -> "TransmissionPoint":
        """Combine two single-direction points."""
        pick = lambda a, b: a if a is not None else b
        return TransmissionPoint(
            pick(self.T21, other.T21), pick(self.T12, other.T12),
            pick(self.branch21, other.branch21), pick(self.branch12, other.branch12),
            pick(self.stable21, other.stable21), pick(self.stable12, other.stable12),
            pick(self.policy, other.policy),
        )


def _point(direction: Direction, T: float, sol: SteadyStateSolution | None, policy) -> TransmissionPoint:
    branch = sol.branch if sol is not None else None
    verdict = sol.stability if sol is not None else None
    if direction is Direction.FORWARD:
        return TransmissionPoint(T21=T, branch21=branch, stable21=verdict, policy=policy)
    return TransmissionPoint(T12=T, branch12=branch, stable12=verdict, policy=policy)


def linear_transmission(params: SystemParams, direction: Direction) -> float:
    """Zero-power (U_eff -> 0) transmission; identical in both directions."""
    eff = effective_model(params, direction)
    return abs(eff.eps_eff) ** 2 / (eff.Gamma**2 / 4 + eff.delta_bar**2)


def steady_states(params: SystemParams, scenario: DriveScenario) -> list[SteadyStateSolution]:
    """All steady states with stability verdicts, ascending in output flux."""
    eff = effective_model(params, scenario.direction)
    xs = solve_cubic(eff, scenario.s_in(params))
    return [
        classify(recover_fields(x, eff, params, scenario, b), params)
        for x, b in zip(xs, branch_labels(len(xs)))
    ]


def nearest(solutions: Sequence[SteadyStateSolution], x_prev: float) -> SteadyStateSolution:
    return min(solutions, key=lambda s: abs(s.x - x_prev) / (x_prev + CONTINUATION_EPS))


def select(
    solutions: Sequence[SteadyStateSolution],
    policy: BranchPolicy,
    previous: SteadyStateSolution | None = None,
) -> SteadyStateSolution:
    if policy is BranchPolicy.CONTINUED:
        if previous is None:
            raise ValueError("continued policy needs the previous solution")
        return nearest(solutions, previous.x)
    stable = [s for s in solutions if s.stability is Verdict.STABLE]
    if not stable:
        raise NoStableRootError(list(solutions))
    return stable[0] if policy is BranchPolicy.LOWEST_STABLE else stable[-1]


def transmission_at(
    params: SystemParams,
    scenario: DriveScenario,
    policy: BranchPolicy = BranchPolicy.HIGHEST_STABLE,
    previous: SteadyStateSolution | None = None,
):
    """Transmission for one injection port, on the branch chosen by ``policy``.

    Returns a single :class:`TransmissionPoint` with only that direction
    filled, or a list of them (one per steady state) for ``BranchPolicy.ALL``.
    Raises :class:`NoStableRootError` when a stable-branch policy finds none.
    """
    d = scenario.direction
    if scenario.p_in == 0:
        return _point(d, linear_transmission(params, d), None, policy)
    sols = steady_states(params, scenario)
    if policy is BranchPolicy.ALL:
        return [_point(d, s.transmission, s, policy) for s in sols]
    sol = select(sols, policy, previous)
    return _point(d, sol.transmission, sol, policy)


def transmission(
    params: SystemParams,
    p_in: float,
    policy: BranchPolicy = BranchPolicy.HIGHEST_STABLE,
) -> TransmissionPoint:
    """Both directions at one power."""
    fwd = transmission_at(params, DriveScenario(Direction.FORWARD, p_in), policy)
    bwd = transmission_at(params, DriveScenario(Direction.BACKWARD, p_in), policy)
    return fwd.merge(bwd)


class Axis(enum.Enum):
    POWER = "power"  # p_in in W
    DETUNING = "detuning"  # delta1 = delta2 = value, rad/s


@dataclass(frozen=True)
class Fold:
    traversal: str
    direction: Direction
    axis_value: float  # refined location of the jump
    x_from: float
    x_to: float


@dataclass
class SweepResult:
    axis: Axis
    values: np.ndarray
    p_in: float | None  # fixed power for detuning sweeps
    points: dict[str, list[TransmissionPoint]]
    all_branches: list[dict[Direction, list[SteadyStateSolution]]]
    tracked: dict[str, dict[Direction, list[SteadyStateSolution]]] = field(default_factory=dict)
    folds: list[Fold] = field(default_factory=list)

    def traversal_values(self, traversal: str) -> np.ndarray:
        return self.values if traversal == "up" else self.values[::-1]

    def column(self, traversal: str, name: str) -> np.ndarray:
        return np.array([getattr(pt, name) for pt in self.points[traversal]], dtype=float)


def point_params(params: SystemParams, axis: Axis, value: float, p_in: float | None):
    if axis is Axis.POWER:
        return params, value
    return params.replace(delta1=value, delta2=value), p_in


def _roots_at(args):
    params, axis, value, p_in, directions = args
    pp, power = point_params(params, axis, value, p_in)
    return {d: steady_states(pp, DriveScenario(d, power)) for d in directions}


def axis_values(start: float, stop: float, n: int, log: bool = False) -> np.ndarray:
    if n < 2:
        raise ValueError("a sweep needs at least two points")
    if log:
        if start <= 0 or stop <= 0:
            raise ValueError("log-spaced sweeps need positive bounds")
        return np.geomspace(start, stop, n)
    return np.linspace(start, stop, n)


def _root_count(params, axis, value, p_in, direction) -> int:
    pp, power = point_params(params, axis, value, p_in)
    eff = effective_model(pp, direction)
    return len(solve_cubic(eff, DriveScenario(direction, power).s_in(pp)))


def refine_fold(params, axis, direction, left, right, p_in=None, rtol=FOLD_RTOL) -> float:
    """Bisect between two axis values with different root counts.

    The returned point is on the multi-root side of the boundary.
    """
    n_left = _root_count(params, axis, left, p_in, direction)
    n_right = _root_count(params, axis, right, p_in, direction)
    if (n_left > 1) == (n_right > 1):
        raise ValueError("interval does not bracket a fold")
    multi, single = (left, right) if n_left > 1 else (right, left)
    while abs(multi - single) > rtol * max(abs(multi), abs(single)):
        mid = 0.5 * (multi + single)
        if _root_count(params, axis, mid, p_in, direction) > 1:
            multi = mid
        else:
            single = mid
    return multi


def sweep(
    params: SystemParams,
    axis: Axis,
    values: Iterable[float],
    p_in: float | None = None,
    directions: Sequence[Direction] = (Direction.FORWARD, Direction.BACKWARD),
    traversals: Sequence[str] = ("up", "down"),
    policy: BranchPolicy = BranchPolicy.CONTINUED,
    map_fn: Callable = map,
    refine_folds: bool = True,
) -> SweepResult:
    """Sweep power or common detuning, tracking branches through hysteresis.

    Root sets (with stability) are computed once per axis value, possibly in
    parallel via ``map_fn``; selection is a sequential pass per traversal.
    With ``CONTINUED`` each point takes the root nearest the previous pick,
    so the tracked branch jumps only where it ceases to exist.  The first
    point of a traversal starts on its lowest stable root.
    """
    axis = Axis(axis)
    values = np.asarray(list(values), dtype=float)
    if values.size < 2:
        raise ValueError("a sweep needs at least two points")
    steps = np.diff(values)
    if not (np.all(steps > 0) or np.all(steps < 0)):
        raise ValueError("axis values must be strictly monotone")
    if steps[0] < 0:
        values = values[::-1]
    if axis is Axis.DETUNING and p_in is None:
        raise ValueError("a detuning sweep needs a fixed p_in")
    directions = tuple(Direction(d) for d in directions)

    jobs = [(params, axis, float(v), p_in, directions) for v in values]
    all_branches = list(map_fn(_roots_at, jobs))

    points: dict[str, list[TransmissionPoint]] = {}
    tracked: dict[str, dict[Direction, list[SteadyStateSolution]]] = {}
    folds: list[Fold] = []
    for trav in traversals:
        if trav not in ("up", "down"):
            raise ValueError(f"unknown traversal {trav!r}")
        order = list(range(len(values))) if trav == "up" else list(range(len(values) - 1, -1, -1))
        per_dir: dict[Direction, list[SteadyStateSolution]] = {d: [] for d in directions}
        for d in directions:
            prev = None
            prev_idx = None
            for i in order:
                sols = all_branches[i][d]
                if policy is BranchPolicy.CONTINUED:
                    if prev is None:
                        stable = [s for s in sols if s.stability is Verdict.STABLE]
                        pick = (stable or list(sols))[0]
                    else:
                        pick = nearest(sols, prev.x)
                        lost = len(all_branches[prev_idx][d]) > 1 and len(sols) == 1
                        jumped = lost and abs(pick.x - prev.x) > 0.5 * max(prev.x, pick.x)
                        if jumped:
                            loc = values[i]
                            if refine_folds:
                                loc = refine_fold(params, axis, d, values[prev_idx], values[i], p_in)
                            folds.append(Fold(trav, d, float(loc), prev.x, pick.x))
                else:
                    try:
                        pick = select(sols, policy)
                    except NoStableRootError:
                        pick = sols[-1] if policy is BranchPolicy.HIGHEST_STABLE else sols[0]
                per_dir[d].append(pick)
                prev, prev_idx = pick, i
        tracked[trav] = per_dir
        row = []
        for k, i in enumerate(order):
            pt = TransmissionPoint(policy=policy)
            for d in directions:
                s = per_dir[d][k]
                if s.s_in > 0:
                    T = s.transmission
                else:
                    T = linear_transmission(point_params(params, axis, values[i], p_in)[0], d)
                pt = pt.merge(_point(d, T, s, policy))
            row.append(pt)
        points[trav] = row
    return SweepResult(axis, values, p_in if axis is Axis.DETUNING else None, points, all_branches, tracked, folds)
