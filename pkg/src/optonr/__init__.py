"""Nonreciprocal steady-state response of a three-mode optomechanical system."""
from .model import (
    HBAR,
    Direction,
    DriveScenario,
    EffectiveModel,
    SystemParams,
    UncoupledPathError,
    drive_amplitude,
    effective_model,
    impedance_mismatch,
)
from .steadystate import (
    Branch,
    SteadyStateSolution,
    Verdict,
    is_bistable_capable,
    recover_fields,
    solve,
    solve_cubic,
    turning_points,
)
from .stability import assess, build_matrix, classify
from .transmission import Axis, BranchPolicy, isolation, steady_states, sweep, transmission, transmission_at

__version__ = "0.1.0"
