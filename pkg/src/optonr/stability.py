"""Linear stability of a mean-field steady state.

Fluctuations are ordered ``(da1, da1^+, da2, da2^+, dq, dp)``.  A steady
state is stable when every eigenvalue of the 6x6 drift matrix has a
negative real part.
"""
from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .model import SystemParams
from .steadystate import SteadyStateSolution, Verdict

ZERO_THRESHOLD = 1e-9


class EigenSolverError(RuntimeError):
    """The dense eigensolver failed; the state is unclassified, not unstable."""


@dataclass(frozen=True)
class FluctuationMatrix:
    entries: np.ndarray
    delta1_prime: float
    rate_scale: float  # max(gamma1, gamma2, omega_m)

    @property
    def threshold(self) -> float:
        return ZERO_THRESHOLD * self.rate_scale


@dataclass(frozen=True)
class StabilityReport:
    eigenvalues: np.ndarray
    max_real_part: float
    is_stable: bool
    threshold: float

    @property
    def verdict(self) -> Verdict:
        return Verdict.STABLE if self.is_stable else Verdict.UNSTABLE


def build_matrix(params: SystemParams, alpha1: complex, qbar: float) -> FluctuationMatrix:
    p = params
    d1 = p.delta1 + p.g * qbar
    ga = p.g * alpha1
    gac = p.g * np.conj(alpha1)
    A = np.zeros((6, 6), dtype=complex)
    A[0, 0] = -(p.gamma1 / 2 + 1j * d1)
    A[0, 2] = -1j * p.J
    A[0, 4] = -1j * ga
    A[1, 1] = -(p.gamma1 / 2 - 1j * d1)
    A[1, 3] = 1j * p.J
    A[1, 4] = 1j * gac
    A[2, 0] = -1j * p.J
    A[2, 2] = -(p.gamma2 / 2 + 1j * p.delta2)
    A[3, 1] = 1j * p.J
    A[3, 3] = -(p.gamma2 / 2 - 1j * p.delta2)
    A[4, 5] = p.omega_m
    A[5, 0] = -gac
    A[5, 1] = -ga
    A[5, 4] = -p.omega_m
    A[5, 5] = -p.gamma_m
    return FluctuationMatrix(A, float(d1), max(p.gamma1, p.gamma2, p.omega_m))


def _quadrature_transform() -> np.ndarray:
    """Unitary map from ``(a, a^+)`` pairs to real quadratures ``(x, y)``."""
    pair = np.array([[1.0, 1.0], [-1j, 1j]]) / np.sqrt(2.0)
    T = np.eye(6, dtype=complex)
    T[0:2, 0:2] = pair
    T[2:4, 2:4] = pair
    return T


_T = _quadrature_transform()


def _real_form(A: np.ndarray) -> np.ndarray | None:
    """The drift matrix in quadrature variables, or None if it is not real there.

    For an equation-derived matrix this similarity transform is exactly real,
    so the real eigensolver returns conjugate pairs exactly; defective
    (repeated) spectra would otherwise break the pairing at sqrt(eps) level.
    """
    R = _T @ A @ _T.conj().T
    if np.max(np.abs(R.imag)) > 1e-12 * max(np.max(np.abs(R)), 1e-300):
        return None
    return R.real


def assess(matrix: FluctuationMatrix) -> StabilityReport:
    A = matrix.entries
    if not np.all(np.isfinite(A)):
        raise EigenSolverError("fluctuation matrix has non-finite entries")
    R = _real_form(A)
    try:
        eig = np.linalg.eigvals(A if R is None else R).astype(complex)
    except np.linalg.LinAlgError as exc:
        raise EigenSolverError(f"eigenvalue computation did not converge: {exc}") from exc
    if not np.all(np.isfinite(eig)):
        raise EigenSolverError("eigensolver returned non-finite eigenvalues")
    max_re = float(np.max(eig.real))
    return StabilityReport(eig, max_re, max_re < matrix.threshold, matrix.threshold)


def classify(solution: SteadyStateSolution, params: SystemParams) -> SteadyStateSolution:
    """Copy of ``solution`` with its stability verdict and report filled in."""
    report = assess(build_matrix(params, solution.alpha1, solution.qbar))
    return replace(solution, stability=report.verdict, report=report)
