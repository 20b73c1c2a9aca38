import numpy as np

from optonr.model import TWO_PI, SystemParams

GHZ = TWO_PI * 1e9
MHZ = TWO_PI * 1e6


def params_ghz(**ghz):
    """Baseline parameters with entries overridden in GHz (``g``/``gamma_m`` in MHz)."""
    out = {}
    for k, v in ghz.items():
        out[k] = v * (MHZ if k in ("g", "gamma_m") else GHZ)
    return SystemParams.baseline(**out)


def sign_change_roots(eff, s_in, n=200001):
    """Brute-force root count of the output-flux cubic by sign changes on a log grid.

    Independent of the companion-matrix solver: evaluates the raw polynomial
    in x on a dense geometric bracket up to the linear-response bound.
    """
    drive = abs(eff.eps_eff * s_in) ** 2
    lin = drive / (eff.Gamma**2 / 4)  # |alpha_out|^2 can never exceed this
    xs = np.geomspace(lin * 1e-12, lin * 1.01, n)
    f = (eff.Gamma**2 / 4 + eff.delta_bar**2) * xs + 2 * eff.delta_bar * eff.U_eff * xs**2 + eff.U_eff**2 * xs**3 - drive
    sign = np.sign(f)
    idx = np.nonzero(sign[:-1] * sign[1:] < 0)[0]
    return [0.5 * (xs[i] + xs[i + 1]) for i in idx]


def linear_two_mode(params, direction, s_in):
    """Direct 2x2 solve of the g = 0 steady state: (alpha1, alpha2)."""
    p = params
    M = np.array(
        [
            [-(p.gamma1 / 2 + 1j * p.delta1), -1j * p.J],
            [-1j * p.J, -(p.gamma2 / 2 + 1j * p.delta2)],
        ]
    )
    if direction.value == "forward":
        rhs = -np.array([np.sqrt(p.eta1 * p.gamma1) * s_in, 0.0])
    else:
        rhs = -np.array([0.0, np.sqrt(p.eta2 * p.gamma2) * s_in])
    a1, a2 = np.linalg.solve(M, rhs)
    return complex(a1), complex(a2)
