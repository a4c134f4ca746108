"""Nonlinear squeezing figures of merit for cat, cubic-phase and GKP states.

Lower values are better.  Each metric has its own natural quadrature
scale: ``xi_cat`` uses the ``hbar = 2`` quadratures of the rest of the
package (Gaussian bound 2/3), ``xi_cps`` the ``hbar = 1`` quadratures
``x / sqrt 2`` (Gaussian bound 3/4), and ``xi_gkp`` a scale selected by the
``GKP_HBAR`` flag.
"""

from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize_scalar
from scipy.special import eval_genlaguerre, gammaln

from .fock_engine import FockVector, _p_operator, _x_operator, quadrature_moments

# quadrature scale for the GKP metric; hbar = 2 reproduces the reference
# values of the bred three-cat generator (0.428 before, 0.426 after)
GKP_HBAR = 2
LAMBDA_RANGE = (0.05, 20.0)
XTOL = 1e-8


@dataclass(frozen=True)
class MetricResult:
    value: float
    params: tuple
    convention: str


def xi_cat(v: FockVector):
    """``min_lam <(x^2 / lam^2 - 1)^2> = 1 - <x^2>^2 / <x^4>`` (hbar = 2)."""
    x2, x4 = quadrature_moments(v, [2, 4], "x")
    return MetricResult(float(1.0 - x2 * x2 / x4), (float(np.sqrt(x4 / x2)),), "hbar=2")


def _cps_parts(v: FockVector):
    w = v.padded(v.cutoff + 4).amps
    w = w / np.linalg.norm(w)
    n = w.size - 1
    X = _x_operator(n) / np.sqrt(2)
    P = _p_operator(n) / np.sqrt(2)
    pv = P @ w
    x2v = X @ (X @ w)
    return pv, x2v, w


def cps_variance(v: FockVector, lam):
    """Variance of ``lam p - x^2 / (sqrt 2 lam^2)`` in ``hbar = 1`` units."""
    pv, x2v, w = _cps_parts(v)
    o = lam * pv - x2v / (np.sqrt(2) * lam * lam)
    return float(np.vdot(o, o).real - np.vdot(w, o).real ** 2)


def _bounded_min(f, grid):
    vals = np.array([f(x) for x in grid])
    i = int(np.argmin(vals))
    lo, hi = grid[max(i - 1, 0)], grid[min(i + 1, grid.size - 1)]
    res = minimize_scalar(f, bounds=(lo, hi), method="bounded", options=dict(xatol=XTOL))
    return (res.x, res.fun) if res.fun < vals[i] else (grid[i], vals[i])


def xi_cps(v: FockVector):
    """``min_{lam, d} <(lam p - x^2 / (sqrt 2 lam^2) - d)^2>`` with ``hbar = 1`` quadratures.

    The optimal ``d`` is the mean, leaving a variance minimized over
    ``lam`` in ``LAMBDA_RANGE`` (log grid then bounded Brent refinement).
    """
    pv, x2v, w = _cps_parts(v)

    def var(lam):
        o = lam * pv - x2v / (np.sqrt(2) * lam * lam)
        return np.vdot(o, o).real - np.vdot(w, o).real ** 2

    lam, val = _bounded_min(var, np.geomspace(*LAMBDA_RANGE, 200))
    o = lam * pv - x2v / (np.sqrt(2) * lam * lam)
    return MetricResult(float(val), (float(lam), float(np.vdot(w, o).real)), "hbar=1")


def displacement_matrix(alpha, cutoff):
    """``<m|D(alpha)|n>`` for ``m, n <= cutoff`` via associated Laguerre polynomials."""
    N = cutoff + 1
    m = np.arange(N)[:, None]
    n = np.arange(N)[None, :]
    r2 = abs(alpha) ** 2
    lo, hi = np.minimum(m, n), np.maximum(m, n)
    lag = eval_genlaguerre(lo, hi - lo, r2)
    with np.errstate(divide="ignore"):
        logmag = 0.5 * (gammaln(lo + 1) - gammaln(hi + 1)) + (hi - lo) * np.log(abs(alpha)) - r2 / 2
    mag = np.exp(logmag) if alpha != 0 else (m == n).astype(float)
    ph = np.where(m >= n, (alpha / abs(alpha) if alpha != 0 else 1) ** (m - n),
                  (-np.conj(alpha) / abs(alpha) if alpha != 0 else 1) ** (n - m))
    return mag * lag * ph


def characteristic(v: FockVector, a, quadrature="x"):
    """``<exp(i a q)>`` for ``q = x`` or ``p`` (hbar = 2)."""
    alpha = 1j * a if quadrature == "x" else complex(a)
    D = displacement_matrix(alpha, v.cutoff)
    return complex(np.vdot(v.amps, D @ v.amps))


def xi_gkp(v: FockVector, hbar=None):
    """GKP squeezing ``min <2cos^2(lam u x + phi1) + 2cos^2(u p / lam + phi2)>``.

    ``u = sqrt(pi) / 2`` in ``hbar = 1`` quadratures (``hbar = 2`` uses the
    package quadratures unscaled).  The phases are minimized in closed
    form, leaving ``2 - |<e^{2i lam u x}>| - |<e^{2i u p / lam}>|``.
    """
    hbar = GKP_HBAR if hbar is None else hbar
    scale = 1 / np.sqrt(2) if hbar == 1 else 1.0
    u = np.sqrt(np.pi) / 2 * scale

    def f(lam):
        return 2.0 - abs(characteristic(v, 2 * lam * u, "x")) - abs(characteristic(v, 2 * u / lam, "p"))

    lam, val = _bounded_min(f, np.geomspace(0.2, 5.0, 120))
    return MetricResult(float(val), (float(lam),), f"hbar={hbar}")


METRICS = {"xi_cat": xi_cat, "xi_cps": xi_cps, "xi_gkp": xi_gkp}

__all__ = ["MetricResult", "xi_cat", "xi_cps", "xi_gkp", "cps_variance",
           "displacement_matrix", "characteristic", "METRICS", "GKP_HBAR"]
