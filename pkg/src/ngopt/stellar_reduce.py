"""Photon-number reduction of one control mode.

Semiclassically ``phi_n(x) ~ sqrt(k) phi_n'(k x - d)`` near a point ``x0``
when the local momenta of both sides (and possibly their slopes) agree
there.  A generator heralding ``n`` photons can therefore be replaced by one
heralding ``n' < n`` photons, with rescaled control parameters and a known
correction unitary on the signal.  The replacement is done by a Gaussian
filter on the control mode built from the ladder representation.
"""

from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq, least_squares
from scipy.special import roots_hermite

from .control_rep import diagonal_frame, _canonical_sign, TOL_ISOTROPIC
from .fock_engine import hermite_functions, wave_filter
from .gaussian_maps import (FilterMatrixRep, apply_filter, compose_filters, compose_many,
                            damping_filter, filter_to_choi, unitary_filter)
from .symplectic_core import (GaussianPure, GaussianUnitary, mode_indices, rotation,
                              symplectic_eigenvalues, williamson)


class InfeasibleReduction(ValueError):
    pass


# ---------------------------------------------------------------------------
# WKB ingredients


def fock_wavefunction(n, x):
    """``phi_n(x)`` with ``hbar = 2`` (vacuum density ``exp(-x^2/2)/sqrt(2 pi)``)."""
    x = np.asarray(x, dtype=float)
    return hermite_functions(n, np.atleast_1d(x))[n].reshape(x.shape)


def fock_derivative(n, x):
    """``phi_n'(x) = (sqrt(n) phi_{n-1} - sqrt(n+1) phi_{n+1}) / 2``."""
    x = np.asarray(x, dtype=float)
    H = hermite_functions(n + 1, np.atleast_1d(x))
    out = -np.sqrt(n + 1) * H[n + 1]
    if n > 0:
        out = out + np.sqrt(n) * H[n - 1]
    return (0.5 * out).reshape(x.shape)


def local_momentum(n, x):
    """Semiclassical momentum ``sqrt(4n + 2 - x^2)`` (NaN past the turning point)."""
    with np.errstate(invalid="ignore"):
        return np.sqrt(4 * n + 2 - np.asarray(x, dtype=float) ** 2)


def turning_point(n):
    return np.sqrt(4 * n + 2)


def largest_root(n):
    """Largest zero of ``phi_n``; 0 for ``n <= 1``."""
    if n <= 1:
        return 0.0
    t, _ = roots_hermite(n)
    return float(np.sqrt(2) * t.max())


def match_parity(n, n_prime):
    """Closed-form ``(k, d)`` for a centered match of equal parity."""
    if (n - n_prime) % 2:
        raise ValueError("parity mismatch")
    return np.sqrt((2 * n + 1) / (2 * n_prime + 1)), 0.0


def method2(n, n_prime, x0):
    """Match ``p^2`` and its slope at ``x0``.

    With ``z = k^2`` this is the cubic
    ``(4n'+2) z^3 + (x0^2 - 4n - 2) z^2 - x0^2 = 0``; then ``u = x0 / k^3``
    and ``d = k x0 - u``.
    """
    roots = np.roots([4 * n_prime + 2, x0 * x0 - 4 * n - 2, 0.0, -x0 * x0])
    z = roots[(np.abs(roots.imag) < 1e-9 * np.maximum(1, np.abs(roots))) & (roots.real > 0)].real
    if z.size == 0:
        raise InfeasibleReduction("no positive root of the matching cubic")
    kp = np.sqrt((2 * n + 1) / (2 * n_prime + 1))
    k = float(np.sqrt(z[np.argmin(np.abs(np.sqrt(z) - kp))]))
    return k, float(k * x0 - x0 / k ** 3)


def method1(n, n_prime, x0, n_grid=4000):
    """Match ``p`` at ``x0`` and the log-derivative of the wavefunctions.

    Returns ``(best, candidates)`` where each entry is ``(k, d)`` and
    ``best`` minimizes the slope mismatch ``|p'(x0) - p~'(x0)|``.
    The one-dimensional equation in ``k`` is bracketed on a log grid and
    refined with Brent's method.
    """
    a, da = fock_wavefunction(n, x0), fock_derivative(n, x0)
    c = 4 * n + 2 - x0 * x0
    kmin = np.sqrt(max(c, 0.0) / (4 * n_prime + 2))
    kp = np.sqrt((2 * n + 1) / (2 * n_prime + 1))
    lo = max(kmin * (1 + 1e-12), 0.05 * kp)
    ks = np.geomspace(lo, 10 * kp, n_grid)
    cands = []
    for sgn in (1.0, -1.0):
        def u_of(k):
            return sgn * np.sqrt(np.maximum(4 * n_prime + 2 - c / (k * k), 0.0))

        def F(k):
            u = u_of(k)
            return a * k * fock_derivative(n_prime, u) - da * fock_wavefunction(n_prime, u)

        vals = F(ks)
        for i in np.nonzero(np.sign(vals[:-1]) * np.sign(vals[1:]) < 0)[0]:
            k = brentq(lambda q: float(F(q)), ks[i], ks[i + 1], xtol=1e-14)
            cands.append((k, k * x0 - float(u_of(k))))
        for i in np.nonzero(vals == 0)[0]:
            cands.append((ks[i], ks[i] * x0 - float(u_of(ks[i]))))
    # merge duplicates
    uniq = []
    for k, d in sorted(cands):
        if not uniq or abs(k - uniq[-1][0]) > 1e-6 or abs(d - uniq[-1][1]) > 1e-6:
            uniq.append((float(k), float(d)))
    if not uniq:
        raise InfeasibleReduction("method 1 found no solution")
    p = np.sqrt(c) if c > 0 else 1.0

    def slope_gap(kd):
        k, d = kd
        return abs(x0 - k ** 3 * (k * x0 - d)) / p

    return min(uniq, key=slope_gap), uniq


# ---------------------------------------------------------------------------
# plans


@dataclass(frozen=True)
class ReductionPlan:
    n: int
    n_prime: int
    k: float
    d: float
    s0: float
    delta0: complex
    s0_prime: float
    delta0_prime: complex
    correction: GaussianUnitary
    method_used: str
    x0: float = 0.0

    @property
    def is_identity(self):
        return self.n == self.n_prime and self.k == 1.0 and self.d == 0.0


def correction_unitary(k, d):
    """Unitary ``f(x) -> sqrt(k) f(k x - d)`` (a squeeze after a shift)."""
    return GaussianUnitary(np.diag([1.0 / k, k]), np.array([d / k, 0.0]))


def reduced_params(s0, delta0, k, d):
    """Control parameters of the reduced generator for scale ``k`` and shift ``d``."""
    g = np.sqrt(s0 + 1.0)
    h = np.sqrt(s0 + k * k)
    dx, dp = np.real(delta0), np.imag(delta0)
    return s0 / k ** 2, complex(dx * h / g, (g * dp - s0 * d / k) / h)


def plan_reduction(s0, delta0, n, n_prime):
    """Choose ``(k, d)`` for the reduction ``n -> n'`` and the reduced parameters."""
    if n_prime > n or n_prime < 0:
        raise ValueError("need 0 <= n' <= n")
    if n_prime == n:
        return ReductionPlan(n, n, 1.0, 0.0, s0, delta0, s0, delta0,
                             correction_unitary(1.0, 0.0), "identity")
    g = np.sqrt(s0 + 1.0)
    dp = np.imag(delta0)
    xt, xz = turning_point(n), largest_root(n)
    if s0 > 0:
        x0 = g * dp / s0
    else:
        x0 = np.sign(dp) * xt if dp != 0 else 0.0
    if x0 == 0 and (n - n_prime) % 2 == 0:
        k, d = match_parity(n, n_prime)
        method = "analytic-parity"
    elif abs(x0) < xz:
        (k, d), _ = method1(n, n_prime, x0)
        method = "method1"
    elif abs(x0) < xt:
        x0 = np.sign(x0) * xt
        k, d = method2(n, n_prime, x0)
        method = "method2-at-turning"
    else:
        k, d = method2(n, n_prime, x0)
        method = "method2"
    s0p, d0p = reduced_params(s0, delta0, k, d)
    return ReductionPlan(n, n_prime, float(k), float(d), s0, complex(delta0), s0p, d0p,
                         correction_unitary(k, d), method, float(x0))


# ---------------------------------------------------------------------------
# filters


def control_frame(C_m, beta_m):
    """Rotation angle bringing a control mode to its canonical frame.

    In that frame ``C_m`` is diagonal with ``c >= d`` and ``delta0`` from
    the plain formula is already in canonical form.
    """
    C_m = np.asarray(C_m, dtype=float)
    beta_m = np.asarray(beta_m, dtype=float)
    th = diagonal_frame(C_m)
    D = rotation(th).symplectic @ C_m @ rotation(th).symplectic.T
    c, d = D[0, 0], D[1, 1]
    if abs(c - d) <= TOL_ISOTROPIC * max(1.0, c):
        # bring beta to (0, -|beta|) so that delta0 is on the positive imaginary axis
        if np.linalg.norm(beta_m) == 0:
            return 0.0
        return float(-np.pi / 2 - np.arctan2(beta_m[1], beta_m[0]))
    bx, bp = rotation(th).symplectic @ beta_m
    raw = complex(np.sqrt((d + 1) / (c + 1)) * bx, -np.sqrt((c + 1) / (d + 1)) * bp)
    if raw != _canonical_sign(raw):
        th += np.pi
    return float(th)


def heralding_filter(C_m, beta_m):
    """Filter ``K`` with heralded state ``∝ K|n>`` (up to a signal unitary)."""
    w = williamson(np.asarray(C_m, dtype=float))
    nu = w.eigenvalues[0]
    Uc = GaussianUnitary(w.symplectic, np.asarray(beta_m, dtype=float))
    return compose_filters(damping_filter(np.arctanh(1.0 / nu)), unitary_filter(Uc).transpose())


def _unitarity_residual(X):
    S, b = X.s_matrix, X.b
    r = np.array([S[1, 1] - np.conj(S[0, 0]), S[1, 0] - np.conj(S[0, 1]),
                  b[1] - np.conj(b[0])])
    return np.concatenate([r.real, r.imag])


def fit_wave_damping(K, W, s0):
    """Complex ``mu`` with ``K Gamma(-mu) W^{-1}`` unitary."""
    Wi = W.inverse()

    def res(z):
        return _unitarity_residual(compose_many(K, damping_filter(-(z[0] + 1j * z[1])), Wi))

    seeds = [(0.5 * np.log(s0 + 1.0) + r, im) for r in (0.0, 0.5, 1.0, -0.5)
             for im in (0.0, np.pi / 2, np.pi, -np.pi / 2)]
    best = min((least_squares(res, s, xtol=1e-15, ftol=1e-15, gtol=1e-15) for s in seeds),
               key=lambda r: r.cost)
    if best.cost > 1e-16:
        raise np.linalg.LinAlgError("heralding filter is not Gaussian-unitarily equivalent to the wave form")
    return complex(best.x[0], best.x[1])


def _embed_rotation(theta, mode, total):
    return rotation(theta).embed([mode], total)


def _reduction_core(plan: ReductionPlan, mu0, mu_p):
    W = wave_filter(plan.s0, plan.delta0)
    Wp = wave_filter(plan.s0_prime, plan.delta0_prime)
    X = compose_many(damping_filter(-mu0), W.inverse(), unitary_filter(plan.correction),
                     Wp, damping_filter(mu_p))
    return X.transpose()


def build_filter(C_m, beta_m, plan: ReductionPlan, mu_prime=0.0, as_choi=False):
    """Reduction filter ``M`` on one control mode, in the canonical frame.

    ``M = [Gamma(-mu0) W^{-1} U_corr W' Gamma(mu')]^T`` where ``W`` and
    ``W'`` are the wave-form filters of the original and reduced
    parameters and ``mu0`` ties the heralding filter to ``W``.  The moments
    ``(C_m, beta_m)`` must already be in the canonical frame.  With
    ``as_choi`` the Choi map is returned (only possible when ``M`` has a
    finite Choi state).
    """
    if plan.is_identity:
        M = FilterMatrixRep.identity(1)
    else:
        mu0 = fit_wave_damping(heralding_filter(C_m, beta_m), wave_filter(plan.s0, plan.delta0),
                               plan.s0)
        M = _reduction_core(plan, mu0, mu_prime)
    return filter_to_choi(M) if as_choi else M


def apply_reduction(G: GaussianPure, mode, plan: ReductionPlan, nu_target=None):
    """Apply the reduction filter to control ``mode`` (absolute index) of ``G``.

    ``mu'`` is chosen so that the reduced control mode keeps its symplectic
    eigenvalue (or reaches ``nu_target``).  The mode is rotated to its
    canonical frame, filtered and rotated back.
    """
    if plan.is_identity:
        return G
    C_m, b_m = G.block([mode])
    theta = control_frame(C_m, b_m)
    R = _embed_rotation(theta, mode, G.modes)
    Gr = G.transform(R)
    C_r, b_r = Gr.block([mode])
    nu = symplectic_eigenvalues(C_r)[0] if nu_target is None else nu_target
    W = wave_filter(plan.s0, plan.delta0)
    mu0 = fit_wave_damping(heralding_filter(C_r, b_r), W, plan.s0)

    def state_for(mu_p):
        M = _reduction_core(plan, mu0, mu_p)
        return apply_filter(Gr.cov, Gr.mean, M, [mode])

    def gap(mu_p):
        try:
            cov, _ = state_for(mu_p)
        except (ValueError, np.linalg.LinAlgError):
            return np.nan
        idx = mode_indices([mode])
        return np.log(symplectic_eigenvalues(cov[np.ix_(idx, idx)])[0]) - np.log(nu)

    mu_p = _solve_mu(gap)
    cov, mean = state_for(mu_p)
    return GaussianPure(cov, mean).transform(R.inverse())


def _solve_mu(gap):
    """Root of the decreasing function ``gap`` over its finite domain."""
    grid = np.linspace(-6.0, 12.0, 181)
    vals = np.array([gap(m) for m in grid])
    ok = np.isfinite(vals)
    for i in range(grid.size - 1):
        if ok[i] and ok[i + 1] and vals[i] * vals[i + 1] <= 0:
            if vals[i] == 0:
                return grid[i]
            return brentq(gap, grid[i], grid[i + 1], xtol=1e-13)
    raise InfeasibleReduction("no damping keeps the control symplectic eigenvalue")


def reduce_mode(G: GaussianPure, split, m, n_prime, photons):
    """Plan and apply the reduction of control mode ``m`` to ``n_prime`` photons."""
    from .control_rep import control_params_single
    mode = split + m
    s0, delta0 = control_params_single(*G.block([mode]))
    plan = plan_reduction(s0, delta0, photons[m], n_prime)
    return apply_reduction(G, mode, plan), plan


__all__ = [
    "ReductionPlan", "InfeasibleReduction", "fock_wavefunction", "fock_derivative",
    "local_momentum", "turning_point", "largest_root", "match_parity", "method1",
    "method2", "plan_reduction", "reduced_params", "correction_unitary",
    "heralding_filter", "fit_wave_damping", "build_filter", "apply_reduction",
    "control_frame", "reduce_mode",
]
