"""Control-mode moments and the non-Gaussian control parameters.

A heralded generator is a pure Gaussian state whose first ``l`` modes are the
signal and whose remaining ``k`` modes are measured by photon counting.  Up
to Gaussian unitaries on the signal, the heralded state and the success
probability only depend on the control moments ``(C, beta)`` and the photon
pattern.  Per control mode these reduce to two numbers: ``s0`` (phase
sensitivity) and ``delta0`` (asymmetry).
"""

from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import block_diag

from .gaussian_maps import apply_map, damping_choi, vacuum_projection_choi
from .symplectic_core import GaussianPure, check_uncertainty, mode_indices, rotation

TOL_DEFINED = 1e-12
TOL_CRITICAL = 1e-9
TOL_ISOTROPIC = 1e-9


@dataclass(frozen=True)
class ControlMoments:
    """Covariance ``C`` and mean ``beta`` of the ``k`` control modes."""

    C: np.ndarray
    beta: np.ndarray

    def __post_init__(self):
        C = np.asarray(self.C, dtype=float)
        beta = np.asarray(self.beta, dtype=float)
        if C.shape != (beta.size, beta.size) or beta.size % 2:
            raise ValueError("inconsistent control moment shapes")
        if not check_uncertainty(C, tol=1e-8):
            raise ValueError("control covariance violates the uncertainty relation")
        object.__setattr__(self, "C", 0.5 * (C + C.T))
        object.__setattr__(self, "beta", beta)

    @property
    def k(self):
        return self.beta.size // 2

    def mode(self, m):
        idx = mode_indices([m])
        return self.C[np.ix_(idx, idx)], self.beta[idx]


@dataclass(frozen=True)
class ControlParams:
    """Per-mode ``(s0, delta0)``; ``defined[m]`` is False for pure control modes."""

    s0: np.ndarray
    delta0: np.ndarray
    defined: np.ndarray

    def __iter__(self):
        return iter(zip(self.s0, self.delta0, self.defined))


@dataclass(frozen=True)
class GeneratorSpec:
    """A heralded generator: pure state, number of signal modes, photon pattern.

    Signal modes come first.  The full state is kept (rather than only the
    control moments) so that heralded outputs can be compared directly.
    """

    state: GaussianPure
    signal_modes: int
    photons: tuple = field(default=())

    def __post_init__(self):
        photons = tuple(int(n) for n in self.photons)
        if len(photons) != self.state.modes - self.signal_modes:
            raise ValueError("photon pattern length must equal the control mode count")
        if any(n < 0 for n in photons):
            raise ValueError("photon numbers must be nonnegative")
        object.__setattr__(self, "photons", photons)

    @property
    def k(self):
        return len(self.photons)

    @property
    def split(self):
        return (self.signal_modes, self.k)

    @property
    def control(self):
        return list(range(self.signal_modes, self.state.modes))

    @property
    def moments(self):
        return ControlMoments(*self.state.block(self.control))

    def with_state(self, state, photons=None):
        return GeneratorSpec(state, self.signal_modes,
                             self.photons if photons is None else photons)


def _canonical_sign(z, tol=1e-14):
    if abs(z.real) > tol:
        return z if z.real > 0 else -z
    return z if z.imag >= 0 else -z


def diagonal_frame(C_m):
    """Angle ``theta`` with ``R(theta) C_m R(theta)^T = diag(c, d)``, ``c >= d``."""
    C_m = np.asarray(C_m, dtype=float)
    theta = 0.5 * np.arctan2(2 * C_m[0, 1], C_m[0, 0] - C_m[1, 1])
    return -theta


def control_params_single(C_m, beta_m):
    """Control parameters ``(s0, delta0)`` of one control mode.

    Parameters
    ----------
    C_m : (2, 2) array
        Covariance of the control mode.
    beta_m : (2,) array
        Mean of the control mode.

    Returns
    -------
    s0 : float
    delta0 : complex

    Notes
    -----
    In the frame where ``C_m = diag(c, d)`` with ``c >= d``,

        s0 = (c - d) / (c d - 1)
        delta0 = (sqrt((d+1)/(c+1)) bx - i sqrt((c+1)/(d+1)) bp) / sqrt(c d - 1)

    ``delta0`` is fixed up to sign by the frame; the sign is chosen so that
    the first nonzero of (Re, Im) is positive.  When ``c = d`` any frame
    works and ``delta0`` is reported on the positive imaginary axis.
    Raises ``ValueError`` for a pure control mode (``c d = 1``).
    """
    C_m = np.asarray(C_m, dtype=float)
    beta_m = np.asarray(beta_m, dtype=float)
    R = rotation(diagonal_frame(C_m)).symplectic
    D = R @ C_m @ R.T
    c, d = D[0, 0], D[1, 1]
    bx, bp = R @ beta_m
    if c * d - 1 <= TOL_DEFINED:
        raise ValueError("pure control mode: control parameters undefined")
    sq = np.sqrt(c * d - 1)
    s0 = max((c - d) / sq ** 2, 0.0)
    delta0 = (np.sqrt((d + 1) / (c + 1)) * bx - 1j * np.sqrt((c + 1) / (d + 1)) * bp) / sq
    if abs(c - d) <= TOL_ISOTROPIC * max(1.0, c):
        delta0 = 1j * abs(delta0)
    return float(s0), complex(_canonical_sign(delta0))


def control_params_multi(moments: ControlMoments):
    """Apply :func:`control_params_single` to each diagonal block."""
    s0 = np.full(moments.k, np.nan)
    delta0 = np.full(moments.k, np.nan, dtype=complex)
    ok = np.zeros(moments.k, dtype=bool)
    for m in range(moments.k):
        try:
            s0[m], delta0[m] = control_params_single(*moments.mode(m))
            ok[m] = True
        except ValueError:
            pass
    return ControlParams(s0, delta0, ok)


def invariant_control_params(G: GaussianPure, split, m):
    """Parameters of control mode ``m`` after projecting the others onto vacuum.

    ``split`` is the number of signal modes and ``m`` counts control modes
    from zero.  The result does not change under damping of the other modes.
    """
    cov, mean = G.cov, G.mean
    k = G.modes - split
    target = split + m
    # project from the highest index down so earlier indices stay valid
    for j in sorted((split + i for i in range(k) if i != m), reverse=True):
        cov, mean = apply_map(cov, mean, vacuum_projection_choi(), [j])
        if j < target:
            target -= 1
    idx = mode_indices([target])
    return control_params_single(cov[np.ix_(idx, idx)], mean[idx])


def _rotation_blocks(thetas):
    return block_diag(*[rotation(t).symplectic for t in np.atleast_1d(thetas)])


def rotation_transform(moments: ControlMoments, thetas):
    """Rotate each control mode by its angle; ``C -> O C O^T``, ``beta -> O beta``."""
    O = _rotation_blocks(thetas)
    return ControlMoments(O @ moments.C @ O.T, O @ moments.beta)


def damping_domain_check(C, t):
    """True when damping with parameters ``t`` (one per mode) is admissible.

    Requires ``|t_m| > 1`` and a positive definite transformed covariance.
    """
    t = np.atleast_1d(np.asarray(t, dtype=float))
    C = np.asarray(C, dtype=float)
    if np.any(np.abs(t[np.isfinite(t)]) <= 1):
        return False
    try:
        Cp, _ = _damped(C, np.zeros(C.shape[0]), t)
    except np.linalg.LinAlgError:
        return False
    return bool(np.all(np.isfinite(Cp)) and np.linalg.eigvalsh(Cp).min() > 0)


def _damped(C, beta, t):
    """Damped moments written with ``u = 1/t`` so that ``t = inf`` is regular.

    ``C' = U + S (C U + I)^{-1} C S`` and ``beta' = S (C U + I)^{-1} beta``
    with ``U = diag(1/t)`` and ``S = diag(sqrt(1 - 1/t^2))``.  For
    ``t < -1`` this is the transform with ``sqrt(T^2 - 1)`` replaced by
    ``sign(T) sqrt(T^2 - 1)``, which is what the filter ``exp(-lambda n)``
    with negative ``lambda`` produces.
    """
    t = np.repeat(np.atleast_1d(np.asarray(t, dtype=float)), 2)
    u = np.where(np.isfinite(t), 1.0 / t, 0.0)
    U = np.diag(u)
    S = np.diag(np.sqrt(1.0 - u * u))
    N = np.linalg.inv(C @ U + np.eye(t.size))
    Cp = U + S @ N @ C @ S
    return 0.5 * (Cp + Cp.T), S @ N @ np.asarray(beta, dtype=float)


def damping_transform(moments: ControlMoments, t):
    """Control moments after damping ``exp(-lambda_m n_m)``, ``t_m = coth(lambda_m)``.

    ``C' = T - sqrt(T^2 - 1)(C + T)^{-1} sqrt(T^2 - 1)`` and
    ``beta' = sqrt(T^2 - 1)(C + T)^{-1} beta``; ``t_m = inf`` leaves mode
    ``m`` unchanged.
    """
    if not damping_domain_check(moments.C, t):
        raise ValueError("damping parameters outside the admissible domain")
    return ControlMoments(*_damped(moments.C, moments.beta, t))


def damp_state(G: GaussianPure, split, t):
    """Apply damping to the control modes of a full state (Choi route)."""
    t = np.atleast_1d(np.asarray(t, dtype=float))
    cov, mean = G.cov, G.mean
    for m, tm in enumerate(t):
        if np.isinf(tm):
            continue
        cov, mean = apply_map(cov, mean, damping_choi([tm]), [split + m])
    return GaussianPure(cov, mean)


@dataclass(frozen=True)
class Regime:
    kind: str
    parity: int = None
    amplitude: float = None
    p0: float = None
    gamma: float = None


def classify(s0, delta0, n):
    """Qualitative regime of the heralded state.

    ``kind`` is ``"subtracted"`` (s0 > 1), ``"added"`` (s0 < 1) or
    ``"critical"``; ``"fock"`` when ``s0 = 0`` and ``delta0 = 0``.
    Cat parity and amplitude ``sqrt((n + 1/2) / s0)`` are filled in for
    ``delta0 = 0, s0 >= 1``; cubic-phase parameters for ``s0 = 0``.
    """
    if abs(s0 - 1) <= TOL_CRITICAL:
        kind = "critical"
    elif s0 > 1:
        kind = "subtracted"
    else:
        kind = "added"
    out = dict(kind=kind)
    if s0 == 0 and delta0 == 0:
        out["kind"] = "fock"
    if delta0 == 0 and s0 >= 1 - TOL_CRITICAL:
        out["parity"] = (-1) ** n
        out["amplitude"] = np.sqrt((n + 0.5) / max(s0, 1.0 if kind == "critical" else s0))
    if s0 == 0 and delta0 != 0:
        out["p0"] = 2 * np.sqrt(n + 0.5)
        out["gamma"] = 1.0 / (24 * np.sqrt(n + 0.5))
    return Regime(**out)


def convertible(moments_a: ControlMoments, moments_b: ControlMoments, tol=1e-9, res_tol=1e-8):
    """Whether a Gaussian map on the signal turns generator ``a`` into ``b``.

    Holds iff ``C_b <= C_a`` and ``beta_a - beta_b`` lies in the range of
    ``C_a - C_b``.
    """
    D = moments_a.C - moments_b.C
    if np.linalg.eigvalsh(0.5 * (D + D.T)).min() < -tol:
        return False
    r = moments_a.beta - moments_b.beta
    nr = np.linalg.norm(r)
    if nr == 0:
        return True
    x, *_ = np.linalg.lstsq(D, r, rcond=None)
    return bool(np.linalg.norm(D @ x - r) <= res_tol * nr)


def convertible_params(s0, delta0, s0p, delta0p, n):
    """Parameter-level convertibility of ``(s0, delta0, n)`` into ``(s0p, delta0p, n)``."""
    if n < 2:
        raise ValueError("parameter criterion needs n >= 2")
    if 0 <= s0 < 1:
        return True
    if s0p > s0:
        return True
    return bool(abs(s0 - 1) <= TOL_CRITICAL and abs(s0p - 1) <= TOL_CRITICAL
                and abs(np.real(delta0)) <= 1e-9)


__all__ = [
    "ControlMoments", "ControlParams", "GeneratorSpec", "Regime",
    "control_params_single", "control_params_multi", "invariant_control_params",
    "rotation_transform", "damping_transform", "damping_domain_check", "damp_state",
    "classify", "convertible", "convertible_params", "diagonal_frame",
]
