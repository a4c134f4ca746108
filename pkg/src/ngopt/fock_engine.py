"""Truncated Fock-space evaluation of Gaussian states and heralded outputs.

Amplitudes of a pure Gaussian state follow from its Bargmann form
``|psi> = c exp(a^T A a / 2 + b^T a) |0>`` (``a`` standing for creation
operators) through the recurrence

    sqrt(k_i) <k|psi> = b_i <k - e_i|psi> + sum_j A_ij sqrt(k_j - d_ij) <k - e_i - e_j|psi>.
"""

import os
import warnings
from dataclasses import dataclass

import numba
import numpy as np

from .gaussian_maps import (FilterMatrixRep, annihilators, choi_annihilators,
                            compose_many, unitary_filter, vacuum_probability)
from .symplectic_core import GaussianPure, GaussianUnitary, minimal_purification

TAIL_TOL = float(os.environ.get("NGOPT_TAIL_TOL", "1e-8"))
PROB_FLOOR = 1e-300
MAX_ENTRIES = 3e7


class CutoffWarning(UserWarning):
    pass


@dataclass
class FockVector:
    """Single-mode truncated state; ``amps[n] = <n|psi>``."""

    amps: np.ndarray
    normalized: bool = True

    @property
    def cutoff(self):
        return self.amps.size - 1

    def norm(self):
        return float(np.sqrt(np.sum(np.abs(self.amps) ** 2)))

    def tail_mass(self):
        return float(np.sum(np.abs(self.amps[-2:]) ** 2))

    def padded(self, cutoff):
        out = np.zeros(cutoff + 1, complex)
        m = min(cutoff, self.cutoff) + 1
        out[:m] = self.amps[:m]
        return FockVector(out, self.normalized)


@dataclass
class FockTensor:
    """Multimode truncated amplitudes, one axis per mode."""

    amps: np.ndarray
    captured: float = 1.0

    @property
    def cutoffs(self):
        return tuple(s - 1 for s in self.amps.shape)

    def tail_mass(self, axes=None):
        axes = range(self.amps.ndim) if axes is None else axes
        p = np.abs(self.amps) ** 2
        tail = 0.0
        for ax in axes:
            sl = [slice(None)] * self.amps.ndim
            sl[ax] = slice(-2, None) if self.amps.shape[ax] > 2 else slice(-1, None)
            tail = max(tail, float(np.sum(p[tuple(sl)])))
        return tail


# ---------------------------------------------------------------------------
# Bargmann form


def _bargmann_from_annihilators(alpha, g):
    """``A`` and ``b`` of the state annihilated by ``alpha^T q - g``."""
    ax, ap = alpha[0::2, :].T, alpha[1::2, :].T
    Ma = ax - 1j * ap
    Mb = ax + 1j * ap
    A = -np.linalg.solve(Ma, Mb)
    b = np.linalg.solve(Ma, g)
    return 0.5 * (A + A.T), b


def bargmann(cov, mean):
    """Bargmann triple ``(A, b, c)`` of a pure Gaussian state.

    ``c = <0|psi>`` is chosen real and positive.
    """
    alpha, g = annihilators(cov, mean)
    A, b = _bargmann_from_annihilators(alpha, g)
    n = cov.shape[0] // 2
    c = np.sqrt(vacuum_probability(cov, mean, range(n)))
    return A, b, c


@numba.njit(cache=True)
def _recurrence(A, b, c, shape):
    N = len(shape)
    size = 1
    for s in shape:
        size *= s
    strides = np.empty(N, np.int64)
    acc = 1
    for i in range(N - 1, -1, -1):
        strides[i] = acc
        acc *= shape[i]
    G = np.zeros(size, np.complex128)
    G[0] = c
    idx = np.zeros(N, np.int64)
    sq = np.sqrt(np.arange(max(shape) + 1).astype(np.float64))
    for flat in range(1, size):
        # odometer increment, last axis fastest
        ax = N - 1
        while True:
            idx[ax] += 1
            if idx[ax] < shape[ax]:
                break
            idx[ax] = 0
            ax -= 1
        i = N - 1
        while idx[i] == 0:
            i -= 1
        prev = flat - strides[i]
        val = b[i] * G[prev]
        for j in range(N):
            kj = idx[j] - 1 if j == i else idx[j]
            if kj > 0:
                val += A[i, j] * sq[kj] * G[prev - strides[j]]
        G[flat] = val / sq[idx[i]]
    return G


def bargmann_amplitudes(A, b, c, shape):
    shape = tuple(int(s) for s in shape)
    if np.prod(shape, dtype=float) > MAX_ENTRIES:
        raise MemoryError(f"Fock box {shape} too large")
    G = _recurrence(np.ascontiguousarray(A, np.complex128),
                    np.ascontiguousarray(b, np.complex128), complex(c),
                    np.array(shape, np.int64))
    return G.reshape(shape)


def gaussian_fock_amplitudes(G: GaussianPure, cutoffs):
    """``<n|G>`` for all ``n`` up to ``cutoffs`` (inclusive) per mode."""
    cutoffs = np.broadcast_to(np.atleast_1d(cutoffs), (G.modes,))
    A, b, c = bargmann(G.cov, G.mean)
    amps = bargmann_amplitudes(A, b, c, tuple(int(k) + 1 for k in cutoffs))
    t = FockTensor(amps, float(np.sum(np.abs(amps) ** 2)))
    if t.tail_mass() > TAIL_TOL:
        warnings.warn(f"tail mass {t.tail_mass():.1e} above tolerance", CutoffWarning)
    return t


def default_cutoff(pattern):
    return int(max(3 * int(np.sum(pattern)), 40))


def _herald_box(A, b, c, l, pattern, cutoff):
    shape = (cutoff + 1,) * l + tuple(int(n) + 1 for n in pattern)
    amps = bargmann_amplitudes(A, b, c, shape)
    return amps[(Ellipsis,) + tuple(int(n) for n in pattern)]


def _herald_auto(A, b, c, l, pattern, cutoff, tail_tol, max_cutoff):
    cut = default_cutoff(pattern) if cutoff is None else int(cutoff)
    while True:
        psi = _herald_box(A, b, c, l, pattern, cut)
        p = float(np.sum(np.abs(psi) ** 2))
        if l == 0:
            return psi, p, cut
        tail = FockTensor(psi).tail_mass() / max(p, PROB_FLOOR)
        if tail < tail_tol or cutoff is not None:
            if tail >= tail_tol:
                warnings.warn(f"relative tail mass {tail:.1e} at cutoff {cut}", CutoffWarning)
            return psi, p, cut
        nxt = 2 * cut
        if nxt > max_cutoff or (nxt + 1) ** l * np.prod(np.asarray(pattern) + 1.0) > MAX_ENTRIES:
            warnings.warn(f"relative tail mass {tail:.1e} at cutoff {cut}; "
                          "cannot grow further", CutoffWarning)
            return psi, p, cut
        cut = nxt


def herald(G: GaussianPure, split, pattern, cutoff=None, tail_tol=None, max_cutoff=1600):
    """Project the control modes of ``G`` on ``|pattern>``.

    Parameters
    ----------
    G : GaussianPure
        State with the ``l`` signal modes first and ``k`` control modes last.
    split : (int, int)
    pattern : sequence of int
    cutoff : int, optional
        Signal cutoff.  By default it starts at ``max(3 sum(n), 40)`` and
        doubles until the tail mass falls below ``tail_tol``.

    Returns
    -------
    signal : FockVector or FockTensor
        Normalized heralded state.
    probability : float
    """
    l, k = split
    pattern = np.atleast_1d(pattern).astype(int)
    if len(pattern) != k or l + k != G.modes:
        raise ValueError("pattern or split does not match the state")
    tail_tol = TAIL_TOL if tail_tol is None else tail_tol
    A, b, c = bargmann(G.cov, G.mean)
    psi, p, _ = _herald_auto(A, b, c, l, pattern, cutoff, tail_tol, max_cutoff)
    if p < PROB_FLOOR:
        raise FloatingPointError("heralding probability underflow")
    psi = psi / np.sqrt(p)
    out = FockVector(psi) if l == 1 else FockTensor(psi, 1.0)
    return out, p


def success_probability(C, beta, pattern, cutoff=None, tail_tol=None, max_cutoff=1600):
    """Heralding probability from the control moments alone.

    Builds the minimal purification of ``(C, beta)`` and sums the heralded
    amplitudes over the signal modes.
    """
    G, r = minimal_purification(C, beta)
    pattern = np.atleast_1d(pattern).astype(int)
    tail_tol = TAIL_TOL if tail_tol is None else tail_tol
    A, b, c = bargmann(G.cov, G.mean)
    _, p, _ = _herald_auto(A, b, c, r, pattern, cutoff, tail_tol, max_cutoff)
    return p


def mixed_bargmann(C, beta):
    """Bargmann triple of the density matrix of a (mixed) Gaussian state.

    ``rho(z, w) = c exp(z^T A z / 2 + b^T z)`` over ``z = (z_bra..., z_ket...)``
    so that ``<m|rho|n>`` is the ``(m, n)`` amplitude of the recurrence.
    """
    C = np.asarray(C, dtype=float)
    k = C.shape[0] // 2
    # ladder vector (a_1..a_k, a_1^dag..a_k^dag) = T q, a = (x + i p) / 2
    T = np.zeros((2 * k, 2 * k), complex)
    for j in range(k):
        T[j, 2 * j], T[j, 2 * j + 1] = 0.5, 0.5j
        T[k + j, 2 * j], T[k + j, 2 * j + 1] = 0.5, -0.5j
    Q = (T @ C @ T.conj().T).conj() + 0.5 * np.eye(2 * k)
    Qi = np.linalg.inv(Q)
    X = np.block([[np.zeros((k, k)), np.eye(k)], [np.eye(k), np.zeros((k, k))]])
    A = X @ (np.eye(2 * k) - Qi).conj()
    alpha = T @ np.asarray(beta, dtype=float)
    b = alpha.conj() - A @ alpha
    c = np.exp(-0.5 * alpha @ Qi @ alpha.conj()) / np.sqrt(np.linalg.det(Q))
    return 0.5 * (A + A.T), b, complex(c)


def pattern_probability(C, beta, pattern):
    """Exact probability of a photon pattern on a Gaussian state ``(C, beta)``.

    Uses the density-matrix recurrence on a box of size ``prod(n + 1)^2``,
    so no truncation is involved.
    """
    pattern = np.atleast_1d(pattern).astype(int)
    A, b, c = mixed_bargmann(C, beta)
    shape = tuple(pattern + 1) * 2
    amps = bargmann_amplitudes(A, b, c, shape)
    return float(np.real(amps[tuple(pattern) * 2]))


# ---------------------------------------------------------------------------
# Gaussian operators on Fock vectors


def operator_matrix(op, cutoff, cutoff_in=None):
    """Fock matrix ``<m|F|n>`` of a single-mode Gaussian operator.

    ``op`` is a :class:`GaussianUnitary` (exactly normalized) or a
    :class:`FilterMatrixRep` (defined up to a scalar; scaled so that
    ``<0|F|0> = 1``).
    """
    cutoff_in = cutoff if cutoff_in is None else cutoff_in
    f = unitary_filter(op) if isinstance(op, GaussianUnitary) else op
    alpha, g = choi_annihilators(f)
    A, b = _bargmann_from_annihilators(alpha, g)
    c = 1.0
    if isinstance(op, GaussianUnitary):
        S, d = op.symplectic, op.displacement
        c = np.sqrt(vacuum_probability(S @ S.T, d, range(op.modes)))
    return bargmann_amplitudes(A, b, c, (cutoff + 1, cutoff_in + 1))


def apply_gaussian_unitary_fock(U: GaussianUnitary, v: FockVector, cutoff=None, tol=None):
    """Apply a single-mode Gaussian unitary to a Fock vector.

    The result is truncated at ``cutoff`` (default: that of ``v``); a norm
    loss above ``tol`` raises.
    """
    cutoff = v.cutoff if cutoff is None else cutoff
    tol = 10 * TAIL_TOL if tol is None else tol
    M = operator_matrix(U, cutoff, v.cutoff)
    out = M @ v.amps
    loss = v.norm() ** 2 - float(np.sum(np.abs(out) ** 2))
    if loss > tol:
        raise ValueError(f"norm loss {loss:.1e} exceeds tolerance; raise the cutoff")
    return FockVector(out, v.normalized)


def apply_filter_fock(f: FilterMatrixRep, v: FockVector, cutoff=None, normalize=True):
    cutoff = v.cutoff if cutoff is None else cutoff
    out = operator_matrix(f, cutoff, v.cutoff) @ v.amps
    if normalize:
        out = out / np.linalg.norm(out)
    return FockVector(out, normalize)


# ---------------------------------------------------------------------------
# particle and wave forms


def particle_filter(s0, delta0):
    """Filter ``P`` with ``P a P^{-1} = a`` and ``P a^dag P^{-1} = a^dag + s0 a + delta0``."""
    return FilterMatrixRep(np.array([[1.0, 0.0], [s0, 1.0]]), np.array([0.0, delta0]))


def particle_form(s0, delta0, n, cutoff=None):
    """Normalized ``(a^dag + s0 a + delta0)^n |0>``."""
    cutoff = n if cutoff is None else max(cutoff, n)
    v = np.zeros(cutoff + 2, complex)
    v[0] = 1.0
    sq = np.sqrt(np.arange(cutoff + 2))
    for _ in range(n):
        w = delta0 * v
        w[1:] += sq[1:] * v[:-1]
        w[:-1] += s0 * sq[1:] * v[1:]
        v = w / np.linalg.norm(w)
    return FockVector(v[:cutoff + 1])


def wave_filter(s0, delta0):
    """``exp(-dx p / (2 sqrt(s0+1))) exp(sqrt(s0+1) dp x / 2) exp(-s0 x^2 / 4)``."""
    from .gaussian_maps import exp_p_filter, exp_x2_filter, exp_x_filter
    dx, dp = np.real(delta0), np.imag(delta0)
    g = np.sqrt(s0 + 1.0)
    return compose_many(exp_p_filter(-dx / (2 * g)), exp_x_filter(g * dp / 2),
                        exp_x2_filter(s0 / 4.0))


def p_to_w_unitary(s0, delta0):
    """Gaussian unitary taking the particle form to the wave form.

    With ``a = (x + i p) / 2`` the particle-form core of a generator with
    parameters ``(s0, delta0)`` is ``(a^dag + s0 a + conj(delta0))^n |0>``;
    this unitary maps it onto the wave form for every ``n``.  As a moment map
    it is ``q -> S (q + (dx, dp))`` with ``S = [[0, 1/g], [-g, 0]]`` and
    ``g = sqrt(s0 + 1)``, i.e. a quarter turn followed by a squeeze.
    """
    dx, dp = np.real(delta0), np.imag(delta0)
    g = np.sqrt(s0 + 1.0)
    S = np.array([[0.0, 1.0 / g], [-g, 0.0]])
    return GaussianUnitary(S, S @ np.array([dx, dp]))


def wave_form(s0, delta0, n, cutoff=None):
    """Wave form of the core state, ``U_{p->w}`` applied to the particle form."""
    cutoff = max(default_cutoff([n]), n) if cutoff is None else cutoff
    v = particle_form(s0, np.conj(delta0), n, cutoff)
    return apply_gaussian_unitary_fock(p_to_w_unitary(s0, delta0), v, cutoff, tol=1.0)


# ---------------------------------------------------------------------------
# state functionals


def fidelity(u, v):
    """``|<u|v>|^2`` for normalized vectors (padded to a common cutoff)."""
    a, b = np.asarray(getattr(u, "amps", u)), np.asarray(getattr(v, "amps", v))
    if a.ndim == 1:
        m = max(a.size, b.size)
        a = np.pad(a, (0, m - a.size))
        b = np.pad(b, (0, m - b.size))
    else:
        shape = np.maximum(a.shape, b.shape)
        a = np.pad(a, [(0, s - x) for s, x in zip(shape, a.shape)])
        b = np.pad(b, [(0, s - x) for s, x in zip(shape, b.shape)])
    return float(np.abs(np.vdot(a, b)) ** 2 / (np.vdot(a, a).real * np.vdot(b, b).real))


def _x_operator(cutoff):
    sq = np.sqrt(np.arange(1, cutoff + 1))
    return np.diag(sq, 1) + np.diag(sq, -1)


def _p_operator(cutoff):
    sq = np.sqrt(np.arange(1, cutoff + 1))
    return -1j * (np.diag(sq, 1) - np.diag(sq, -1))


def quadrature_moments(v: FockVector, powers, quadrature="x"):
    """``<q^k>`` (hbar = 2) for each ``k`` in ``powers``.

    The vector is padded by ``max(powers)`` so that ladder products are exact.
    """
    powers = np.atleast_1d(powers)
    kmax = int(powers.max())
    w = v.padded(v.cutoff + kmax).amps
    Q = _x_operator(w.size - 1) if quadrature == "x" else _p_operator(w.size - 1)
    out = []
    cur = w.copy()
    vals = {0: np.vdot(w, w)}
    for k in range(1, kmax + 1):
        cur = Q @ cur
        vals[k] = np.vdot(w, cur)
    for k in powers:
        out.append(vals[int(k)].real)
    return np.array(out)


def hermite_functions(nmax, xs):
    """Normalized Hermite functions ``phi_n(x)`` (hbar = 2), rows ``n = 0..nmax``.

    ``phi_n(x) = (2 pi)^{-1/4} (2^n n!)^{-1/2} H_n(x / sqrt 2) exp(-x^2 / 4)``,
    evaluated with the stable three-term recurrence.
    """
    xs = np.asarray(xs, dtype=float)
    out = np.zeros((nmax + 1,) + xs.shape)
    out[0] = (2 * np.pi) ** -0.25 * np.exp(-xs ** 2 / 4)
    if nmax >= 1:
        out[1] = xs * out[0]
    for n in range(2, nmax + 1):
        out[n] = (xs * out[n - 1] - np.sqrt(n - 1) * out[n - 2]) / np.sqrt(n)
    return out


def x_wavefunction(v: FockVector, xs):
    """``<x|psi>`` on the grid ``xs`` (hbar = 2, ``<x|x'> = delta(x - x')``)."""
    H = hermite_functions(v.cutoff, xs)
    return np.tensordot(v.amps, H, axes=(0, 0))


def wigner_grid(v: FockVector, xs, ps):
    """Wigner function on ``xs`` x ``ps``; rows follow ``ps``, columns ``xs``.

    Normalized so that the integral over ``dx dp`` is 1 (hbar = 2); the
    vacuum has ``W(0, 0) = 1 / (2 pi)``.
    """
    psi = v.amps
    X, P = np.meshgrid(np.asarray(xs, float), np.asarray(ps, float))
    A = (X + 1j * P) / 2
    M = psi.size
    rho = np.outer(psi, psi.conj())
    # iterative Laguerre recursion over matrix elements W_mn
    Wl = [np.exp(-2.0 * np.abs(A) ** 2) / np.pi]
    W = rho[0, 0].real * Wl[0]
    for n in range(1, M):
        Wl.append(2.0 * A * Wl[n - 1] / np.sqrt(n))
        W = W + 2 * np.real(rho[0, n] * Wl[n])
    for m in range(1, M):
        temp = Wl[m].copy()
        Wl[m] = (2 * np.conj(A) * temp - np.sqrt(m) * Wl[m - 1]) / np.sqrt(m)
        W = W + np.real(rho[m, m] * Wl[m])
        for n in range(m + 1, M):
            temp2 = (2 * A * Wl[n - 1] - np.sqrt(m) * temp) / np.sqrt(n)
            temp = Wl[n].copy()
            Wl[n] = temp2
            W = W + 2 * np.real(rho[m, n] * Wl[n])
    return 0.5 * W


__all__ = [
    "FockVector", "FockTensor", "CutoffWarning", "bargmann", "bargmann_amplitudes",
    "gaussian_fock_amplitudes", "herald", "success_probability", "pattern_probability", "mixed_bargmann", "operator_matrix",
    "apply_gaussian_unitary_fock", "apply_filter_fock", "particle_filter",
    "particle_form", "wave_filter", "p_to_w_unitary", "wave_form", "fidelity",
    "quadrature_moments", "hermite_functions", "x_wavefunction", "wigner_grid",
    "default_cutoff",
]
