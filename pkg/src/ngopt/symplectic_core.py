"""Real symplectic algebra for pure Gaussian states.

Conventions
-----------
Quadratures are ordered ``(x1, p1, x2, p2, ...)`` and the vacuum has unit
variance (hbar = 2).  The ladder operator is ``a = (x + i p) / 2``.
"""

from dataclasses import dataclass

import numpy as np
from scipy.linalg import block_diag, schur, sqrtm


def omega(n):
    """Symplectic form for ``n`` modes in interleaved ordering."""
    return np.kron(np.eye(n), np.array([[0.0, 1.0], [-1.0, 0.0]]))


def zmat(n):
    """``diag(1, -1)`` repeated over ``n`` modes."""
    return np.kron(np.eye(n), np.diag([1.0, -1.0]))


def block_to_interleaved(n):
    """Index permutation taking block order ``(x.., p..)`` to interleaved order.

    ``v_inter = v_block[perm]``.
    """
    perm = np.empty(2 * n, dtype=int)
    perm[0::2] = np.arange(n)
    perm[1::2] = np.arange(n) + n
    return perm


def interleaved_to_block(n):
    """Index permutation taking interleaved order to block order."""
    return np.argsort(block_to_interleaved(n))


def db_to_r(r_db):
    """Squeezing in dB to squeezing parameter, ``r = r_dB ln10 / 20``."""
    return np.asarray(r_db, dtype=float) * np.log(10.0) / 20.0


def mode_indices(modes):
    """Quadrature indices for a list of mode indices."""
    modes = np.atleast_1d(np.asarray(modes, dtype=int))
    return np.ravel(np.column_stack([2 * modes, 2 * modes + 1]))


def is_symplectic(S, tol=1e-10):
    n = S.shape[0] // 2
    W = omega(n)
    return np.allclose(S @ W @ S.T, W, atol=tol)


@dataclass(frozen=True)
class GaussianUnitary:
    """Gaussian unitary ``q -> S q + d`` acting on the quadrature vector."""

    symplectic: np.ndarray
    displacement: np.ndarray

    def __post_init__(self):
        S = np.asarray(self.symplectic, dtype=float)
        d = np.asarray(self.displacement, dtype=float)
        if S.ndim != 2 or S.shape[0] != S.shape[1] or S.shape[0] % 2:
            raise ValueError("symplectic matrix must be square with even size")
        if not is_symplectic(S, 1e-8 * max(1.0, np.abs(S).max() ** 2)):
            raise ValueError("matrix is not symplectic")
        if d.shape != (S.shape[0],):
            raise ValueError("displacement has wrong length")
        object.__setattr__(self, "symplectic", S)
        object.__setattr__(self, "displacement", d)

    @property
    def modes(self):
        return self.symplectic.shape[0] // 2

    @classmethod
    def identity(cls, n):
        return cls(np.eye(2 * n), np.zeros(2 * n))

    def apply(self, cov, mean):
        S = self.symplectic
        return S @ cov @ S.T, S @ mean + self.displacement

    def compose(self, other):
        """Return ``self`` after ``other``."""
        S = self.symplectic @ other.symplectic
        d = self.symplectic @ other.displacement + self.displacement
        return GaussianUnitary(S, d)

    def inverse(self):
        Si = np.linalg.inv(self.symplectic)
        return GaussianUnitary(Si, -Si @ self.displacement)

    def embed(self, modes, total):
        """Lift to ``total`` modes, acting on ``modes``."""
        idx = mode_indices(modes)
        S = np.eye(2 * total)
        S[np.ix_(idx, idx)] = self.symplectic
        d = np.zeros(2 * total)
        d[idx] = self.displacement
        return GaussianUnitary(S, d)


def squeezer(r):
    """Single-mode squeezer; ``r > 0`` stretches x and shrinks p."""
    return GaussianUnitary(np.diag([np.exp(r), np.exp(-r)]), np.zeros(2))


def rotation(theta):
    """Phase rotation ``exp(-i theta n)``: ``(x, p)`` rotates by ``theta``."""
    c, s = np.cos(theta), np.sin(theta)
    return GaussianUnitary(np.array([[c, -s], [s, c]]), np.zeros(2))


def displacement(beta):
    beta = np.asarray(beta, dtype=float)
    return GaussianUnitary(np.eye(beta.size), beta)


def beamsplitter(R):
    """Two-mode beamsplitter with reflectance ``R``.

    Out 1 = sqrt(1-R) in1 - sqrt(R) in2, out 2 = sqrt(R) in1 + sqrt(1-R) in2.
    """
    t, r = np.sqrt(1.0 - R), np.sqrt(R)
    return GaussianUnitary(np.kron(np.array([[t, -r], [r, t]]), np.eye(2)), np.zeros(4))


def passive(O):
    """Passive linear optics from a real orthogonal mode matrix."""
    O = np.asarray(O, dtype=float)
    return GaussianUnitary(np.kron(O, np.eye(2)), np.zeros(2 * O.shape[0]))


@dataclass(frozen=True)
class GaussianPure:
    """Pure Gaussian state given by covariance ``cov`` and mean ``mean``."""

    cov: np.ndarray
    mean: np.ndarray

    def __post_init__(self):
        cov = np.asarray(self.cov, dtype=float)
        mean = np.asarray(self.mean, dtype=float)
        if cov.ndim != 2 or cov.shape[0] != cov.shape[1] or cov.shape[0] % 2:
            raise ValueError("covariance must be square with even size")
        if mean.shape != (cov.shape[0],):
            raise ValueError("mean has wrong length")
        scale = max(1.0, np.abs(cov).max())
        if not np.allclose(cov, cov.T, atol=1e-10 * scale):
            raise ValueError("covariance is not symmetric")
        cov = 0.5 * (cov + cov.T)
        n = cov.shape[0] // 2
        W = omega(n)
        M = cov @ W
        if not np.allclose(M @ M, -np.eye(2 * n), atol=1e-8 * scale ** 2):
            raise ValueError("covariance does not describe a pure state")
        object.__setattr__(self, "cov", cov)
        object.__setattr__(self, "mean", mean)

    @property
    def modes(self):
        return self.cov.shape[0] // 2

    @classmethod
    def vacuum(cls, n):
        return cls(np.eye(2 * n), np.zeros(2 * n))

    def transform(self, U: GaussianUnitary, modes=None):
        if modes is not None:
            U = U.embed(modes, self.modes)
        return GaussianPure(*U.apply(self.cov, self.mean))

    def block(self, modes):
        idx = mode_indices(modes)
        return self.cov[np.ix_(idx, idx)], self.mean[idx]

    def permute(self, order):
        idx = mode_indices(order)
        return GaussianPure(self.cov[np.ix_(idx, idx)], self.mean[idx])


def tmss_cov(nu):
    """Covariance of a two-mode squeezed vacuum with symplectic eigenvalue ``nu``."""
    c = np.sqrt(max(nu * nu - 1.0, 0.0))
    Z = np.diag([1.0, -1.0])
    return np.block([[nu * np.eye(2), c * Z], [c * Z, nu * np.eye(2)]])


def tmss(a):
    """Two-mode squeezed vacuum with ``a = exp(2 r)``.

    Its Fock amplitudes are ``2 sqrt(a) / (a + 1) ((a - 1) / (a + 1))**j``
    and each mode has variance ``(a + 1/a) / 2``.
    """
    nu = 0.5 * (a + 1.0 / a)
    return GaussianPure(tmss_cov(nu), np.zeros(4))


def check_uncertainty(cov, tol=1e-10):
    """True when ``cov + i Omega`` is positive semidefinite."""
    cov = np.asarray(cov, dtype=float)
    if cov.ndim != 2 or cov.shape[0] != cov.shape[1] or cov.shape[0] % 2:
        raise ValueError("expected a square matrix of even size")
    H = cov + 1j * omega(cov.shape[0] // 2)
    return bool(np.linalg.eigvalsh(0.5 * (H + H.conj().T)).min() >= -tol)


def symplectic_eigenvalues(cov):
    n = cov.shape[0] // 2
    ev = np.abs(np.linalg.eigvals(1j * omega(n) @ cov))
    return np.sort(ev)[::-1][0::2]


@dataclass(frozen=True)
class WilliamsonResult:
    symplectic: np.ndarray
    eigenvalues: np.ndarray

    @property
    def diagonal(self):
        return np.diag(np.repeat(self.eigenvalues, 2))


def williamson(C):
    """Williamson decomposition ``C = S D S^T`` with eigenvalues descending.

    The antisymmetric matrix ``C^{-1/2} Omega C^{-1/2}`` is brought to real
    Schur form, which handles degenerate spectra without special cases.
    """
    C = np.asarray(C, dtype=float)
    C = 0.5 * (C + C.T)
    n = C.shape[0] // 2
    if np.linalg.eigvalsh(C).min() <= 0:
        raise ValueError("matrix is not positive definite")
    Cm12 = np.real(sqrtm(np.linalg.inv(C)))
    Cm12 = 0.5 * (Cm12 + Cm12.T)
    T, K = schur(Cm12 @ omega(n) @ Cm12, output="real")
    # each 2x2 block of T is [[0, w], [-w, 0]]; make w > 0
    nus = np.empty(n)
    for i in range(n):
        w = T[2 * i, 2 * i + 1]
        if w < 0:
            K[:, [2 * i, 2 * i + 1]] = K[:, [2 * i + 1, 2 * i]]
            w = -w
        nus[i] = 1.0 / w
    order = np.argsort(-nus, kind="stable")
    K = K[:, mode_indices(order)]
    nus = nus[order]
    # C^{-1/2} K D^{1/2} maps D to C and satisfies S^{-1} form; invert
    Sinv_T = Cm12 @ K @ np.diag(np.repeat(np.sqrt(nus), 2))
    S = np.linalg.inv(Sinv_T).T
    if nus.min() < 1 - 1e-10 and check_uncertainty(C, 1e-9):
        nus = np.maximum(nus, 1.0)
    return WilliamsonResult(S, nus)


@dataclass(frozen=True)
class CanonicalForm:
    eigenvalues: np.ndarray
    signal_unitary: GaussianUnitary
    control_unitary: GaussianUnitary
    schmidt_rank: int


def canonical_cov(nus, l):
    """Covariance of ``l`` signal + ``len(nus)`` control modes in canonical form.

    Signal mode ``i`` is paired with control mode ``i`` by a TMSS of
    eigenvalue ``nus[i]``; unpaired modes are vacua.
    """
    nus = np.asarray(nus, dtype=float)
    k = nus.size
    N = l + k
    cov = np.eye(2 * N)
    Z = np.diag([1.0, -1.0])
    for i, nu in enumerate(nus):
        if i >= l:
            if nu > 1 + 1e-8:
                raise ValueError("too few signal modes for this control block")
            continue
        s, c = slice(2 * i, 2 * i + 2), slice(2 * (l + i), 2 * (l + i) + 2)
        cov[s, s] = nu * np.eye(2)
        cov[c, c] = nu * np.eye(2)
        off = np.sqrt(max(nu * nu - 1.0, 0.0)) * Z
        cov[s, c] = off
        cov[c, s] = off
    return cov


def canonical_form(G: GaussianPure, split, tol=1e-8):
    """Decompose ``G`` into TMSS pairs, vacua and local unitaries.

    Returns a :class:`CanonicalForm` with
    ``G = (U_s ⊗ U_c) canonical_cov(eigenvalues)``.
    """
    l, k = split
    if l + k != G.modes:
        raise ValueError("split does not match the number of modes")
    cov, mean = G.cov, G.mean
    ns = 2 * l
    C = cov[ns:, ns:]
    wc = williamson(C)
    Sc = wc.symplectic
    nus = wc.eigenvalues
    r = int(np.sum(nus > 1 + tol))
    if r > l:
        raise ValueError("control block has more entangled modes than signals")
    Sc_inv = np.linalg.inv(Sc)
    A = cov[:ns, :ns]
    B = cov[:ns, ns:] @ Sc_inv.T
    Sa = williamson(A).symplectic if l else np.eye(0)
    Sa_inv = np.linalg.inv(Sa) if l else Sa
    B = Sa_inv @ B
    # fix the residual orthogonal freedom of the entangled signal modes
    O = np.eye(ns)
    if r:
        idx = np.arange(2 * r)
        scale = np.repeat(np.sqrt(nus[:r] ** 2 - 1.0), 2)
        Q = B[np.ix_(idx, idx)] / scale[None, :]
        O[np.ix_(idx, idx)] = zmat(r) @ Q.T
    Us = GaussianUnitary(Sa @ O.T, mean[:ns])
    Uc = GaussianUnitary(Sc, mean[ns:])
    full = block_diag(Us.symplectic, Sc) if l else Sc
    rebuilt = full @ canonical_cov(nus, l) @ full.T
    err = np.abs(rebuilt - cov).max()
    if err > 1e-6 * max(1.0, np.abs(cov).max()):
        raise ValueError(f"canonical form reconstruction failed (error {err:.2e}); "
                         f"symplectic eigenvalues {nus}")
    return CanonicalForm(nus, Us, Uc, r)


def minimal_purification(C, beta, tol=1e-8):
    """Pure state of ``r`` signal modes and the control modes with moments ``(C, beta)``.

    Returns the state and ``r``, the number of signal modes.
    """
    wc = williamson(C)
    nus = wc.eigenvalues
    r = int(np.sum(nus > 1 + tol))
    cov = canonical_cov(nus, r)
    S = block_diag(np.eye(2 * r), wc.symplectic)
    mean = np.concatenate([np.zeros(2 * r), np.asarray(beta, dtype=float)])
    return GaussianPure(S @ cov @ S.T, mean), r


def cayley(C, beta):
    """``C~ = (C + I)^{-1}(C - I)``, ``beta~ = (C + I)^{-1} beta``."""
    C = np.asarray(C, dtype=float)
    P = C + np.eye(C.shape[0])
    if np.linalg.cond(P) > 1e12:
        raise ValueError("C + I is singular")
    Pi = np.linalg.inv(P)
    return Pi @ (C - np.eye(C.shape[0])), Pi @ np.asarray(beta, dtype=float)


def inverse_cayley(Ct, beta_t):
    Ct = np.asarray(Ct, dtype=float)
    I = np.eye(Ct.shape[0])
    if np.linalg.cond(I - Ct) > 1e12:
        raise ValueError("I - C~ is singular")
    Mi = np.linalg.inv(I - Ct)
    return (I + Ct) @ Mi, 2.0 * Mi @ np.asarray(beta_t, dtype=float)


def random_symplectic_orthogonal(n, rng):
    """Haar-random passive transformation as a real 2n x 2n matrix."""
    if n == 1:
        return rotation(rng.uniform(0, 2 * np.pi)).symplectic
    Z = (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))) / np.sqrt(2)
    Q, R = np.linalg.qr(Z)
    U = Q * (np.diag(R) / np.abs(np.diag(R)))
    S = np.empty((2 * n, 2 * n))
    S[0::2, 0::2] = U.real
    S[0::2, 1::2] = -U.imag
    S[1::2, 0::2] = U.imag
    S[1::2, 1::2] = U.real
    return S


def random_generator(k_signal, k_control, r_max, d_max, seed):
    """Random pure Gaussian generator ``D(d) W S(r) V |0>``.

    ``W`` and ``V`` are Haar-random passive transformations, ``r`` is uniform
    in ``[0, r_max]`` per mode and ``d`` uniform in ``[0, d_max]`` per quadrature.
    """
    rng = np.random.default_rng(seed)
    n = k_signal + k_control
    V = random_symplectic_orthogonal(n, rng)
    W = random_symplectic_orthogonal(n, rng)
    r = rng.uniform(0, r_max, n)
    d = rng.uniform(0, d_max, 2 * n)
    S = W @ np.diag(np.repeat(np.exp(r), 2) * np.tile([1.0, 0.0], n)
                    + np.repeat(np.exp(-r), 2) * np.tile([0.0, 1.0], n)) @ V
    return GaussianPure(S @ S.T, d)


__all__ = [
    "omega", "zmat", "GaussianUnitary", "GaussianPure", "WilliamsonResult",
    "CanonicalForm", "check_uncertainty", "williamson", "canonical_form",
    "canonical_cov", "minimal_purification", "cayley", "inverse_cayley",
    "random_generator", "tmss", "tmss_cov", "squeezer", "rotation",
    "displacement", "beamsplitter", "passive", "db_to_r",
    "symplectic_eigenvalues", "block_to_interleaved", "interleaved_to_block",
    "mode_indices",
]
