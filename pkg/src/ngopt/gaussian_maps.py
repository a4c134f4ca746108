"""Gaussian CP maps in Choi form and Gaussian filters.

A map ``M`` acting on ``k`` modes is stored through its Choi state
``(M ⊗ I)|Phi><Phi|`` with ``|Phi> = sum_j |j>|j>``.  The first modes of the
Choi state are the outputs, the last ``k`` the inputs, so that

    choi_cov = [[J, L^T],
                [L, K  ]]          choi_mean = (eps, delta)

A Gaussian filter ``F`` (possibly non-unitary and unbounded) is stored by its
action on ladder operators, ``F v F^{-1} = S v + b`` with
``v = (a1, a1^dag, a2, a2^dag, ...)``.
"""

from dataclasses import dataclass, field

import numpy as np

from .symplectic_core import mode_indices, omega, zmat

PIVOT_COND = 1e12

# ladder vector v = R q for one mode, a = (x + i p) / 2
_R1 = 0.5 * np.array([[1.0, 1.0j], [1.0, -1.0j]])
_R1_INV = np.array([[1.0, 1.0], [-1.0j, 1.0j]])


def _ladder_basis(n):
    return np.kron(np.eye(n), _R1), np.kron(np.eye(n), _R1_INV)


@dataclass(frozen=True)
class GaussianCPMap:
    """Gaussian CP map from ``in_modes`` to ``out_modes`` modes.

    ``identity`` marks the exact identity channel (the infinite-squeezing
    limit of the Choi state), kept apart from any finite matrix.
    ``unphysical`` marks maps whose Choi covariance violates the uncertainty
    relation; they may still be applied when the output state is valid.
    """

    in_modes: int
    out_modes: int
    choi_cov: np.ndarray = None
    choi_mean: np.ndarray = None
    unphysical: bool = False
    identity: bool = False

    @classmethod
    def make_identity(cls, k):
        return cls(k, k, None, None, False, True)

    @property
    def blocks(self):
        j = 2 * self.out_modes
        S = self.choi_cov
        return S[:j, :j], S[j:, :j], S[j:, j:], self.choi_mean[:j], self.choi_mean[j:]


def damping_choi(t):
    """Choi state of the damping filter ``exp(-lambda n)`` with ``t = coth(lambda)``.

    ``t`` is a per-mode sequence; ``np.inf`` on every mode returns the
    identity map.  Values with ``t < -1`` correspond to negative ``lambda``
    and produce a map flagged as unphysical.
    """
    t = np.atleast_1d(np.asarray(t, dtype=float))
    k = t.size
    if np.all(np.isinf(t)):
        return GaussianCPMap.make_identity(k)
    if np.any(np.isinf(t)):
        raise ValueError("mixed infinite and finite t; damp the finite modes only")
    if np.any(np.abs(t) <= 1):
        raise ValueError("damping parameter must satisfy |t| > 1")
    T = np.diag(np.repeat(t, 2))
    # sign(t) keeps the Choi state equal to sum_j exp(-lambda j)|jj>
    Lc = np.diag(np.repeat(np.sign(t) * np.sqrt(t * t - 1.0), 2)) @ zmat(k)
    cov = np.block([[T, Lc], [Lc, T]])
    return GaussianCPMap(k, k, cov, np.zeros(4 * k), bool(np.any(t < 0)), False)


def vacuum_projection_choi():
    """Choi state of the projection ``<0| . |0>`` (one input, no output)."""
    return GaussianCPMap(1, 0, np.eye(2), np.zeros(2), False, False)


def apply_map(cov, mean, cpmap: GaussianCPMap, target_modes):
    """Apply ``cpmap`` to ``target_modes`` of a Gaussian state.

    Output modes of the map replace the targets in place (when the map has
    as many outputs as inputs) or are removed (projections).  The returned
    moments describe the normalized output; the probability factor is not
    returned.

    Returns
    -------
    cov, mean : ndarray
    """
    cov = np.asarray(cov, dtype=float)
    mean = np.asarray(mean, dtype=float)
    target_modes = list(np.atleast_1d(target_modes))
    if len(target_modes) != cpmap.in_modes:
        raise ValueError("target mode count does not match the map")
    if cpmap.identity:
        return cov.copy(), mean.copy()
    n = cov.shape[0] // 2
    others = [m for m in range(n) if m not in target_modes]
    X = mode_indices(target_modes)
    O = mode_indices(others) if others else np.array([], dtype=int)
    CX = cov[np.ix_(X, X)]
    bX = mean[X]
    A_O = cov[np.ix_(O, O)]
    a_O = mean[O]
    B_OX = cov[np.ix_(O, X)]
    J, L, K, eps, delta = cpmap.blocks
    Z = zmat(cpmap.in_modes)
    P = K + Z @ CX @ Z
    if np.linalg.cond(P) > PIVOT_COND:
        raise np.linalg.LinAlgError("singular pivot block in map application")
    N = np.linalg.inv(P)
    r = delta - Z @ bX
    out_cov = J - L.T @ N @ L
    out_mean = eps - L.T @ N @ r
    cross = L.T @ N @ Z @ B_OX.T
    rest_cov = A_O - B_OX @ Z @ N @ Z @ B_OX.T
    rest_mean = a_O + B_OX @ Z @ N @ r
    jo = 2 * cpmap.out_modes
    if cpmap.out_modes == cpmap.in_modes:
        new_cov = cov.copy()
        new_mean = mean.copy()
        new_cov[np.ix_(X, X)] = out_cov
        new_cov[np.ix_(X, O)] = cross
        new_cov[np.ix_(O, X)] = cross.T
        new_cov[np.ix_(O, O)] = rest_cov
        new_mean[X] = out_mean
        new_mean[O] = rest_mean
    elif cpmap.out_modes == 0:
        new_cov, new_mean = rest_cov, rest_mean
    else:
        # outputs appended after the remaining modes
        new_cov = np.block([[rest_cov, cross.T], [cross, out_cov]]) if jo else rest_cov
        new_mean = np.concatenate([rest_mean, out_mean])
    new_cov = 0.5 * (new_cov + new_cov.T)
    return new_cov, new_mean


def gaussian_overlap(cov1, mean1, cov2, mean2):
    """``Tr[rho sigma]`` for two Gaussian states (hbar = 2)."""
    n = cov1.shape[0] // 2
    S = cov1 + cov2
    d = mean1 - mean2
    return 2.0 ** n / np.sqrt(np.linalg.det(S)) * np.exp(-0.5 * d @ np.linalg.solve(S, d))


def vacuum_probability(cov, mean, modes):
    """Probability of finding ``modes`` in vacuum."""
    idx = mode_indices(modes)
    return gaussian_overlap(cov[np.ix_(idx, idx)], mean[idx],
                            np.eye(idx.size), np.zeros(idx.size))


# ---------------------------------------------------------------------------
# pure states through their annihilators


def annihilators(cov, mean):
    """Annihilators ``alpha^T (q - mean)`` of a pure Gaussian state.

    Returns ``alpha`` (2N x N complex, columns spanning ker(cov + i Omega))
    and the constants ``g = alpha^T mean``.
    """
    n = cov.shape[0] // 2
    H = cov + 1j * omega(n)
    w, v = np.linalg.eigh(0.5 * (H + H.conj().T))
    alpha = v[:, :n]
    return alpha, alpha.T @ mean


def moments_from_annihilators(alpha, g, check=True):
    """Covariance and mean of the state annihilated by ``alpha^T q - g``."""
    n = alpha.shape[1]
    M = np.hstack([alpha.real, alpha.imag])
    if np.linalg.cond(M) > PIVOT_COND:
        raise np.linalg.LinAlgError("annihilators do not define a normalizable state")
    W = omega(n)
    cov = W @ np.hstack([alpha.imag, -alpha.real]) @ np.linalg.inv(M)
    cov = 0.5 * (cov + cov.T)
    mean = np.linalg.solve(np.vstack([alpha.T.real, alpha.T.imag]),
                           np.concatenate([g.real, g.imag]))
    if check and np.linalg.eigvalsh(cov).min() <= 0:
        raise ValueError("filter output is not a normalizable state")
    return cov, mean


# ---------------------------------------------------------------------------
# filters


@dataclass(frozen=True)
class FilterMatrixRep:
    """Gaussian filter ``F`` with ``F v F^{-1} = S v + b`` on ladder operators."""

    s_matrix: np.ndarray
    b: np.ndarray = field(default=None)

    def __post_init__(self):
        S = np.asarray(self.s_matrix, dtype=complex)
        if S.ndim != 2 or S.shape[0] != S.shape[1] or S.shape[0] % 2:
            raise ValueError("ladder matrix must be square with even size")
        b = np.zeros(S.shape[0], complex) if self.b is None else np.asarray(self.b, complex)
        object.__setattr__(self, "s_matrix", S)
        object.__setattr__(self, "b", b)

    @property
    def modes(self):
        return self.s_matrix.shape[0] // 2

    @classmethod
    def identity(cls, k=1):
        return cls(np.eye(2 * k))

    @classmethod
    def from_quadrature(cls, Sq, bq):
        """From ``F q F^{-1} = Sq q + bq``."""
        n = np.asarray(Sq).shape[0] // 2
        R, Ri = _ladder_basis(n)
        return cls(R @ Sq @ Ri, R @ np.asarray(bq, complex))

    @property
    def quadrature(self):
        R, Ri = _ladder_basis(self.modes)
        return Ri @ self.s_matrix @ R, Ri @ self.b

    def inverse(self):
        Si = np.linalg.inv(self.s_matrix)
        return FilterMatrixRep(Si, -Si @ self.b)

    def transpose(self):
        """Transpose in the Fock basis (x -> x, p -> -p)."""
        Sq, bq = self.quadrature
        Z = zmat(self.modes)
        S2 = np.linalg.inv(Z @ Sq @ Z)
        return FilterMatrixRep.from_quadrature(S2, -S2 @ Z @ bq)

    def is_identity(self, tol=1e-12):
        return (np.allclose(self.s_matrix, np.eye(2 * self.modes), atol=tol)
                and np.allclose(self.b, 0, atol=tol))


def compose_filters(f_outer: FilterMatrixRep, f_inner: FilterMatrixRep):
    """Representation of ``f_outer · f_inner`` (inner acts first on states)."""
    S = f_inner.s_matrix @ f_outer.s_matrix
    b = f_inner.s_matrix @ f_outer.b + f_inner.b
    return FilterMatrixRep(S, b)


def compose_many(*filters):
    """``filters[0] · filters[1] · ...`` as a single representation."""
    out = filters[0]
    for f in filters[1:]:
        out = compose_filters(out, f)
    return out


def damping_filter(lam):
    """``exp(-lam n)``; an imaginary part of ``lam`` adds a phase rotation."""
    lam = complex(lam)
    return FilterMatrixRep(np.diag([np.exp(lam), np.exp(-lam)]))


def unitary_filter(U):
    """Filter form of a Gaussian unitary acting on moments as ``q -> S q + d``."""
    Si = np.linalg.inv(U.symplectic)
    return FilterMatrixRep.from_quadrature(Si, -Si @ U.displacement)


def exp_x2_filter(kappa):
    """``exp(-kappa x^2)``, which maps ``p -> p - 4 i kappa x``."""
    Sq = np.array([[1.0, 0.0], [-4j * kappa, 1.0]])
    return FilterMatrixRep.from_quadrature(Sq, np.zeros(2))


def exp_x_filter(c):
    """``exp(c x)`` for complex ``c``; maps ``p -> p + 2 i c``."""
    return FilterMatrixRep.from_quadrature(np.eye(2), np.array([0.0, 2j * c]))


def exp_p_filter(c):
    """``exp(c p)`` for complex ``c``; maps ``x -> x - 2 i c``."""
    return FilterMatrixRep.from_quadrature(np.eye(2), np.array([-2j * c, 0.0]))


def embed_filter(f: FilterMatrixRep, modes, total):
    idx = mode_indices(modes)
    S = np.eye(2 * total, dtype=complex)
    S[np.ix_(idx, idx)] = f.s_matrix
    b = np.zeros(2 * total, complex)
    b[idx] = f.b
    return FilterMatrixRep(S, b)


def apply_filter(cov, mean, f: FilterMatrixRep, modes):
    """Moments of ``F|psi>`` (normalized) for a pure Gaussian ``|psi>``.

    Annihilators transform as ``l -> F l F^{-1}``, which handles unitary and
    non-unitary filters alike.
    """
    n = cov.shape[0] // 2
    fl = embed_filter(f, modes, n)
    Sq, bq = fl.quadrature
    alpha, g = annihilators(cov, mean)
    alpha2 = Sq.T @ alpha
    g2 = g - alpha.T @ bq
    return moments_from_annihilators(alpha2, g2)


def choi_annihilators(f: FilterMatrixRep):
    """Annihilators of ``(F ⊗ I)|Phi>`` (outputs first)."""
    k = f.modes
    Sq, bq = f.quadrature
    alpha = np.zeros((4 * k, 2 * k), complex)
    g = np.zeros(2 * k, complex)
    for j in range(k):
        xo, po, xi, pi = 2 * j, 2 * j + 1, 2 * (k + j), 2 * (k + j) + 1
        # 2(a_out - a_in^dag) and 2(a_in - a_out^dag)
        alpha[[xo, po, xi, pi], 2 * j] = [1.0, 1j, -1.0, 1j]
        alpha[[xo, po, xi, pi], 2 * j + 1] = [-1.0, 1j, 1.0, 1j]
    T = np.eye(4 * k, dtype=complex)
    T[:2 * k, :2 * k] = Sq
    bfull = np.concatenate([bq, np.zeros(2 * k)])
    return T.T @ alpha, g - alpha.T @ bfull


def filter_to_choi(f: FilterMatrixRep):
    """Choi map of a Gaussian filter.

    Unitary filters have infinitely squeezed Choi states; apart from the
    identity they raise, and should be applied with :func:`apply_filter`.
    """
    if f.is_identity():
        return GaussianCPMap.make_identity(f.modes)
    alpha, g = choi_annihilators(f)
    try:
        cov, mean = moments_from_annihilators(alpha, g, check=False)
    except np.linalg.LinAlgError as exc:
        raise ValueError("filter has no finite Choi representation") from exc
    k = f.modes
    H = cov + 1j * omega(2 * k)
    unphys = bool(np.linalg.eigvalsh(0.5 * (H + H.conj().T)).min() < -1e-9)
    return GaussianCPMap(k, k, cov, mean, unphys, False)


__all__ = [
    "GaussianCPMap", "FilterMatrixRep", "damping_choi", "vacuum_projection_choi",
    "apply_map", "gaussian_overlap", "vacuum_probability", "annihilators",
    "moments_from_annihilators", "compose_filters", "compose_many",
    "damping_filter", "unitary_filter", "exp_x2_filter", "exp_x_filter",
    "exp_p_filter", "embed_filter", "apply_filter", "filter_to_choi",
]
