import numpy as np
import pytest
from hypothesis import given, strategies as st
from numpy.polynomial.hermite import hermroots

from ngopt.control_rep import control_params_single
from ngopt.fock_engine import apply_gaussian_unitary_fock, fidelity, herald, wave_form
from ngopt.stellar_reduce import (
    correction_unitary, fock_derivative, fock_wavefunction,
    largest_root, local_momentum, match_parity, method1, method2, plan_reduction,
    reduce_mode, reduced_params, turning_point,
)
from ngopt.symplectic_core import is_symplectic


@pytest.mark.parametrize("n", [2, 5, 15, 30])
def test_largest_root_matches_hermite_roots(n):
    c = np.zeros(n + 1)
    c[n] = 1
    assert np.isclose(largest_root(n), np.sqrt(2) * hermroots(c).max())
    assert abs(fock_wavefunction(n, largest_root(n))) < 1e-10
    assert largest_root(n) < turning_point(n)


def test_local_momentum_vanishes_at_turning_point():
    assert np.isclose(local_momentum(7, turning_point(7)), 0, atol=1e-12)


def test_fock_derivative_finite_difference():
    x, h = 1.3, 1e-6
    fd = (fock_wavefunction(6, x + h) - fock_wavefunction(6, x - h)) / (2 * h)
    assert np.isclose(fock_derivative(6, x), fd, rtol=1e-6)


def test_match_parity_closed_form():
    k, d = match_parity(15, 5)
    assert np.isclose(k, np.sqrt(31 / 11)) and d == 0
    with pytest.raises(ValueError):
        match_parity(15, 4)


@given(st.integers(4, 25), st.floats(0.5, 8.0))
def test_method2_solves_matching_cubic(n, x0):
    npr = n // 3
    k, d = method2(n, npr, x0)
    z = k * k
    assert abs((4 * npr + 2) * z ** 3 + (x0 * x0 - 4 * n - 2) * z * z - x0 * x0) < 1e-8 * (4 * n + 2) * max(1, z ** 3)
    assert np.isclose(d, k * x0 - x0 / k ** 3)


@pytest.mark.parametrize("n, npr, x0", [(15, 4, 1.0), (20, 7, 2.5), (12, 5, 0.4)])
def test_method1_candidates_match_momentum(n, npr, x0):
    best, cands = method1(n, npr, x0)
    assert best in cands
    for k, d in cands:
        u = k * x0 - d
        # local momenta agree after the k scaling
        assert np.isclose(4 * n + 2 - x0 ** 2, k * k * (4 * npr + 2 - u * u), rtol=1e-8)


def test_correction_unitary_is_symplectic():
    U = correction_unitary(1.7, 0.3)
    assert is_symplectic(U.symplectic)


def test_reduced_params_identity():
    assert np.allclose(reduced_params(2.0, 0.3 + 0.4j, 1.0, 0.0), (2.0, 0.3 + 0.4j))


@given(st.floats(0.2, 5.0), st.floats(-1.5, 1.5), st.integers(6, 20))
def test_plan_lowers_s0(s0, dp, n):
    plan = plan_reduction(s0, complex(0, dp), n, n // 3)
    if plan.k > 1:
        assert plan.s0_prime < s0
    assert plan.n_prime == n // 3


def test_plan_identity_when_no_reduction():
    assert plan_reduction(2.0, 0.1j, 5, 5).is_identity


def test_plan_rejects_increase():
    with pytest.raises(ValueError):
        plan_reduction(2.0, 0, 5, 6)


def test_cps_center_uses_turning_point():
    plan = plan_reduction(0.0, 1.4046j, 20, 7)
    assert plan.method_used in ("method2-at-turning", "method2")
    assert np.isclose(abs(plan.x0), turning_point(20))
    assert np.isclose(abs(plan.delta0_prime), 1.19, atol=0.01)


@given(st.floats(2.0, 5.0), st.sampled_from([(10, 4), (14, 6), (20, 8), (15, 5)]))
def test_wave_form_overlap_after_correction(s0, nn):
    n, npr = nn
    plan = plan_reduction(s0, 0, n, npr)
    a = wave_form(s0, 0, n, 200)
    b = apply_gaussian_unitary_fock(plan.correction, wave_form(plan.s0_prime, 0, npr, 200),
                                    200, tol=1.0)
    assert fidelity(a, b) >= 0.98


def test_reduce_mode_on_cat_generator():
    from ngopt.cli import cat_generator
    spec = cat_generator(9)
    v0, p0 = herald(spec.state, spec.split, spec.photons)
    G, plan = reduce_mode(spec.state, 1, 0, 3, spec.photons)
    v1, p1 = herald(G, (1, 1), [3])
    assert p1 > p0
    assert fidelity(v0, v1) > 0.98
    # symplectic eigenvalue of the control mode is preserved
    from ngopt.symplectic_core import symplectic_eigenvalues
    assert np.isclose(symplectic_eigenvalues(G.block([1])[0])[0],
                      symplectic_eigenvalues(spec.state.block([1])[0])[0], rtol=1e-8)
    s0, _ = control_params_single(*G.block([1]))
    assert np.isclose(s0, plan.s0_prime, rtol=1e-6)
