import numpy as np
import pytest
from hypothesis import assume, given, strategies as st

from ngopt.control_rep import (
    ControlMoments, GeneratorSpec, classify, control_params_multi, control_params_single,
    convertible, convertible_params, damp_state, damping_domain_check, damping_transform,
    invariant_control_params, rotation_transform,
)
from ngopt.fock_engine import fidelity, herald
from ngopt.symplectic_core import cayley, random_generator, tmss_cov

seeds = st.integers(0, 10_000)
angles = st.floats(0, 2 * np.pi)


def two_mode(seed):
    G = random_generator(1, 1, 1.0, 0.5, seed)
    return G, ControlMoments(*G.block([1]))


def valid_t(C, u):
    """Map ``u`` in (-1, 1) to a damping parameter inside the admissible domain."""
    t = 1 / u
    return t if damping_domain_check(C, [t]) else None


def test_params_examples():
    s0, d = control_params_single(np.diag([2.88, 0.60]), np.zeros(2))
    assert np.isclose(s0, 3.1316, atol=1e-3) and d == 0
    s0, _ = control_params_single(np.diag([21.09, 0.91]), np.zeros(2))
    assert np.isclose(s0, 1.11, atol=5e-3)
    s0, d = control_params_single(3 * np.eye(2), np.zeros(2))
    assert s0 == 0 and d == 0


def test_pure_control_mode_undefined():
    with pytest.raises(ValueError):
        control_params_single(np.diag([2.0, 0.5]), np.zeros(2))
    cp = control_params_multi(ControlMoments(np.diag([2.0, 0.5, 3.0, 3.0]), np.zeros(4)))
    assert list(cp.defined) == [False, True]


def test_multi_mode_gkp_block():
    C = np.kron(np.eye(3), np.diag([0.45, 5.47]))
    cp = control_params_multi(ControlMoments(C, np.zeros(6)))
    assert np.allclose(cp.s0, 3.43, atol=0.01)


def test_delta0_sign_canonical():
    s0, d = control_params_single(np.diag([3.0, 0.5]), np.array([-0.4, 0.3]))
    assert d.real > 0


def test_rotation_example():
    m = rotation_transform(ControlMoments(np.diag([0.60, 2.88]), np.zeros(2)), [np.pi / 2])
    assert np.allclose(m.C, np.diag([2.88, 0.60]))


def test_damping_example_and_cayley_route():
    m = damping_transform(ControlMoments(3 * np.eye(2), np.zeros(2)), [2.0])
    assert np.allclose(m.C, 1.4 * np.eye(2))
    Ct, _ = cayley(3 * np.eye(2), np.zeros(2))
    assert np.allclose(cayley(m.C, m.beta)[0], Ct / 3)


def test_damping_identity_at_infinity():
    m = ControlMoments(np.array([[3.0, 0.4], [0.4, 0.7]]), np.array([0.2, -0.1]))
    out = damping_transform(m, [np.inf])
    assert np.allclose(out.C, m.C) and np.allclose(out.beta, m.beta)


@pytest.mark.parametrize("t, ok", [(2.0, True), (0.5, False), (-2.0, False), (-4.0, True)])
def test_domain_examples(t, ok):
    assert damping_domain_check(3 * np.eye(2), [t]) is ok


@given(seeds, angles, st.floats(-0.95, 0.95))
def test_params_invariant_under_rotation_and_damping(seed, theta, u):
    G, m = two_mode(seed)
    assume(abs(u) > 1e-3)
    s0, d = control_params_single(m.C, m.beta)
    r = rotation_transform(m, [theta])
    assert np.allclose(control_params_single(r.C, r.beta), (s0, d), atol=1e-8)
    t = valid_t(m.C, u)
    assume(t is not None)
    dm = damping_transform(m, [t])
    s1, d1 = control_params_single(dm.C, dm.beta)
    assert np.isclose(s1, s0, atol=1e-8 * max(1, s0))
    assert np.isclose(d1, d, atol=1e-8 * max(1, abs(d)))


@given(seeds, st.floats(-0.9, 0.9), st.integers(1, 5))
def test_damping_preserves_heralded_state(seed, u, n):
    G, m = two_mode(seed)
    assume(abs(u) > 1e-3)
    t = valid_t(m.C, u)
    assume(t is not None)
    v0, _ = herald(G, (1, 1), [n])
    v1, _ = herald(damp_state(G, 1, [t]), (1, 1), [n])
    assert fidelity(v0, v1) > 1 - 1e-6


@given(seeds, st.floats(0.05, 1.5))
def test_invariant_params_ignore_damping_on_other_modes(seed, lam):
    G = random_generator(1, 3, 1.0, 0.5, seed)
    t = 1 / np.tanh(lam)
    ref = invariant_control_params(G, 1, 0)
    out = invariant_control_params(damp_state(G, 1, [np.inf, t, t]), 1, 0)
    assert np.isclose(out[0], ref[0], atol=1e-8 * max(1, ref[0]))
    assert np.isclose(out[1], ref[1], atol=1e-8 * max(1, abs(ref[1])))


def test_invariant_equals_single_for_one_control():
    G, m = two_mode(11)
    assert np.allclose(invariant_control_params(G, 1, 0), control_params_single(m.C, m.beta))


def test_generator_spec_validation():
    G = random_generator(1, 2, 1.0, 0.5, 0)
    with pytest.raises(ValueError):
        GeneratorSpec(G, 1, (1,))
    with pytest.raises(ValueError):
        GeneratorSpec(G, 1, (1, -1))
    spec = GeneratorSpec(G, 1, (2, 3))
    assert spec.split == (1, 2) and spec.moments.k == 2


def test_classify_examples():
    r = classify(1.11, 0, 5)
    assert r.kind == "subtracted" and r.parity == -1
    assert np.isclose(r.amplitude, np.sqrt(5.5 / 1.11))
    assert classify(0, 0, 3).kind == "fock"
    r = classify(1.0, 0, 6)
    assert r.kind == "critical" and np.isclose(r.amplitude, np.sqrt(6.5))
    r = classify(0.0, 0.5j, 7)
    assert np.isclose(r.p0, 2 * np.sqrt(7.5))


def test_convertibility_examples():
    m = ControlMoments(tmss_cov(2.0)[2:, 2:], np.array([0.1, 0.2]))
    assert convertible(m, m)
    assert convertible_params(0.5, 0.3j, 4.0, 0.0, 3)
    assert not convertible_params(2.0, 0, 1.5, 0, 3)
    with pytest.raises(ValueError):
        convertible_params(2.0, 0, 1.5, 0, 1)
