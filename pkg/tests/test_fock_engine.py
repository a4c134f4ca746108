import numpy as np
import pytest
from hypothesis import given, strategies as st

from ngopt.fock_engine import (
    FockVector, apply_filter_fock, apply_gaussian_unitary_fock, fidelity,
    gaussian_fock_amplitudes, herald, mixed_bargmann, particle_form, pattern_probability,
    quadrature_moments, success_probability, wave_filter, wave_form, wigner_grid,
    x_wavefunction,
)
from ngopt.symplectic_core import GaussianPure, random_generator, rotation, squeezer, tmss

seeds = st.integers(0, 10_000)


def fock(n, cutoff=None):
    v = np.zeros((cutoff or n) + 1, complex)
    v[n] = 1
    return FockVector(v)


def tmss_amplitude(a, j):
    return 2 * np.sqrt(a) / (a + 1) * ((a - 1) / (a + 1)) ** j


@pytest.mark.filterwarnings("ignore::ngopt.fock_engine.CutoffWarning")
@pytest.mark.parametrize("a", [1.5, 3.0, 10.0])
def test_tmss_amplitudes_closed_form(a):
    amps = gaussian_fock_amplitudes(tmss(a), 20).amps
    j = np.arange(21)
    diag = amps[j, j]
    assert np.allclose(np.abs(diag), tmss_amplitude(a, j), atol=1e-10, rtol=0)
    off = amps - np.diag(diag)
    assert np.abs(off).max() < 1e-12


@pytest.mark.parametrize("a", [1.5, 3.0, 10.0])
@pytest.mark.parametrize("n", [0, 1, 5, 12])
def test_tmss_herald_probability_and_output(a, n):
    v, p = herald(tmss(a), (1, 1), [n])
    assert np.isclose(p, 4 * a / (a + 1) ** 2 * ((a - 1) / (a + 1)) ** (2 * n), rtol=1e-10)
    assert np.isclose(abs(v.amps[n]) ** 2, 1.0)


def test_vacuum_quadrature_moments():
    m = quadrature_moments(fock(0, 5), [2, 4], "x")
    assert np.allclose(m, [1.0, 3.0])
    m = quadrature_moments(fock(1, 5), [2], "p")
    assert np.allclose(m, [3.0])


@given(st.floats(0.0, 3.0), st.floats(-2, 2), st.floats(-2, 2), st.integers(2, 8))
def test_particle_form_ratios(s0, dx, dp, n):
    d = complex(dx, dp)
    c = particle_form(s0, d, n).amps
    assert np.all(np.abs(c[n + 1:]) < 1e-14)
    assert np.isclose(c[n - 1], d * np.sqrt(n) * c[n], atol=1e-8 * abs(c[n]) * (1 + abs(d)) * n)
    assert np.isclose(c[n - 2], (s0 + d * d) * np.sqrt(n * (n - 1)) / 2 * c[n],
                      atol=1e-8 * abs(c[n]) * (1 + abs(s0 + d * d)) * n)


@given(st.floats(0.2, 2.0), st.floats(-1, 1), st.floats(-1, 1), st.integers(1, 6))
def test_wave_form_is_filtered_fock_state(s0, dx, dp, n):
    d = complex(dx, dp)
    cutoff = 80
    w = wave_form(s0, d, n, cutoff)
    f = apply_filter_fock(wave_filter(s0, d), fock(n, cutoff), cutoff)
    assert fidelity(w, f) > 1 - 1e-8


def test_rotation_of_fock_state_is_a_phase():
    v = apply_gaussian_unitary_fock(rotation(0.7), fock(3, 10))
    assert np.isclose(abs(v.amps[3]), 1.0)


def test_squeezed_vacuum_variance():
    v = apply_gaussian_unitary_fock(squeezer(0.3), fock(0, 60))
    assert np.isclose(quadrature_moments(v, [2], "x")[0], np.exp(0.6), rtol=1e-8)


@given(seeds, st.lists(st.integers(0, 3), min_size=2, max_size=2))
def test_three_probability_routes_agree(seed, pattern):
    G = random_generator(1, 2, 0.8, 0.5, seed)
    C, b = G.block([1, 2])
    p_herald = herald(G, (1, 2), pattern)[1]
    p_pur = success_probability(C, b, pattern)
    p_mix = pattern_probability(C, b, pattern)
    assert np.isclose(p_pur, p_herald, rtol=1e-8)
    assert np.isclose(p_mix, p_herald, rtol=1e-8)


def test_mixed_bargmann_vacuum():
    A, b, c = mixed_bargmann(np.eye(2), np.zeros(2))
    assert np.allclose(A, 0) and np.allclose(b, 0) and np.isclose(c, 1)


def test_pattern_probabilities_sum_to_one():
    G = random_generator(1, 1, 0.5, 0.3, 5)
    C, b = G.block([1])
    total = sum(pattern_probability(C, b, [n]) for n in range(60))
    assert np.isclose(total, 1.0, atol=1e-10)


@pytest.mark.parametrize("n", [0, 1, 4])
def test_wigner_normalization_and_vacuum_peak(n):
    xs = np.linspace(-9, 9, 181)
    W = wigner_grid(fock(n, n), xs, xs)
    h = xs[1] - xs[0]
    assert np.isclose(W.sum() * h * h, 1.0, atol=1e-6)
    if n == 0:
        assert np.isclose(W[90, 90], 1 / (2 * np.pi))
    if n == 1:
        assert W[90, 90] < 0


def test_x_wavefunction_normalized():
    xs = np.linspace(-12, 12, 2001)
    psi = x_wavefunction(fock(5, 5), xs)
    assert np.isclose(np.sum(np.abs(psi) ** 2) * (xs[1] - xs[0]), 1.0, atol=1e-8)


def test_fidelity_pads_vectors():
    assert np.isclose(fidelity(fock(1, 2), fock(1, 6)), 1.0)
    assert np.isclose(fidelity(fock(0, 2), fock(1, 2)), 0.0)


def test_herald_rejects_bad_pattern():
    with pytest.raises(ValueError):
        herald(GaussianPure.vacuum(2), (1, 1), [1, 2])
