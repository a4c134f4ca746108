"""Acceptance criteria; each test records one PASS/FAIL line."""

import time

import numpy as np
import pytest

from ngopt.cli import cat_generator, cps_generator, gkp_generator, random_spec
from ngopt.control_rep import (
    ControlMoments, control_params_single, convertible, convertible_params, damp_state,
    damping_domain_check, damping_transform, diagonal_frame, rotation_transform,
)
from ngopt.fock_engine import (
    FockVector, apply_gaussian_unitary_fock, fidelity, gaussian_fock_amplitudes, herald,
    particle_form, success_probability,
)
from ngopt.metrics import xi_cat, xi_cps, xi_gkp
from ngopt.optimizer import choose_target, heralded_state, optimize, reduce_photons
from ngopt.symplectic_core import (
    check_uncertainty, displacement, omega, random_generator, rotation, squeezer, tmss,
)


def within_factor(x, ref, f):
    return ref / f <= x <= ref * f


def is_pure(G):
    M = G.cov @ omega(G.modes)
    return np.allclose(M @ M, -np.eye(M.shape[0]), atol=1e-8 * max(1, np.abs(M).max() ** 2))


# ---------------------------------------------------------------------------


@pytest.mark.filterwarnings("ignore::ngopt.fock_engine.CutoffWarning")
def test_criterion_1_tmss_oracle(acceptance):
    t0 = time.perf_counter()
    amp_err = prob_err = 0.0
    for a in (1.5, 3.0, 10.0):
        amps = gaussian_fock_amplitudes(tmss(a), 20).amps
        j = np.arange(21)
        exact = 2 * np.sqrt(a) / (a + 1) * ((a - 1) / (a + 1)) ** j
        full = np.diag(exact)
        amp_err = max(amp_err, np.abs(np.abs(amps) - full).max())
        for n in range(21):
            p = herald(tmss(a), (1, 1), [n])[1]
            ref = 4 * a / (a + 1) ** 2 * ((a - 1) / (a + 1)) ** (2 * n)
            prob_err = max(prob_err, abs(p - ref) / ref)
    dt = time.perf_counter() - t0
    ok = amp_err < 1e-10 and prob_err < 1e-10 and dt < 1.0
    acceptance(1, ok, f"amplitude err {amp_err:.1e}, probability rel err {prob_err:.1e}, "
                      f"{dt:.2f} s")
    assert ok


def test_criterion_2_damping_rotation_exactness(acceptance):
    t0 = time.perf_counter()
    rng = np.random.default_rng(2)
    worst_fid, worst_dp = 1.0, 0.0
    for seed in range(50):
        G = random_generator(1, 1, 1.0, 0.5, 500 + seed)
        n = int(rng.integers(1, 7))
        C = G.block([1])[0]
        while True:
            t = 1 / rng.uniform(-0.95, 0.95)
            if damping_domain_check(C, [t]):
                break
        theta = rng.uniform(0, 2 * np.pi)
        v0, p0 = herald(G, (1, 1), [n])
        v1, _ = herald(damp_state(G, 1, [t]), (1, 1), [n])
        v2, p2 = herald(G.transform(rotation(theta), [1]), (1, 1), [n])
        worst_fid = min(worst_fid, fidelity(v0, v1), fidelity(v0, v2))
        worst_dp = max(worst_dp, abs(p2 - p0))
    dt = time.perf_counter() - t0
    ok = worst_fid >= 1 - 1e-6 and worst_dp < 1e-10 and dt < 30
    acceptance(2, ok, f"min fidelity 1-{1 - worst_fid:.1e}, max rotation dp {worst_dp:.1e}, "
                      f"{dt:.1f} s")
    assert ok


def test_criterion_3_particle_form_ratios(acceptance):
    rng = np.random.default_rng(3)
    worst = 0.0
    for _ in range(50):
        s0 = rng.uniform(0, 3)
        d = complex(*rng.uniform(-2, 2, 2))
        n = int(rng.integers(2, 9))
        c = particle_form(s0, d, n).amps
        r1, e1 = c[n - 1] / c[n], d * np.sqrt(n)
        r2, e2 = c[n - 2] / c[n], (s0 + d * d) * np.sqrt(n * (n - 1)) / 2
        worst = max(worst, abs(r1 - e1) / max(1, abs(e1)), abs(r2 - e2) / max(1, abs(e2)))
    ok = worst < 1e-8
    acceptance(3, ok, f"max ratio error {worst:.1e}")
    assert ok


def test_criterion_4_metric_calibration(acceptance):
    vac = np.zeros(121, complex)
    vac[0] = 1
    vac = FockVector(vac)
    cat_vac = xi_cat(vac).value
    cps_vac = xi_cps(vac).value
    rng = np.random.default_rng(4)
    min_cat = min_cps = np.inf
    for _ in range(100):
        U = rotation(rng.uniform(0, np.pi)).compose(squeezer(rng.uniform(-0.8, 0.8)))
        centered = apply_gaussian_unitary_fock(U, vac, 120, tol=1e-6)
        shifted = apply_gaussian_unitary_fock(displacement(rng.uniform(-1.5, 1.5, 2)).compose(U),
                                              vac, 120, tol=1e-6)
        min_cat = min(min_cat, xi_cat(centered).value)
        min_cps = min(min_cps, xi_cps(shifted).value)
    ok = abs(cat_vac - 2 / 3) < 1e-15 and abs(cps_vac - 0.75) < 1e-6 \
        and min_cat >= 2 / 3 - 1e-6 and min_cps >= 0.75 - 1e-6
    acceptance(4, ok, f"xi_cat(vac) {cat_vac:.15f}, xi_cps(vac) {cps_vac:.8f}, sweep minima "
                      f"{min_cat:.6f} (centered) / {min_cps:.6f}")
    assert ok


def test_criterion_5_cat_reproduction(acceptance):
    t0 = time.perf_counter()
    odd = cat_generator(15)
    v0, p0 = heralded_state(odd)
    rep = optimize(odd, (5,), {"xi_cat": xi_cat})
    dt = time.perf_counter() - t0
    s0 = rep.params_after[0]["s0"]
    dxi = rep.metrics_after["xi_cat"] - rep.metrics_before["xi_cat"]
    even = optimize(cat_generator(16), (6,))
    ok_odd = (1.2e-6 <= p0 <= 2.4e-6 and within_factor(rep.p_after, 4.58e-2, 3)
              and rep.fidelity >= 0.99 and abs(s0 - 1.11) <= 0.05 and dxi <= 0.03
              and dt < 120 and v0.cutoff <= 80)
    ok_even = within_factor(even.p_after, 3.84e-2, 3) and even.fidelity >= 0.99
    ok = ok_odd and ok_even
    acceptance(5, ok, f"odd p {p0:.3e} -> {rep.p_after:.3e}, F {rep.fidelity:.4f}, s0 {s0:.3f}, "
                      f"xi_cat {rep.metrics_before['xi_cat']:.3f} -> "
                      f"{rep.metrics_after['xi_cat']:.3f}, cutoff {v0.cutoff}, {dt:.1f} s; "
                      f"even p {even.p_after:.3e}, F {even.fidelity:.4f}")
    assert ok


def test_criterion_6_cps_reproduction(acceptance):
    t0 = time.perf_counter()
    rep = optimize(cps_generator(20), (7,), {"xi_cps": xi_cps})
    dt = time.perf_counter() - t0
    dxi = rep.metrics_after["xi_cps"] - rep.metrics_before["xi_cps"]
    ok = (within_factor(rep.p_before, 2.19e-8, 2) and within_factor(rep.p_after, 7.43e-2, 3)
          and rep.fidelity >= 0.99 and dxi <= 0.05 and dt < 180)
    acceptance(6, ok, f"p {rep.p_before:.3e} -> {rep.p_after:.3e}, F {rep.fidelity:.4f}, "
                      f"xi_cps {rep.metrics_before['xi_cps']:.4f} -> "
                      f"{rep.metrics_after['xi_cps']:.4f}, {dt:.1f} s")
    assert ok


def test_criterion_7_gkp_reproduction(acceptance):
    t0 = time.perf_counter()
    spec = gkp_generator(18)
    rep = optimize(spec, (6, 6, 6), {"xi_gkp": xi_gkp})
    dt = time.perf_counter() - t0
    s_before = [d["s0"] for d in rep.invariant_before]
    s_after = [d["s0"] for d in rep.invariant_after]
    box = max(spec.photons) + 1
    ok = (within_factor(rep.p_before, 1.75e-12, 2) and within_factor(rep.p_after, 1.44e-4, 3)
          and rep.fidelity >= 0.99 and all(abs(s - 5) <= 0.1 for s in s_before)
          and all(abs(s - 3.05) <= 0.3 for s in s_after) and rep.gain >= 1e7
          and dt < 600 and box <= 30)
    v, _ = heralded_state(spec)
    acceptance(7, ok, f"p {rep.p_before:.3e} -> {rep.p_after:.3e} (gain {rep.gain:.2e}), "
                      f"F {rep.fidelity:.4f}, invariant s0 {np.mean(s_before):.3f} -> "
                      f"{np.mean(s_after):.3f}, xi_gkp {rep.metrics_before['xi_gkp']:.4f} -> "
                      f"{rep.metrics_after['xi_gkp']:.4f}, control box {box}, "
                      f"signal cutoff {v.cutoff}, {dt:.1f} s")
    assert ok


def test_criterion_8_random_property_suite(acceptance):
    worst_fid, worst_ratio, problems = 1.0, np.inf, []
    halving = []
    for seed in range(10):
        spec = random_spec(seed, k_control=3, n=6)
        target = choose_target(spec)
        rep = optimize(spec, target, seed=seed)
        if target == spec.photons:
            problems.append(f"seed {seed}: nothing reduced")
        worst_fid = min(worst_fid, rep.fidelity)
        worst_ratio = min(worst_ratio, rep.p_after / rep.p_intermediate,
                          rep.p_after / rep.p_before)
        for stage in (rep.before, rep.intermediate, rep.after):
            if not (is_pure(stage.state) and check_uncertainty(stage.state.cov, 1e-8)):
                problems.append(f"seed {seed}: invalid state")
            v, p = heralded_state(stage)
            if not (abs(np.linalg.norm(v.amps) - 1) < 1e-10 and 0 < p <= 1):
                problems.append(f"seed {seed}: bad herald")
        mid, _ = reduce_photons(spec, tuple(n // 2 for n in spec.photons))
        halving.append(fidelity(heralded_state(spec)[0], heralded_state(mid)[0]))
    ok = worst_fid >= 0.80 and worst_ratio >= 1 and not problems
    acceptance(8, ok, f"10 seeds, adaptive targets: min fidelity {worst_fid:.4f}, min p ratio "
                      f"{worst_ratio:.2e}{'; ' + '; '.join(problems) if problems else ''} "
                      f"(info: uniform halving step-1 fidelity >= 0.80 on "
                      f"{sum(f >= 0.8 for f in halving)}/10 seeds)")
    assert ok


def test_criterion_9_dual_probability(acceptance):
    rng = np.random.default_rng(9)
    worst = 0.0
    for i in range(30):
        k = int(rng.integers(1, 4))
        G = random_generator(1, k, 1.0, 0.5, 900 + i)
        pattern = rng.integers(0, 5, k)
        C, b = G.block(list(range(1, k + 1)))
        p1 = success_probability(C, b, pattern)
        p2 = herald(G, (1, k), pattern)[1]
        worst = max(worst, abs(p1 - p2) / p2)
    ok = worst < 1e-6
    acceptance(9, ok, f"max relative difference {worst:.1e} over 30 instances")
    assert ok


def _orbit(m, lams):
    base = rotation_transform(m, [diagonal_frame(m.C)])
    out = []
    for lam in lams:
        t = np.inf if lam == 0 else 1 / np.tanh(lam)
        if damping_domain_check(base.C, [t]):
            out.append(damping_transform(base, [t]))
    return out


def test_criterion_10_convertibility_consistency(acceptance):
    rng = np.random.default_rng(10)
    la, lb = np.linspace(-1.5, 4.0, 80), np.linspace(-1.47, 4.3, 80)
    agree, total, seed, kinds = 0, 0, 0, [0, 0]
    while total < 30:
        seed += 1
        ma = ControlMoments(*random_generator(1, 1, 1.0, 0.5, 10_000 + seed).block([1]))
        mb = ControlMoments(*random_generator(1, 1, 1.0, 0.5, 20_000 + seed).block([1]))
        try:
            pa = control_params_single(ma.C, ma.beta)
            pb = control_params_single(mb.C, mb.beta)
        except ValueError:
            continue
        n = int(rng.integers(2, 9))
        by_params = convertible_params(*pa, *pb, n)
        ob = _orbit(mb, lb)
        by_moments = any(convertible(a, b) for a in _orbit(ma, la) for b in ob)
        agree += by_params == by_moments
        kinds[by_params] += 1
        total += 1
    ok = agree == total
    acceptance(10, ok, f"{agree}/{total} pairs agree ({kinds[1]} convertible, "
                       f"{kinds[0]} not)")
    assert ok
