"""Two-step optimization of heralded generators.

Step 1 lowers the detected photon numbers mode by mode with the reduction
filters of :mod:`stellar_reduce`.  Step 2 moves along the damping orbit of
the control moments, which leaves the heralded state unchanged, to the
point of largest success probability.
"""

import logging
import time
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize

from .control_rep import (GeneratorSpec, _damped, control_params_multi, damp_state,
                          damping_domain_check, invariant_control_params)
from .fock_engine import herald, pattern_probability, fidelity
from .stellar_reduce import InfeasibleReduction, reduce_mode

log = logging.getLogger(__name__)

MAX_DENSITY_BOX = 4e6
N_RESTARTS = 5
LAMBDA0 = 0.1


def probability(spec: GeneratorSpec, cutoff=None):
    """Success probability of ``spec``, exact when the pattern box is small."""
    box = float(np.prod(np.asarray(spec.photons) + 1.0)) ** 2
    if box <= MAX_DENSITY_BOX:
        m = spec.moments
        return pattern_probability(m.C, m.beta, spec.photons)
    return herald(spec.state, spec.split, spec.photons, cutoff=cutoff)[1]


def reduce_photons(spec: GeneratorSpec, target):
    """Step 1: reduce each control mode to ``target[m]`` photons, ascending ``m``.

    Returns the new spec and the list of plans (one per mode).
    """
    target = tuple(int(t) for t in target)
    if len(target) != spec.k:
        raise ValueError("target length must equal the control mode count")
    G = spec.state
    photons = list(spec.photons)
    plans = []
    for m in range(spec.k):
        if target[m] > photons[m]:
            raise ValueError(f"target exceeds current photons on mode {m}")
        if target[m] == photons[m]:
            plans.append(None)
            continue
        try:
            G, plan = reduce_mode(G, spec.signal_modes, m, target[m], photons)
        except (InfeasibleReduction, ValueError, np.linalg.LinAlgError) as exc:
            raise InfeasibleReduction(f"mode {m}: {exc}") from exc
        photons[m] = target[m]
        plans.append(plan)
        log.info("mode %d reduced via %s, k=%.4f d=%.4f", m, plan.method_used, plan.k, plan.d)
    return spec.with_state(G, photons), plans


def choose_target(spec: GeneratorSpec, min_fidelity=0.9, min_ratio=1 / 3, cutoff=None):
    """Per-mode photon targets that keep the heralded state close to the original.

    Modes are visited in ascending order.  Mode ``m`` gets the smallest
    ``n' >= ceil(min_ratio n)`` whose reduction keeps the fidelity with the
    original output above ``min_fidelity ** ((m + 1) / k)``; modes where no
    such ``n'`` exists keep their photon number.

    Returns
    -------
    tuple of int
    """
    v0, _ = heralded_state(spec, cutoff)
    G, photons = spec.state, list(spec.photons)
    for m in range(spec.k):
        floor = min_fidelity ** ((m + 1) / spec.k)
        n = photons[m]
        for n_prime in range(int(np.ceil(min_ratio * n)), n):
            trial = photons.copy()
            trial[m] = n_prime
            try:
                G2, _ = reduce_mode(G, spec.signal_modes, m, n_prime, photons)
                v, _ = herald(G2, spec.split, trial, cutoff=cutoff)
            except (InfeasibleReduction, ValueError, FloatingPointError, np.linalg.LinAlgError):
                continue
            if fidelity(v0, v) >= floor:
                G, photons = G2, trial
                break
    return tuple(photons)


def _t_of(lam):
    lam = np.asarray(lam, dtype=float)
    with np.errstate(divide="ignore"):
        return np.where(lam == 0, np.inf, 1.0 / np.tanh(lam))


def damp_spec(spec: GeneratorSpec, lam):
    """Spec after damping ``exp(-lam_m n_m)`` on each control mode."""
    return spec.with_state(damp_state(spec.state, spec.signal_modes, _t_of(lam)))


def maximize_probability(spec: GeneratorSpec, seed=0, restarts=N_RESTARTS):
    """Step 2: maximize the success probability over the damping orbit.

    The damping strengths ``lam_m`` (with ``t_m = coth(lam_m)``) are
    searched by Nelder-Mead on ``-log p``; ``lam = 0`` is the identity and
    negative values amplify.  Infeasible points are rejected.

    Returns
    -------
    spec : GeneratorSpec
        Damped generator (the input when nothing improves).
    lam : ndarray
        Optimal damping strengths.
    p : float
        Success probability of the returned spec.
    """
    k = spec.k
    C, beta = spec.moments.C, spec.moments.beta
    p_start = probability(spec)
    # damping leaves the heralded signal unchanged, so its cutoff is fixed
    v0, _ = heralded_state(spec)
    cut = max(v0.cutoffs) if hasattr(v0, "cutoffs") else v0.cutoff
    box = float(np.prod(np.asarray(spec.photons) + 1.0))
    use_density = box ** 2 <= MAX_DENSITY_BOX and box ** 2 <= 4 * (cut + 1.0) ** spec.signal_modes * box
    cache = {}

    def objective(lam):
        key = tuple(np.round(lam, 14))
        if key in cache:
            return cache[key]
        t = _t_of(lam)
        val = 1e3
        if np.all(np.abs(lam) < 30) and damping_domain_check(C, t):
            try:
                Cp, bp = _damped(C, beta, t)
                if np.linalg.eigvalsh(Cp).min() > 1e-9:
                    if use_density:
                        p = pattern_probability(Cp, bp, spec.photons)
                    else:
                        p = herald(damp_spec(spec, lam).state, spec.split, spec.photons,
                                   cutoff=cut)[1]
                    if p > 0:
                        val = -np.log(p)
            except (np.linalg.LinAlgError, ValueError, FloatingPointError):
                pass
        cache[key] = val
        return val

    rng = np.random.default_rng(seed)
    starts = [np.full(k, LAMBDA0)] + [rng.uniform(-0.5, 2.0, k) for _ in range(restarts)]
    best_lam, best_val = np.zeros(k), -np.log(p_start)
    for x0 in starts:
        if objective(x0) >= 1e3:
            continue
        res = minimize(objective, x0, method="Nelder-Mead",
                       options=dict(xatol=1e-6, fatol=1e-9, maxiter=200 * k, adaptive=k > 2))
        if res.fun < best_val:
            best_lam, best_val = res.x, res.fun
    # coordinate sweep polish
    for m in range(k):
        for step in (0.2, 0.05, 0.01):
            for sgn in (1, -1):
                trial = best_lam.copy()
                trial[m] += sgn * step
                v = objective(trial)
                if v < best_val:
                    best_lam, best_val = trial, v
    if not np.all(np.isfinite(best_lam)) or best_val >= -np.log(p_start):
        return spec, np.zeros(k), p_start
    out = damp_spec(spec, best_lam)
    return out, best_lam, probability(out)


@dataclass
class OptimizationReport:
    before: GeneratorSpec
    intermediate: GeneratorSpec
    after: GeneratorSpec
    p_before: float
    p_intermediate: float
    p_after: float
    fidelity: float
    params_before: list
    params_after: list
    invariant_before: list
    invariant_after: list
    plans: list
    lam: np.ndarray
    mode_order: list
    metrics_before: dict = field(default_factory=dict)
    metrics_after: dict = field(default_factory=dict)
    runtime: float = 0.0

    @property
    def t_star(self):
        return _t_of(self.lam)

    @property
    def gain(self):
        return self.p_after / self.p_before


def _params(spec):
    cp = control_params_multi(spec.moments)
    return [dict(s0=float(s), delta0=complex(d), defined=bool(ok)) for s, d, ok in cp]


def _invariant(spec):
    out = []
    for m in range(spec.k):
        try:
            s, d = invariant_control_params(spec.state, spec.signal_modes, m)
            out.append(dict(s0=s, delta0=d))
        except ValueError:
            out.append(dict(s0=float("nan"), delta0=complex("nan")))
    return out


def heralded_state(spec: GeneratorSpec, cutoff=None):
    return herald(spec.state, spec.split, spec.photons, cutoff=cutoff)


def optimize(spec: GeneratorSpec, target, metrics=None, cutoff=None, seed=0):
    """Run both steps and collect a report.

    Parameters
    ----------
    spec : GeneratorSpec
    target : sequence of int
        Photon pattern after Step 1.
    metrics : dict of name -> callable, optional
        Evaluated on the heralded signal before and after (single signal mode).
    cutoff : int, optional
        Signal cutoff for heralded states.
    """
    t0 = time.perf_counter()
    v_before, p_before = heralded_state(spec, cutoff)
    mid, plans = reduce_photons(spec, target)
    p_mid = probability(mid)
    after, lam, p_after = maximize_probability(mid, seed=seed)
    if p_after < p_mid:
        after, lam, p_after = mid, np.zeros(spec.k), p_mid
    v_after, _ = heralded_state(after, cutoff)
    fid = fidelity(v_before, v_after)
    rep = OptimizationReport(spec, mid, after, p_before, p_mid, p_after, fid,
                             _params(spec), _params(after), _invariant(spec),
                             _invariant(after), plans, lam, list(range(spec.k)))
    if metrics and spec.signal_modes == 1:
        rep.metrics_before = {k: f(v_before).value for k, f in metrics.items()}
        rep.metrics_after = {k: f(v_after).value for k, f in metrics.items()}
    rep.runtime = time.perf_counter() - t0
    return rep


__all__ = [
    "OptimizationReport", "probability", "reduce_photons", "maximize_probability",
    "optimize", "damp_spec", "heralded_state", "choose_target",
]
