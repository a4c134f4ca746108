"""
Random generators
=================

Haar-random passive networks around random squeezers, with small
displacements.  Halving every photon number can destroy the output when a
control mode sits in the photon-added regime (s0 < 1); choosing targets
mode by mode keeps the fidelity high.
"""

import numpy as np

from ngopt.cli import random_spec
from ngopt.control_rep import control_params_multi
from ngopt.fock_engine import fidelity
from ngopt.optimizer import choose_target, heralded_state, optimize, reduce_photons

for seed in range(4):
    spec = random_spec(seed, k_control=3, n=6)
    s0 = control_params_multi(spec.moments).s0
    v0, _ = heralded_state(spec)
    half, _ = reduce_photons(spec, (3, 3, 3))
    target = choose_target(spec)
    rep = optimize(spec, target, seed=seed)
    print(f"seed {seed}: s0 {np.round(s0, 2)}")
    print(f"  halving    fidelity {fidelity(v0, heralded_state(half)[0]):.3f}")
    print(f"  {target} fidelity {rep.fidelity:.3f}, p {rep.p_before:.2e} -> {rep.p_after:.2e}")
