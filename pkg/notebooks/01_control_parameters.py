"""
Control parameters of a heralded generator
==========================================

A two-mode generator heralds one signal mode by counting photons on a
control mode.  The output depends only on the control moments (C, beta)
and the photon number, and in fact only on the two numbers (s0, delta0).
"""

import numpy as np

from ngopt.control_rep import (ControlMoments, classify, control_params_single, damp_state,
                               damping_transform, rotation_transform)
from ngopt.fock_engine import fidelity, herald, particle_form
from ngopt.symplectic_core import random_generator

G = random_generator(1, 1, r_max=1.0, d_max=0.5, seed=3)
C, beta = G.block([1])
print("control covariance\n", np.round(C, 4))
print("control mean", np.round(beta, 4))

s0, delta0 = control_params_single(C, beta)
print(f"s0 = {s0:.4f}, delta0 = {delta0:.4f}")
print(classify(s0, delta0, 4))

# rotations and damping of the control mode move (C, beta) but keep (s0, delta0)
m = ControlMoments(C, beta)
for label, m2 in (("rotated", rotation_transform(m, [0.7])),
                  ("damped t=3", damping_transform(m, [3.0]))):
    print(label, np.round(control_params_single(m2.C, m2.beta), 6))

# heralding 4 photons: the probability changes along the damping orbit,
# the output state does not
v, p = herald(G, (1, 1), [4])
v2, p2 = herald(damp_state(G, 1, [3.0]), (1, 1), [4])
print(f"p = {p:.3e} -> {p2:.3e} after damping, fidelity {fidelity(v, v2):.12f}")

# core state: (a^dag + s0 a + delta0)^n |0> has support on n photons only
core = particle_form(s0, np.conj(delta0), 4)
print("particle-form amplitudes", np.round(np.abs(core.amps), 4))
