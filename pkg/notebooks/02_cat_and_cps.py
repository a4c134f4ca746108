"""
Fewer photons for cat and cubic-phase states
============================================

Step 1 replaces the photon number n by a smaller n' with a WKB-matched
filter on the control mode.  Step 2 slides along the damping orbit to the
most probable generator.  The heralded state barely changes.
"""

from ngopt.cli import cat_generator, cps_generator
from ngopt.metrics import xi_cat, xi_cps
from ngopt.optimizer import optimize

for name, spec, target, metric in (("odd cat", cat_generator(15), (5,), xi_cat),
                                   ("even cat", cat_generator(16), (6,), xi_cat),
                                   ("cubic phase", cps_generator(20), (7,), xi_cps)):
    rep = optimize(spec, target, {metric.__name__: metric})
    plan = rep.plans[0]
    print(f"--- {name}: {spec.photons[0]} -> {target[0]} photons ({plan.method_used})")
    print(f"  s0 {rep.params_before[0]['s0']:.3f} -> {rep.params_after[0]['s0']:.3f}")
    print(f"  p  {rep.p_before:.3e} -> {rep.p_intermediate:.3e} -> {rep.p_after:.3e}")
    print(f"  fidelity {rep.fidelity:.4f}")
    key = metric.__name__
    print(f"  {key} {rep.metrics_before[key]:.4f} -> {rep.metrics_after[key]:.4f}")
