"""Optimization of heralded non-Gaussian state generators.

Gaussian states are described by covariance matrices and means in the
``hbar = 2`` convention (vacuum covariance ``I``), with interleaved
quadratures ``(x1, p1, x2, p2, ...)``.
"""

from .symplectic_core import GaussianPure, GaussianUnitary, williamson, canonical_form
from .control_rep import (ControlMoments, GeneratorSpec, control_params_single,
                          control_params_multi, invariant_control_params)
from .fock_engine import FockVector, herald, success_probability, pattern_probability
from .stellar_reduce import plan_reduction, apply_reduction
from .optimizer import optimize, reduce_photons, maximize_probability, choose_target
from .metrics import xi_cat, xi_cps, xi_gkp

__version__ = "0.1.0"

__all__ = [
    "GaussianPure", "GaussianUnitary", "williamson", "canonical_form",
    "ControlMoments", "GeneratorSpec", "control_params_single", "control_params_multi",
    "invariant_control_params", "FockVector", "herald", "success_probability",
    "pattern_probability", "plan_reduction", "apply_reduction", "optimize",
    "reduce_photons", "maximize_probability", "choose_target", "xi_cat", "xi_cps", "xi_gkp",
]
