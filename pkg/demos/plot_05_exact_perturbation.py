"""
Adding an exact form
====================

``d(0.3 sin(x) vol_S2)`` is exact, so adding it to the torsion keeps the
cohomology class. The L2 projection recovers the same class, the bound
still holds, and the off-diagonal span grows: the torsion is no longer
harmonic, and its derivative contributes new off-diagonal curvature.
"""

# %%
import numpy as np

from skewhol.connection import torsion_derivative_term
from skewhol.experiment import run_experiment, scenario
from skewhol.holonomy import r_off, split_projectors

base = run_experiment(scenario("s2xt2"), with_sweep=False)
pert = run_experiment(scenario("s2xt2-perturbed"), with_sweep=False)
print("class deviation after projection:", pert.class_deviation)
print("endomorphism span:", base.verdicts["min_dimension"], "->", pert.verdicts["min_dimension"])

# %%
# Where do the extra directions come from? The curvature part linear in the
# covariant derivative of T has off-diagonal entries of its own.
cfg = scenario("s2xt2-perturbed")
M, T = cfg.manifold, cfg.torsion()
p = np.array([1.0, 0.4, 2.0, 3.0])
L = torsion_derivative_term(M, T, p)
print("max off-diagonal entry of the derivative term:", np.abs(r_off(L, split_projectors(M))).max())
