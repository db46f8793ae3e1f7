"""
Harmonic forms on a product
===========================

The torsion of every connection in this package is built from harmonic
forms of the two factors. This script looks at the catalog, checks that the
forms really are closed and coclosed, and confirms the Gram matrix of the
product basis.
"""

# %%
# The catalog: constant coordinate forms on a flat torus, the constant and the
# area form on a round sphere, each normalized in L2.
from math import pi

import numpy as np

from skewhol.forms import FormField, betti_numbers, harmonicity_residuals, l2_inner
from skewhol.geometry import FlatTorus, ProductManifold, RoundSphere2, quadrature_grid, sample_points
from skewhol.kunneth import bidegree_basis

M = ProductManifold(RoundSphere2(1.0), FlatTorus((2 * pi, 2 * pi)))
print("Betti numbers of S2:", betti_numbers(M.factor1, 2))
print("Betti numbers of T2:", betti_numbers(M.factor2, 2))

# %%
# Closed and coclosed, checked with finite differences at random chart points.
points = sample_points(M, 30, np.random.default_rng(0))
d_res, delta_res = harmonicity_residuals(M, points)
print(f"max |d alpha| = {d_res:.2e},  max |delta alpha| = {delta_res:.2e}")

# %%
# The degree-3 product basis splits by bidegree. On S2 x T2 only the (2,1)
# part is nonempty, so every degree-3 class is mixed.
grid = quadrature_grid(M)
for p, q in [(3, 0), (2, 1), (1, 2), (0, 3)]:
    basis = [FormField(3, M, ((1.0, a, b),)) for _, _, a, b in bidegree_basis(M, p, q)]
    gram = np.array([[l2_inner(F, G, grid) for G in basis] for F in basis])
    print(f"bidegree ({p},{q}): {len(basis)} forms, Gram matrix\n{np.round(gram, 12)}")
