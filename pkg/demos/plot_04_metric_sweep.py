"""
The rank does not see the metric
================================

Hold the de Rham class fixed through its integral coordinates and change
the sphere radius and the torus periods. The orthonormal coefficients move,
the mixed rank does not.
"""

# %%
from skewhol.experiment import run_sweep, scenario, sweep_summary
from skewhol.kunneth import metric_independence_sweep

cfg = scenario("s2xt2")
for rep in metric_independence_sweep(cfg.kclass, cfg.manifold, cfg.sweep):
    print(rep.metric, "r21 =", rep.r21, "r12 =", rep.r12, "sv =", rep.singular_values_21)

# %%
# The full experiment under each metric, including curvature and certificates.
reports = run_sweep(cfg)
print(sweep_summary(reports))
