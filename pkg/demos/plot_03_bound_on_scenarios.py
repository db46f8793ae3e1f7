"""
Off-diagonal span against mixed rank
====================================

Run the four builtin scenarios and compare the dimension of the
off-diagonal curvature span with the mixed tensor rank of the class.
"""

# %%
from skewhol.experiment import SCENARIOS, run_experiment, scenario

for name in SCENARIOS:
    rep = run_experiment(scenario(name), with_sweep=False)
    v = rep.verdicts
    vec = sorted({e["vector"]["dimension"] for e in rep.points})
    print(
        f"{name:<16} rank {v['rank_total']}  components {v['component_count']}  "
        f"endomorphism span {v['min_dimension']}..{v['max_dimension']}  vector span {vec}  "
        f"bound {'holds' if rep.bound_holds else 'FAILS'}"
    )

# %%
# On S2 x T2 the class vol ^ (dx + dy) has rank 1 but two nonzero
# coefficients. The measured endomorphism span is 2, so it meets both counts.
rep = run_experiment(scenario("s2xt2"), with_sweep=False)
print(rep.mixed_rank["singular_values_21"])
