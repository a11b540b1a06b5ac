"""Backward martingale decomposition and its diagnostics.

``Z_k`` collects the conditional expectation of the remaining sum, so the
centred sum is ``Z_1`` plus martingale increments. The largest standardised
increment and the oscillation of the summed conditional variances both
shrink when a CLT is expected.
"""

import numpy as np

from mdclt import FamilyParams, backward_z, family_b
from mdclt.gordin import summary, verify_martingale_representation
from mdclt.randomized import random_chain

small = random_chain(np.random.default_rng(0), 6, 3)
d = backward_z(small)
print(f"random chain n=6: D(S_n)={d.var_Sn:.5f}, "
      f"D(Z_1)+sum of increment variances={d.var_Z1 + d.increment_vars.sum():.5f}")
print(f"worst pathwise residual: {verify_martingale_representation(small):.2e}\n")

skewed = FamilyParams("B", gamma=0.5, period=2, skew=0.5)
for n in (256, 1024, 4096, 16384):
    s = summary(family_b(n, skewed))
    print(f"n={n:>6}  max increment={s['a_value']:.4f}  "
          f"tail oscillation={s['osc_tail_sup']:.2e}  b={s['b_value']:.5f}")
