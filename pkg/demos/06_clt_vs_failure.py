"""Monte Carlo distance to the normal law.

Family B's standardised sums approach the normal law even though the
uniform coefficient decays. Family C keeps an atom of non-vanishing mass in
the limit, so the Kolmogorov distance stays bounded away from zero.
"""

from mdclt import FamilyParams, make_scheme, sample_statistic

SEED = 20261018
for params in (FamilyParams("B", gamma=0.5, period=2), FamilyParams("C", lam=2.0)):
    scheme = make_scheme(params, grid=(256, 1024, 4096))
    for n in scheme.grid:
        r = sample_statistic(scheme.chain(n), 20_000, SEED)
        print(f"family {params.family}  n={n:>5}  KS={r.ks_distance:.4f}")
