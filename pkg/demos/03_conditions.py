"""Condition values across the three built-in chain families.

Family A keeps every step equally good, so the uniform criterion
``n^(1/3) alpha_n`` grows. Family B interleaves good steps with nearly
frozen ones: the uniform criterion decays, yet the criterion built on
marked steps still grows. Family C freezes every step at rate ``lam / n``
and both criteria decay.
"""

from mdclt import FamilyParams, evaluate_conditions, make_scheme
from mdclt.families import family_h_beta_params

for params in (FamilyParams("A"), FamilyParams("B", gamma=0.5, period=2),
               FamilyParams("C", lam=2.0)):
    hp = family_h_beta_params(params) if params.family == "B" else None
    report = (evaluate_conditions(make_scheme(params), p=hp) if hp
              else evaluate_conditions(make_scheme(params)))
    print(f"family {params.family}")
    for r in report.records:
        print(f"  n={r.n:>6}  n^(1/3) alpha_n={r.dobrushin_value:9.4f}  "
              f"n alpha_n alpha_b^2={r.corollary2_value:10.4g}  window ok={r.h_beta_ok}")
    print(f"  trends: {report.trends['dobrushin_value']} / "
          f"{report.trends['corollary2_value']}\n")
