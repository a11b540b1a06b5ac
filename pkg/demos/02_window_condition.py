"""Marked steps and the window condition.

A 0/1 sequence marks the steps whose kernels are trusted to mix. The window
condition asks that from ``m0`` steps on, every prefix contains at least a
fraction ``c`` of marks. A linear-time check is compared with the quadratic
definition, and a witness is searched for on a chain whose good steps are
periodic.
"""

from mdclt import BetaSequence, HBetaParams, check_h_beta
from mdclt.ergodic import alpha_beta, alpha_n, check_h_beta_bruteforce, search_beta
from mdclt.families import FamilyParams, family_b, family_h_beta_params

p = HBetaParams(m0=4, c=0.25)
for bits in ("1000100010001000", "1111000000000000", "0101010101010101"):
    beta = BetaSequence.from_bitstring(bits)
    print(f"{bits}  linear={check_h_beta(beta, p)}  brute={check_h_beta_bruteforce(beta, p)}")

params = FamilyParams("B", gamma=0.5, period=4)
chain = family_b(1024, params)
found = search_beta(chain, family_h_beta_params(params))
beta, theta = found
print(f"\nfamily B, n=1024, period 4: witness at threshold {theta}, "
      f"{int(beta.bits.sum())} marked steps")
print(f"alpha_n = {alpha_n(chain):.4g}, alpha over marked steps = "
      f"{alpha_beta(chain, beta):.4g}")
