"""Randomised checks of the supporting inequalities.

Each instance draws a small chain and a marked sequence, then records the
tightest margin of every inequality kind. Margins below zero by more than
rounding would signal a bound that fails.
"""

from mdclt.inequality_lab import run_suite

records = run_suite(200, seed=1)
best = {}
for _, r in records:
    if r.lemma not in best or r.margin < best[r.lemma].margin:
        best[r.lemma] = r
for kind, r in sorted(best.items()):
    print(f"{kind:<15} tightest margin {r.margin:.3e}  ok={r.ok}")
print(f"{sum(not r.ok for _, r in records)} failing records out of {len(records)}")
