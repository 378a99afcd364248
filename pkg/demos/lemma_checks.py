"""
Randomised checks of the operator inequalities
==============================================

Every inequality used in the error analysis is tested on random operators.
The reported slack is the smallest gap between the two sides; a negative
value beyond round-off would be a counterexample.
"""

from cqbroadcast import run_suite

for res in run_suite(instances=200, seed=7):
    extra = {k: v for k, v in res.details.items() if k in ("K", "min_trace", "typical_pairs")}
    print(f"{res.lemma:16s} worst slack {res.worst_slack: .3e}  "
          f"{'pass' if res.passed else 'FAIL'}  {extra or ''}")
