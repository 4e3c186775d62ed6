"""Empirically checking the guarantees the algorithm's analysis rests on.

Run: python demos/05_lemma_checks.py
"""

import json

from welfarist_bandits.theorycheck import VerifyConfig, run_verify_suite

# A lighter variant of the default suite (the CLI equivalent is
# `welfarist verify`); 60 runs instead of 200 keeps this demo under ~5 s.
config = VerifyConfig.from_json({"runs": 60, "numeric_samples": 200_000, "blocks": 20_000})
report = run_verify_suite(config)

ge = report["good_event"]
print("concentration event held in "
      f"{ge['runs_good']}/{ge['runs_total']} runs "
      f"(frequency {ge['frequency']:.4f}, required >= {ge['threshold']:.4f})")

for verdict in report["verdicts"]:
    print(f"{verdict['lemma_id']:<24} checked={verdict['instances_checked']:<8} "
          f"violations={verdict['violations']:<3} worst margin={verdict['worst_margin']:.4g}")

print("\nsuite passed:", report["passed"])

# The exploration-length sandwich and index-phase near-optimality are
# deterministic consequences of the concentration event: a single violation
# on a good-event run would mean an implementation bug, which is why this
# suite doubles as the sharpest correctness oracle for the policy engine.
print("\nfull report is JSON (what `welfarist verify --out report.json` writes):")
print(json.dumps(report["verdicts"][0], indent=2))
