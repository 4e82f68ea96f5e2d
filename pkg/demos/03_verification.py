"""
Checking the deadline claim
===========================

Run the exhaustive and randomized verifiers on a few codes, then break a
parity block and let the verifier find a schedule that exposes it.
"""

import time

from tbsc import build_tbsc, verify_tbsc, worst_case_delays

for args in [(2, 3, 7), (3, 2, 8), (1, 2, 4), (2, 2, 6)]:
    spec = build_tbsc(*args)
    t0 = time.perf_counter()
    ex = verify_tbsc(spec, mode="exhaustive")
    rnd = verify_tbsc(spec, mode="randomized", budget=300, seed=1)
    dt = time.perf_counter() - t0
    print(
        f"{args}: path={spec.path:9} rate={spec.rate}  "
        f"exhaustive {ex.pairs_checked:>6} pairs -> {'pass' if ex.passed else 'FAIL'}, "
        f"randomized -> {'pass' if rnd.passed else 'FAIL'}  ({dt:.2f}s)"
    )
    # worst delay per source coordinate vs. the sum of the two hop delays
    print("   worst case:", worst_case_delays(spec), " predicted:", spec.predicted_end_to_end())

# Negative control: drop P_4 from the (2, 3, 7) source-relay code
spec = build_tbsc(2, 3, 7)
p4 = spec.sr.block(4)
broken = spec.with_sr(spec.sr.with_block(4, p4 + p4))
rep = verify_tbsc(broken, mode="exhaustive")
print("broken code passes?", rep.passed)
print("minimal failing schedules:", rep.failure["sr_erased"], rep.failure["rd_erased"])
for msg in rep.failure["messages"][:3]:
    print("  ", msg)
