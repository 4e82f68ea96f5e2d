"""
Where the construction applies
==============================

For each pair of burst lengths, list the deadlines T for which a
rate-optimal relay code can be built, and compare with the simpler
sufficient condition and the divisibility condition of earlier work.
"""

from tbsc import feasibility

T_MAX = 24

for b1 in range(1, 5):
    for b2 in range(1, 5):
        row = []
        for T in range(b1 + b2, T_MAX + 1):
            rep = feasibility(b1, b2, T)
            # '#' feasible, 's' also meets the sufficient condition, '.' not feasible
            if not rep.feasible:
                row.append(".")
            elif rep.sufficient:
                row.append("s")
            else:
                row.append("#")
        pad = " " * (b1 + b2 - 2)
        print(f"b1={b1} b2={b2}  T=2..{T_MAX}: {pad}{''.join(row)}")

# (2, 3) is the interesting case: T = 6 is the only gap
rows = [feasibility(2, 3, T) for T in range(5, 21)]
print("feasible T for (2, 3):", [r.T for r in rows if r.feasible])
print("optimal rates:", {r.T: str(r.optimal_rate) for r in rows if r.feasible})

# Equal burst lengths reduce to b | T - b
print("feasible T for (3, 3):", [T for T in range(6, 25) if feasibility(3, 3, T).feasible])
