"""
Why the relay-destination code recovers its first coordinates in b slots
========================================================================

The erased symbols of a burst are tied to the following parity packets
by a block matrix.  Keeping only the first q rows of each block gives a
square matrix, and for the Type-B family it is always invertible.
"""

import numpy as np

from tbsc import TypeBParams, build_type_b, rank, recovery_matrix, reduced_p0_matrix
from tbsc.constructions import head_permutation_block
from tbsc.oracle import oracle_recovery_times

code = build_type_b(TypeBParams(b=3, k=5, horizon=5))
m = recovery_matrix(code)
print("recovery matrix", m.shape, "rank", rank(m))
print(m.to_text())

head = reduced_p0_matrix(3, 2, code)
print("reduced head matrix, rank", rank(head))
print(head.to_text())

# Its lower-right part is a permutation matrix
print(head_permutation_block(3, 2, code).to_text())

# Rank of the reduced head matrix across the whole (b, q) grid
grid = np.zeros((8, 8), dtype=int)
for b in range(1, 9):
    for q in range(1, b + 1):
        c = build_type_b(TypeBParams(b=b, k=b + q, horizon=b + q))
        grid[b - 1, q - 1] = rank(reduced_p0_matrix(b, q, c)) == b * q
print("full rank for every 1 <= q <= b <= 8:", bool(grid[np.tril_indices(8)].all()))

# Consequence: the first q coordinates have delay exactly b
for k in range(3, 10):
    params = TypeBParams(b=3, k=k, horizon=k)
    print(f"b=3 k={k} q={params.q}: profile {oracle_recovery_times(build_type_b(params))}")
