"""
Typical subspaces at desk scale
===============================

A typical projector keeps the product eigenvectors of ``rho^{⊗n}`` whose
sample entropy is close to ``H(rho)``.  At small ``n`` the sample entropy
takes few values, so the kept weight moves in steps rather than smoothly.
"""

import numpy as np

from cqbroadcast import von_neumann_entropy, weak_typical_projector
from cqbroadcast.typicality import strong_typical_set

rho = np.diag([0.25, 0.75])
h = von_neumann_entropy(rho)
print(f"H(rho) = {h:.6f} bits")

print("\n n  delta  rank  2^(n(H+delta))  Tr[Pi rho^n]")
for delta in (0.1, 0.2, 0.4):
    big = np.ones((1, 1))
    for n in range(1, 9):
        big = np.kron(big, rho)
        tp = weak_typical_projector(rho, n, delta)
        weight = np.trace(tp.projector @ big).real
        print(f"{n:2d}  {delta:.1f}  {tp.rank:4d}  {2 ** (n * (h + delta)):14.1f}  {weight:.4f}")

# Strong typicality counts letters instead of log-probabilities.
ts = strong_typical_set([0.5, 0.5], 4, 0.0)
print(f"\nbalanced binary sequences of length 4: {len(ts)} -> {ts.members}")
