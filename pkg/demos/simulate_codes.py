"""
Random codes and square-root decoders
=====================================

Draw a random superposition code at half the corner rates, build both
receivers' square-root measurements from typical projectors, and compute
the exact average error.  Averaged over codebooks it falls with ``n``.
A Monte-Carlo run of the same code lands within a few standard errors.
"""

import numpy as np

from cqbroadcast import load_example, simulate_decode
from cqbroadcast.codec import marton_split, run_reference

ch = load_example("bsc_like")

print("superposition coding, 20 random codebooks per n")
for n in (2, 4, 6):
    errors = [run_reference(ch, "superposition", n, seed)[0].average_error for seed in range(20)]
    print(f"  n={n}: mean exact error {np.mean(errors):.4f}")

report, cb, (povm1, povm2) = run_reference(ch, "superposition", 4, 0)
mc = simulate_decode(cb, povm1, povm2, ch, 5000, 1)
print(f"\nn=4 code: exact {report.average_error:.4f}, "
      f"Monte-Carlo {mc.average_error:.4f} +/- {mc.std_error:.4f}")

# Marton encoding fails when no jointly typical pair sits in a bin product.
from cqbroadcast.codec import generate_marton_codebook  # noqa: E402

noiseless = load_example("noiseless")
p = np.array([[0.45, 0.05], [0.05, 0.45]])
f = np.array([[0, 0], [1, 1]])
print("\nMarton encoder failure rate on the noiseless channel, 50 codebooks")
for offset in (-0.1, 0.3):
    r1, r2 = marton_split(p, f, noiseless, offset)
    row = []
    for n in (4, 6, 8):
        delta = 0.3 if n <= 4 else 0.2
        rates = [generate_marton_codebook(p, f, n, r1, r2, delta, s, ch=noiseless).failure_rate
                 for s in range(50)]
        row.append(f"n={n}: {np.mean(rates):.3f}")
    print(f"  sum-bound offset {offset:+.1f}: " + "  ".join(row))
