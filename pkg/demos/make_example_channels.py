"""
Building the bundled example channels
=====================================

The package ships four small channels used throughout the tests and demos.
This script regenerates their JSON files from closed-form constructions.
"""

import pathlib

import numpy as np

from cqbroadcast.channel import CQBroadcastChannel, dump_channel, product_channel

OUT = pathlib.Path(__file__).resolve().parents[1] / "src" / "cqbroadcast" / "examples"


def ket(v):
    v = np.asarray(v, dtype=complex)
    return np.outer(v, v.conj())


def depolarize(rho, p):
    return (1 - p) * rho + p * np.eye(rho.shape[0]) / rho.shape[0]


# Noiseless 1-bit broadcast: both receivers see x perfectly.
noiseless = CQBroadcastChannel(np.stack([ket([1, 0, 0, 0]), ket([0, 0, 0, 1])]), 2, 2)

# Constant channel: the output ignores x.
mixed = np.eye(4) / 4
constant = CQBroadcastChannel(np.stack([mixed, mixed]), 2, 2)

# Four letters x = 2w + b.  B1 receives a pure qubit state whose two
# b-variants overlap by 1/3, so each w-cloud averages to diag(2/3, 1/3) or
# diag(1/3, 2/3).  B2 receives |w> depolarised with p = 2/3.  Every letter
# has the same spectrum on each receiver, and all spectra are pure, flat or
# (2/3, 1/3), which keeps small-n typical subspaces non-empty.
theta = np.arccos(np.sqrt(2 / 3))
c, s = np.cos(theta), np.sin(theta)
psi = [ket([c, s]), ket([c, -s]), ket([s, c]), ket([s, -c])]
phi = [depolarize(ket([1, 0]), 2 / 3), depolarize(ket([0, 1]), 2 / 3)]
bsc_like = product_channel(psi, [phi[0], phi[0], phi[1], phi[1]])

# B1 carries x, B2 always receives the same state.
tau = depolarize(ket([1, 0]), 2 / 3)
product_b2_constant = product_channel([ket([1, 0]), ket([0, 1])], [tau, tau])

if __name__ == "__main__":
    OUT.mkdir(parents=True, exist_ok=True)
    for name, ch in [("noiseless", noiseless), ("constant", constant),
                     ("bsc_like", bsc_like), ("product_b2_constant", product_b2_constant)]:
        (OUT / f"{name}.json").write_text(dump_channel(ch) + "\n", encoding="utf-8")
        print("wrote", name)
