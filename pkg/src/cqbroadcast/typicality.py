"""Weak and strong typical sets and typical projectors on ``n``-fold spaces.

Projectors are built by exact enumeration of eigenvalue index strings: the
``n``-fold eigenbasis is the tensor product of single-copy eigenbases
(first copy most significant) and membership is decided per basis vector.
Membership comparisons are boundary-inclusive with ``1e-12`` slack.
"""

import itertools
from dataclasses import dataclass, field

import numpy as np

from .exceptions import OversizeError, ShapeError
from .info import von_neumann_entropy
from .linalg import MAX_DIM, TOL_ZERO_EIG, as_hermitian, tensor_power_list

BOUNDARY_SLACK = 1e-12
MAX_SEQUENCES = 2 ** 24

FLAVORS = ("weak", "weak-conditional", "strong", "strong-conditional")


@dataclass(frozen=True, eq=False)
class TypicalProjector:
    """Projector onto a typical subspace together with how it was built.

    ``mask`` marks which product eigenvectors (in ``itertools.product``
    order of eigen-indices) span the subspace; ``basis`` holds the
    corresponding column vectors.
    """

    projector: np.ndarray
    flavor: str
    delta: float
    n: int
    reference: str
    mask: np.ndarray = field(repr=False)
    basis: np.ndarray = field(repr=False)

    @property
    def rank(self):
        return int(self.mask.sum())

    @property
    def dim(self):
        return self.projector.shape[0]


@dataclass(frozen=True)
class TypicalSet:
    """Explicitly enumerated strongly typical sequences."""

    alphabet_sizes: tuple
    n: int
    delta: float
    members: tuple

    def __len__(self):
        return len(self.members)

    def __contains__(self, seq):
        return tuple(int(s) for s in seq) in set(self.members)


def _spectrum(rho):
    vals, vecs = as_hermitian(rho).eig()
    vals = np.where(vals > TOL_ZERO_EIG, vals, 0.0)
    return vals, vecs


def _index_strings(dims):
    """All eigen-index strings for local dimensions ``dims`` as an int array."""
    grids = np.indices(tuple(dims)).reshape(len(dims), -1)
    return grids.T


def _projector_from_mask(local_vecs, mask, max_dim):
    dims = [v.shape[0] for v in local_vecs]
    total = int(np.prod(dims))
    if total > max_dim:
        raise OversizeError(total, max_dim, "typical projector")
    big = tensor_power_list(local_vecs, max_dim=max_dim)
    basis = big[:, mask]
    return basis @ basis.conj().T, basis


def _guard(dims, max_dim):
    limit = MAX_DIM if max_dim is None else max_dim
    total = int(np.prod(dims))
    if total > limit:
        raise OversizeError(total, limit, "typical projector")
    return limit


def _sample_entropy_and_counts(spectra, seq_letters):
    """Per product eigenvector: sample entropy and index counts per letter."""
    dims = [len(spectra[a]) for a in seq_letters]
    idx = _index_strings(dims)
    n = len(seq_letters)
    with np.errstate(divide="ignore"):
        logs = [np.where(spectra[a] > 0, np.log2(np.where(spectra[a] > 0, spectra[a], 1.0)), -np.inf)
                for a in seq_letters]
    total = np.zeros(idx.shape[0])
    for k in range(n):
        total = total + logs[k][idx[:, k]]
    return -total / n, idx


def weak_typical_projector(rho, n, delta, max_dim=None):
    """Weakly typical projector of ``rho^{⊗n}``.

    Spans product eigenvectors whose sample entropy
    ``-(1/n) sum_k log2 lambda_{i_k}`` lies within ``delta`` of ``H(rho)``.
    """
    rho = as_hermitian(rho)
    limit = _guard([rho.dim] * n, max_dim)
    vals, vecs = _spectrum(rho)
    h = von_neumann_entropy(rho)
    sample, _ = _sample_entropy_and_counts({0: vals}, [0] * n)
    mask = np.abs(sample - h) <= delta + BOUNDARY_SLACK
    proj, basis = _projector_from_mask([vecs] * n, mask, limit)
    return TypicalProjector(proj, "weak", float(delta), int(n),
                            f"weak-typical of state with H={h:.6g}", mask, basis)


def _strong_mask(counts_by_letter, letter_counts, spectra, n, delta):
    mask = None
    for a, counts in counts_by_letter.items():
        lam = spectra[a]
        expected = letter_counts[a] / n * lam
        ok = np.abs(counts / n - expected) <= delta + BOUNDARY_SLACK
        # Zero eigenvalues must never occur.
        ok &= np.where(lam[None, :] > 0, True, counts == 0)
        ok = ok.all(axis=1)
        mask = ok if mask is None else mask & ok
    return mask


def strong_typical_projector(rho, n, delta, max_dim=None):
    """Strongly typical projector: eigen-index frequencies within ``delta`` of the spectrum."""
    rho = as_hermitian(rho)
    limit = _guard([rho.dim] * n, max_dim)
    vals, vecs = _spectrum(rho)
    idx = _index_strings([rho.dim] * n)
    counts = np.stack([(idx == j).sum(axis=1) for j in range(rho.dim)], axis=1)
    mask = _strong_mask({0: counts}, {0: n}, {0: vals}, n, delta)
    proj, basis = _projector_from_mask([vecs] * n, mask, limit)
    return TypicalProjector(proj, "strong", float(delta), int(n),
                            "strong-typical of state", mask, basis)


def conditional_typical_projector(states, seq, delta, flavor="weak", max_dim=None):
    """Conditionally typical projector of ``⊗_k states[seq_k]``.

    Parameters
    ----------
    states : sequence of density matrices
        One state per letter.
    seq : sequence of int
        The conditioning sequence.
    flavor : {"weak", "strong"}
        ``"weak"``: sample entropy within ``delta`` of ``(1/n) sum_k H(states[seq_k])``.
        ``"strong"``: for every letter ``a`` and eigen-index ``j`` of
        ``states[a]``, ``|N(a,j)/n - N(a)/n * lambda_j| <= delta``, and
        ``N(a,j) = 0`` whenever ``lambda_j = 0``.
    """
    if flavor not in ("weak", "strong"):
        raise ValueError(f"flavor must be 'weak' or 'strong', got {flavor!r}")
    ops = [as_hermitian(s) for s in states]
    seq = [int(s) for s in np.asarray(seq).ravel()]
    if any(s < 0 or s >= len(ops) for s in seq):
        raise ShapeError("sequence letter outside the state list")
    n = len(seq)
    limit = _guard([ops[a].dim for a in seq], max_dim)
    used = sorted(set(seq))
    spectra, vecs = {}, {}
    for a in used:
        spectra[a], vecs[a] = _spectrum(ops[a])
    if flavor == "weak":
        sample, _ = _sample_entropy_and_counts(spectra, seq)
        target = np.mean([von_neumann_entropy(ops[a]) for a in seq])
        mask = np.abs(sample - target) <= delta + BOUNDARY_SLACK
    else:
        idx = _index_strings([ops[a].dim for a in seq])
        positions = {a: [k for k in range(n) if seq[k] == a] for a in used}
        counts_by_letter = {
            a: np.stack([(idx[:, positions[a]] == j).sum(axis=1)
                         for j in range(ops[a].dim)], axis=1)
            for a in used
        }
        letter_counts = {a: len(positions[a]) for a in used}
        mask = _strong_mask(counts_by_letter, letter_counts, spectra, n, delta)
    proj, basis = _projector_from_mask([vecs[a] for a in seq], mask, limit)
    return TypicalProjector(proj, f"{flavor}-conditional", float(delta), n,
                            f"conditional on sequence {tuple(seq)}", mask, basis)


def letter_counts(seq, size):
    return np.bincount(np.asarray(seq, dtype=int).ravel(), minlength=size)


def is_strongly_typical(seq, p, delta):
    """``|N(a)/n - p(a)| <= delta`` for every letter, and ``N(a) = 0`` when ``p(a) = 0``."""
    p = np.asarray(p, dtype=float).ravel()
    seq = np.asarray(seq, dtype=int).ravel()
    n = seq.size
    if n == 0:
        raise ShapeError("empty sequence")
    if np.any(seq < 0) or np.any(seq >= p.size):
        return False
    counts = letter_counts(seq, p.size)
    if np.any((p <= 0) & (counts > 0)):
        return False
    return bool(np.all(np.abs(counts / n - p) <= delta + BOUNDARY_SLACK))


def strong_typical_set(p, n, delta):
    """Enumerate the strongly typical set of ``p`` at blocklength ``n``."""
    p = np.asarray(p, dtype=float).ravel()
    k = p.size
    if k ** n > MAX_SEQUENCES:
        raise OversizeError(k ** n, MAX_SEQUENCES, "sequence enumeration")
    seqs = _index_strings([k] * n)
    counts = np.stack([(seqs == a).sum(axis=1) for a in range(k)], axis=1)
    ok = np.all(np.abs(counts / n - p) <= delta + BOUNDARY_SLACK, axis=1)
    ok &= np.all(np.where(p > 0, True, counts == 0), axis=1)
    members = tuple(tuple(int(s) for s in row) for row in seqs[ok])
    return TypicalSet((k,), int(n), float(delta), members)


def jointly_typical_check(u1_seq, u2_seq, p_joint, delta):
    """True iff the pair sequence is strongly typical for ``p_joint``."""
    u1 = np.asarray(u1_seq, dtype=int).ravel()
    u2 = np.asarray(u2_seq, dtype=int).ravel()
    if u1.size != u2.size:
        raise ShapeError(f"sequence lengths differ: {u1.size} != {u2.size}")
    p = np.asarray(p_joint, dtype=float)
    if p.ndim != 2:
        raise ShapeError("p_joint must be a 2-d table")
    k1, k2 = p.shape
    if np.any(u1 < 0) or np.any(u1 >= k1) or np.any(u2 < 0) or np.any(u2 >= k2):
        return False
    return is_strongly_typical(u1 * k2 + u2, p.ravel(), delta)


def joint_strong_typical_set(p_joint, n, delta):
    """Enumerate typical pair sequences as ``(u1_seq, u2_seq)`` tuples."""
    p = np.asarray(p_joint, dtype=float)
    k2 = p.shape[1]
    flat = strong_typical_set(p.ravel(), n, delta)
    members = tuple((tuple(s // k2 for s in seq), tuple(s % k2 for s in seq))
                    for seq in flat.members)
    return TypicalSet(p.shape, int(n), float(delta), members)


def sequences(alphabet_size, n):
    """Iterate all length-``n`` sequences in lexicographic order."""
    return itertools.product(range(alphabet_size), repeat=n)
