"""Random codebooks and square-root-measurement decoders at small blocklength.

The superposition decoder for receiver 1 sandwiches conditionally typical
projectors as ``Pi Pi_W Pi_X Pi_W Pi``; receiver 2 uses an HSW decoder
``Pi Pi_W Pi``.  The Marton decoders use ``Pi_avg Pi_u Pi_avg`` with
strongly typical projectors.  Every POVM carries an explicit remainder
element ``I - sum Lambda`` that is counted as a decoding failure.

Exact errors are computed without building the ``(d1 d2)^n`` joint state:
a receiver-1 operator is contracted letter by letter against the channel
outputs, leaving an operator on ``B2^n``.  The result equals
``Tr[(Lambda ⊗ Gamma) rho_{x^n}]``.
"""

import json
import math
import time
from dataclasses import asdict, dataclass, field

import numpy as np

from .channel import marginal_channel, n_fold_output
from .exceptions import OversizeError, ShapeError
from .info import _check_distribution, build_marton_state, mutual_information
from .linalg import MAX_DIM, TOL_PSD, inv_sqrt_on_support, min_eigenvalue
from .regions import marton_rate_triple, superposition_rate_triple
from .typicality import (conditional_typical_projector, strong_typical_projector,
                         weak_typical_projector)

POVM_COMPLETENESS_TOL = 1e-7
POVM_PSD_TOL = 1e-8


def default_delta(n):
    """Typicality slack used when none is given: 0.3 up to n = 4, else 0.2."""
    return 0.3 if n <= 4 else 0.2


def message_count(n, rate):
    """``max(1, floor(2^{n R}))``."""
    if rate < 0:
        raise ValueError("rates must be nonnegative")
    return max(1, int(math.floor(2.0 ** (n * rate) + 1e-9)))


# ---------------------------------------------------------------------------
# Codebooks


@dataclass(frozen=True, eq=False)
class SuperpositionCodebook:
    """Cloud centres ``w^n(m2)`` and satellites ``x^n(m1, m2)``.

    ``w_sequences`` has shape ``(M2, n)``; ``x_sequences`` has shape
    ``(M1, M2, n)``.
    """

    n: int
    m1_count: int
    m2_count: int
    w_sequences: np.ndarray
    x_sequences: np.ndarray
    p_w: np.ndarray
    p_x_given_w: np.ndarray
    seed: int

    scheme = "superposition"

    def codeword(self, m1, m2):
        return self.x_sequences[m1, m2]


def _check_conditional(p_w, p_x_given_w):
    p_w = _check_distribution(p_w, "p_W")
    cond = np.asarray(p_x_given_w, dtype=float)
    if cond.ndim != 2 or cond.shape[0] != p_w.size:
        raise ShapeError(f"p_X|W shape {cond.shape} incompatible with |W| = {p_w.size}")
    cond = np.stack([_check_distribution(row, "p_X|W row") for row in cond])
    return p_w, cond


def _sample(rng, p, size):
    # Inverse-CDF sampling keeps the stream identical across numpy versions.
    cdf = np.cumsum(p)
    cdf[-1] = 1.0
    return np.searchsorted(cdf, rng.random(size), side="right").clip(0, len(p) - 1)


def generate_superposition_codebook(p_w, p_x_given_w, n, m1_count, m2_count, seed):
    """Draw ``w^n(m2)`` i.i.d. from ``p_W`` and ``x^n(m1, m2)`` from ``p_X|W``."""
    if n < 1 or m1_count < 1 or m2_count < 1:
        raise ValueError("n and message counts must be at least 1")
    p_w, cond = _check_conditional(p_w, p_x_given_w)
    rng = np.random.default_rng(seed)
    w = _sample(rng, p_w, (m2_count, n))
    x = np.empty((m1_count, m2_count, n), dtype=int)
    for m2 in range(m2_count):
        for i in range(n):
            x[:, m2, i] = _sample(rng, cond[w[m2, i]], m1_count)
    return SuperpositionCodebook(int(n), int(m1_count), int(m2_count), w, x,
                                 p_w, cond, int(seed))


@dataclass(frozen=True, eq=False)
class MartonCodebook:
    """Binned auxiliary codebooks and the chosen jointly typical pairs.

    ``chosen[m1, m2]`` is ``(l1, l2)`` or ``(-1, -1)`` on encoder failure.
    ``bin1[l1]`` is the message index of auxiliary index ``l1``.
    """

    n: int
    l1_count: int
    l2_count: int
    m1_count: int
    m2_count: int
    u1_sequences: np.ndarray
    u2_sequences: np.ndarray
    bin1: np.ndarray
    bin2: np.ndarray
    chosen: np.ndarray
    f: np.ndarray
    p_u1u2: np.ndarray
    delta: float
    seed: int

    scheme = "marton"

    @property
    def encoder_failures(self):
        return int(np.sum(self.chosen[..., 0] < 0))

    @property
    def failure_rate(self):
        return self.encoder_failures / (self.m1_count * self.m2_count)

    def codeword(self, m1, m2):
        l1, l2 = self.chosen[m1, m2]
        if l1 < 0:
            return None
        return self.f[self.u1_sequences[l1], self.u2_sequences[l2]]

    def bins(self, receiver):
        b = self.bin1 if receiver == 1 else self.bin2
        m = self.m1_count if receiver == 1 else self.m2_count
        return [np.flatnonzero(b == k) for k in range(m)]


def _contiguous_bins(count, bins):
    out = np.empty(count, dtype=int)
    for k, block in enumerate(np.array_split(np.arange(count), bins)):
        out[block] = k
    return out


def marton_index_counts(p_u1u2, f, ch, n, delta):
    """``L_i = max(1, floor(2^{n [I(U_i;B_i) - delta]}))`` for both receivers."""
    theta = build_marton_state(p_u1u2, f, ch)
    i1 = mutual_information(theta, "U1", "B1")
    i2 = mutual_information(theta, "U2", "B2")
    return message_count(n, max(0.0, i1 - delta)), message_count(n, max(0.0, i2 - delta))


def generate_marton_codebook(p_u1u2, f, n, r1, r2, delta, seed, ch=None,
                             l1_count=None, l2_count=None):
    """Marton codebook with contiguous binning and first-fit pair selection.

    ``L1, L2`` come from the channel (``ch``) unless given explicitly.  For
    each message pair the bin product ``B_{m1} x C_{m2}`` is scanned in
    ascending ``(l1, l2)`` order and the first strongly jointly typical pair
    is taken; otherwise the pair is marked as an encoder failure.
    """
    p = _check_distribution(p_u1u2, "p_U1U2")
    f = np.asarray(f, dtype=int)
    if p.ndim != 2 or f.shape != p.shape:
        raise ShapeError("p_U1U2 and f must be tables of the same shape")
    if l1_count is None or l2_count is None:
        if ch is None:
            raise ValueError("a channel is needed to size the auxiliary codebooks")
        c1, c2 = marton_index_counts(p, f, ch, n, delta)
        l1_count = c1 if l1_count is None else l1_count
        l2_count = c2 if l2_count is None else l2_count
    m1 = message_count(n, r1)
    m2 = message_count(n, r2)
    k1, k2 = p.shape
    rng = np.random.default_rng(seed)
    u1 = _sample(rng, p.sum(1), (l1_count, n))
    u2 = _sample(rng, p.sum(0), (l2_count, n))
    bin1 = _contiguous_bins(l1_count, m1)
    bin2 = _contiguous_bins(l2_count, m2)
    typical = typical_pair_table(u1, u2, p, delta)
    chosen = np.full((m1, m2, 2), -1, dtype=int)
    for a in range(m1):
        rows = np.flatnonzero(bin1 == a)
        for b in range(m2):
            cols = np.flatnonzero(bin2 == b)
            if rows.size == 0 or cols.size == 0:
                continue
            hit = np.argwhere(typical[np.ix_(rows, cols)])
            if hit.size:
                chosen[a, b] = rows[hit[0, 0]], cols[hit[0, 1]]
    return MartonCodebook(int(n), int(l1_count), int(l2_count), m1, m2, u1, u2, bin1, bin2,
                          chosen, f, p, float(delta), int(seed))


def typical_pair_table(u1, u2, p_joint, delta):
    """Boolean table ``T[l1, l2]``: is ``(u1[l1], u2[l2])`` strongly jointly typical."""
    p = np.asarray(p_joint, dtype=float)
    k1, k2 = p.shape
    n = u1.shape[1]
    codes = u1[:, None, :] * k2 + u2[None, :, :]
    counts = np.stack([(codes == c).sum(-1) for c in range(k1 * k2)], axis=-1)
    flat = p.ravel()
    ok = np.all(np.abs(counts / n - flat) <= delta + 1e-12, axis=-1)
    ok &= np.all(np.where(flat > 0, True, counts == 0), axis=-1)
    return ok


# ---------------------------------------------------------------------------
# POVMs


@dataclass(frozen=True, eq=False)
class Povm:
    """Measurement with ``elements[k]`` for detection outcome ``labels[k]``.

    The final element is the remainder ``I - sum(detection elements)``; its
    label is ``None``.
    """

    elements: np.ndarray
    labels: list = field(repr=False)

    @property
    def dimension(self):
        return self.elements.shape[1]

    @property
    def detection(self):
        return self.elements[:-1]

    @property
    def remainder(self):
        return self.elements[-1]

    def completeness_error(self):
        s = self.elements.sum(axis=0) - np.eye(self.dimension)
        return float(np.linalg.norm(s, 2))

    def min_eigenvalue(self):
        return min(min_eigenvalue(e) for e in self.elements)

    def is_valid(self, tol_sum=POVM_COMPLETENESS_TOL, tol_psd=POVM_PSD_TOL):
        return self.completeness_error() <= tol_sum and self.min_eigenvalue() >= -tol_psd

    def probabilities(self, rho):
        """Born probabilities ``Tr[Lambda_k rho]`` for every outcome."""
        rho = np.asarray(rho)
        return np.real(np.einsum("kij,ji->k", self.elements, rho))


def square_root_povm(detectors, labels, tol=TOL_PSD):
    """Normalise positive detectors ``Pi'_m`` into ``S^{-1/2} Pi'_m S^{-1/2}``.

    ``S = sum_m Pi'_m`` is inverted on its support only; the remainder
    element restores completeness.
    """
    detectors = np.asarray(detectors, dtype=complex)
    d = detectors.shape[-1]
    if detectors.shape[0] == 0:
        return Povm(np.eye(d, dtype=complex)[None], [None])
    s = detectors.sum(axis=0)
    root = inv_sqrt_on_support(s, tol).matrix
    lam = root @ detectors @ root
    lam = (lam + np.swapaxes(lam.conj(), 1, 2)) / 2
    rest = np.eye(d) - lam.sum(axis=0)
    rest = (rest + rest.conj().T) / 2
    return Povm(np.concatenate([lam, rest[None]]), list(labels) + [None])


def _guard_receiver(d, n):
    if d ** n > MAX_DIM:
        raise OversizeError(d ** n, MAX_DIM, "receiver output")


class _ProjectorCache:
    """Memoise conditional typical projectors by sequence."""

    def __init__(self, states, delta, flavor):
        self.states = states
        self.delta = delta
        self.flavor = flavor
        self._cache = {}

    def __call__(self, seq):
        key = tuple(int(s) for s in seq)
        if key not in self._cache:
            self._cache[key] = conditional_typical_projector(
                self.states, key, self.delta, self.flavor).projector
        return self._cache[key]


def _superposition_states(cb, ch, receiver):
    rho = marginal_channel(ch, receiver)
    sigma = np.tensordot(cb.p_x_given_w, rho, axes=1)
    p_x = cb.p_w @ cb.p_x_given_w
    avg = np.tensordot(p_x, rho, axes=1)
    return rho, sigma, avg


def build_receiver1_povm(cb, ch, delta=None):
    """Simultaneous decoder of receiver 1: outcomes ``(m1, m2)`` plus remainder."""
    delta = default_delta(cb.n) if delta is None else delta
    _guard_receiver(ch.dim_b1, cb.n)
    rho, sigma, avg = _superposition_states(cb, ch, 1)
    pi = weak_typical_projector(avg, cb.n, delta).projector
    pi_w = _ProjectorCache(sigma, delta, "weak")
    pi_x = _ProjectorCache(rho, delta, "weak")
    detectors, labels = [], []
    for m1 in range(cb.m1_count):
        for m2 in range(cb.m2_count):
            pw = pi_w(cb.w_sequences[m2])
            core = pw @ pi_x(cb.x_sequences[m1, m2]) @ pw
            detectors.append(pi @ core @ pi)
            labels.append((m1, m2))
    return square_root_povm(detectors, labels)


def build_receiver2_povm(cb, ch, delta=None):
    """HSW decoder of receiver 2: outcomes ``m2`` plus remainder."""
    delta = default_delta(cb.n) if delta is None else delta
    _guard_receiver(ch.dim_b2, cb.n)
    _, sigma, avg = _superposition_states(cb, ch, 2)
    pi = weak_typical_projector(avg, cb.n, delta).projector
    pi_w = _ProjectorCache(sigma, delta, "weak")
    detectors = [pi @ pi_w(cb.w_sequences[m2]) @ pi for m2 in range(cb.m2_count)]
    return square_root_povm(detectors, list(range(cb.m2_count)))


def marton_states(p_u1u2, f, ch, receiver):
    """``omega_u`` for each value of the receiver's auxiliary and their average."""
    p = np.asarray(p_u1u2, dtype=float)
    f = np.asarray(f, dtype=int)
    rho = marginal_channel(ch, receiver)[f]
    if receiver == 2:
        p = p.T
        rho = np.swapaxes(rho, 0, 1)
    marg = p.sum(1)
    safe = np.where(marg > 0, marg, 1.0)
    cond = p / safe[:, None]
    omega = np.einsum("ab,abij->aij", cond, rho)
    # Unused auxiliary values still need a valid state for the projector cache.
    for a in np.flatnonzero(marg <= 0):
        omega[a] = np.eye(rho.shape[-1]) / rho.shape[-1]
    avg = np.tensordot(marg, omega, axes=1)
    return omega, avg


def build_marton_povm(cb, ch, receiver, delta=None, average_flavor="strong"):
    """Receiver-``i`` Marton decoder over auxiliary indices plus remainder."""
    delta = cb.delta if delta is None else delta
    d = ch.dim_b1 if receiver == 1 else ch.dim_b2
    _guard_receiver(d, cb.n)
    omega, avg = marton_states(cb.p_u1u2, cb.f, ch, receiver)
    if average_flavor == "strong":
        pi = strong_typical_projector(avg, cb.n, delta).projector
    else:
        pi = weak_typical_projector(avg, cb.n, delta).projector
    pi_u = _ProjectorCache(omega, delta, "strong")
    seqs = cb.u1_sequences if receiver == 1 else cb.u2_sequences
    detectors = [pi @ pi_u(s) @ pi for s in seqs]
    return square_root_povm(detectors, list(range(len(seqs))))


# ---------------------------------------------------------------------------
# Error probabilities


@dataclass
class SimReport:
    """Outcome of an exact or Monte-Carlo error evaluation."""

    scheme: str
    n: int
    r1: float
    r2: float
    delta: float
    m1_count: int
    m2_count: int
    average_error: float
    average_error_alt: float
    receiver1_error: float  # None for Monte-Carlo reports
    receiver2_error: float
    per_message_errors: list
    encoder_failure_count: int
    mode: str
    nonunique_credit: bool
    seed: int
    trials: int = 0
    std_error: float = 0.0
    wall_time: float = 0.0

    def to_json(self, include_timing=False):
        d = asdict(self)
        if not include_timing:
            d.pop("wall_time")
        return json.dumps(_clean(d), indent=1, sort_keys=True)

    def csv_row(self):
        return ",".join([str(self.n), self.scheme, _fmt(self.r1), _fmt(self.r2),
                         _fmt(self.delta), str(self.seed), _fmt(self.average_error),
                         str(self.encoder_failure_count)])


CSV_HEADER = "n,scheme,r1,r2,delta,seed,avg_error,encoder_failures"


def _fmt(x):
    return format(float(x) + 0.0, ".12g")


def _clean(obj):
    if isinstance(obj, dict):
        return {k: _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        return float(_fmt(obj))
    if isinstance(obj, np.integer):
        return int(obj)
    return obj


def _local_tensors(ch):
    d1, d2 = ch.dim_b1, ch.dim_b2
    return np.asarray(ch.outputs).reshape(-1, d1, d2, d1, d2)


def receiver2_operator(lam, codeword, ch):
    """``Tr_{B1^n}[(Lambda ⊗ I) rho_{x^n}]`` as a ``d2^n x d2^n`` matrix."""
    d1, d2 = ch.dim_b1, ch.dim_b2
    seq = [int(s) for s in codeword]
    n = len(seq)
    loc = _local_tensors(ch)
    # Axes (out_1..out_n, in_1..in_n); position k switches from B1 to B2.
    t = np.asarray(lam).reshape([d1] * (2 * n))
    for k, x in enumerate(seq):
        r = loc[x]  # r[a', b, a, b'']
        # Contract t[.., a_k (row), .., a'_k (col), ..] with r[a', b, a, b''].
        t = np.tensordot(t, r, axes=([k, n + k], [2, 0]))
        # New trailing axes (b, b''); move them into positions k and n + k.
        t = np.moveaxis(t, [-2, -1], [k, n + k])
    return t.reshape(d2 ** n, d2 ** n)


def joint_success(lam, gam, codeword, ch):
    """``Tr[(Lambda ⊗ Gamma) rho_{x^n}]`` for a product channel input."""
    x = receiver2_operator(lam, codeword, ch)
    return float(np.real(np.sum(np.asarray(gam).T * x)))


def _receiver_operators(cb, povm1, povm2, nonunique_credit):
    """Per message: receiver-1 and receiver-2 success operators (credited, alternative)."""
    lam = povm1.detection
    gam = povm2.detection
    m1c, m2c = cb.m1_count, cb.m2_count
    ops = {}
    if cb.scheme == "superposition":
        pair = lam.reshape(m1c, m2c, *lam.shape[1:])
        m1_only = pair.sum(axis=1)
        for m1 in range(m1c):
            for m2 in range(m2c):
                credited = m1_only[m1] if nonunique_credit else pair[m1, m2]
                alt = pair[m1, m2] if nonunique_credit else m1_only[m1]
                ops[m1, m2] = (credited, gam[m2], alt, gam[m2])
    else:
        bins1 = [lam[b].sum(axis=0) for b in cb.bins(1)]
        bins2 = [gam[b].sum(axis=0) for b in cb.bins(2)]
        for m1 in range(m1c):
            for m2 in range(m2c):
                l1, l2 = cb.chosen[m1, m2]
                if l1 < 0:
                    ops[m1, m2] = None
                    continue
                ops[m1, m2] = (bins1[m1], bins2[m2], lam[l1], gam[l2])
    return ops


def choose_mode(ch, n, mode="auto"):
    joint_dim = (ch.dim_b1 * ch.dim_b2) ** n
    if mode == "auto":
        return "joint" if joint_dim <= MAX_DIM else "marginal"
    if mode == "joint" and joint_dim > MAX_DIM:
        raise OversizeError(joint_dim, MAX_DIM, "joint output")
    if mode not in ("joint", "marginal"):
        raise ValueError(f"unknown mode {mode!r}")
    return mode


def _rates(cb):
    return (math.log2(cb.m1_count) / cb.n, math.log2(cb.m2_count) / cb.n)


def average_error_probability(cb, povm1, povm2, ch, mode="auto", nonunique_credit=True,
                              delta=None):
    """Exact average error ``1/(M1 M2) sum_m Tr[(I - Lambda_m1 ⊗ Gamma_m2) rho_m]``.

    In ``"joint"`` mode the trace is exact.  In ``"marginal"`` mode each
    message error is the union bound ``min(1, e1 + e2)`` from the two
    receivers' marginal errors.  Marton encoder failures count as error 1.
    """
    start = time.perf_counter()
    mode = choose_mode(ch, cb.n, mode)
    ops = _receiver_operators(cb, povm1, povm2, nonunique_credit)
    per = np.ones((cb.m1_count, cb.m2_count))
    alt = np.ones_like(per)
    e1 = np.ones_like(per)
    e2 = np.ones_like(per)
    for (m1, m2), o in ops.items():
        if o is None:
            continue
        lam, gam, lam_alt, gam_alt = o
        x = cb.codeword(m1, m2)
        rho1 = n_fold_output(ch, x, 1)
        rho2 = n_fold_output(ch, x, 2)
        e1[m1, m2] = 1 - np.real(np.sum(lam.T * rho1))
        e2[m1, m2] = 1 - np.real(np.sum(gam.T * rho2))
        if mode == "joint":
            per[m1, m2] = 1 - joint_success(lam, gam, x, ch)
            alt[m1, m2] = 1 - joint_success(lam_alt, gam_alt, x, ch)
        else:
            per[m1, m2] = min(1.0, e1[m1, m2] + e2[m1, m2])
            a1 = 1 - np.real(np.sum(lam_alt.T * rho1))
            a2 = 1 - np.real(np.sum(gam_alt.T * rho2))
            alt[m1, m2] = min(1.0, a1 + a2)
    per = np.clip(per, 0.0, 1.0)
    alt = np.clip(alt, 0.0, 1.0)
    r1, r2 = _rates(cb)
    return SimReport(
        scheme=cb.scheme, n=cb.n, r1=r1, r2=r2,
        delta=float(_delta_of(cb, delta)), m1_count=cb.m1_count, m2_count=cb.m2_count,
        average_error=float(per.mean()), average_error_alt=float(alt.mean()),
        receiver1_error=float(np.clip(e1, 0, 1).mean()),
        receiver2_error=float(np.clip(e2, 0, 1).mean()),
        per_message_errors=per.tolist(),
        encoder_failure_count=getattr(cb, "encoder_failures", 0),
        mode=mode, nonunique_credit=bool(nonunique_credit), seed=cb.seed,
        wall_time=time.perf_counter() - start,
    )


def _delta_of(cb, delta):
    if delta is not None:
        return delta
    return getattr(cb, "delta", default_delta(cb.n))


def _outcome_success(cb, m1, m2, a, b, povm1, povm2, nonunique_credit):
    la = povm1.labels[a]
    lb = povm2.labels[b]
    if la is None or lb is None:
        return False, False
    if cb.scheme == "superposition":
        ok2 = lb == m2
        credited = la[0] == m1 if nonunique_credit else la == (m1, m2)
        alt = la == (m1, m2) if nonunique_credit else la[0] == m1
        return credited and ok2, alt and ok2
    l1, l2 = cb.chosen[m1, m2]
    msg = cb.bin1[la] == m1 and cb.bin2[lb] == m2
    return bool(msg), bool(la == l1 and lb == l2)


def simulate_decode(cb, povm1, povm2, ch, trials, seed, nonunique_credit=True, delta=None):
    """Monte-Carlo error estimate by sampling Born-rule outcomes.

    Each trial draws a uniform message pair, samples receiver 1's outcome
    from ``Tr[Lambda_a rho^{B1}]`` and then receiver 2's outcome from the
    conditional state ``Tr_{B1}[(Lambda_a ⊗ I) rho] / p(a)``.
    """
    if trials < 1:
        raise ValueError("trials must be at least 1")
    start = time.perf_counter()
    rng = np.random.default_rng(seed)
    m1c, m2c = cb.m1_count, cb.m2_count
    probs1 = {}
    cond2 = {}
    errors = np.zeros((m1c, m2c))
    hits = np.zeros((m1c, m2c))
    fails = 0
    fails_alt = 0
    for _ in range(trials):
        m1 = int(rng.integers(m1c))
        m2 = int(rng.integers(m2c))
        hits[m1, m2] += 1
        x = cb.codeword(m1, m2)
        if x is None:
            fails += 1
            fails_alt += 1
            errors[m1, m2] += 1
            continue
        if (m1, m2) not in probs1:
            p = np.clip(povm1.probabilities(n_fold_output(ch, x, 1)), 0, None)
            probs1[m1, m2] = p / p.sum()
        p1 = probs1[m1, m2]
        a = int(_sample(rng, p1, 1)[0])
        key = (m1, m2, a)
        if key not in cond2:
            op = receiver2_operator(povm1.elements[a], x, ch)
            q = np.clip(povm2.probabilities(op), 0, None)
            cond2[key] = q / q.sum() if q.sum() > 0 else np.full(q.size, 1.0 / q.size)
        b = int(_sample(rng, cond2[key], 1)[0])
        ok, ok_alt = _outcome_success(cb, m1, m2, a, b, povm1, povm2, nonunique_credit)
        if not ok:
            fails += 1
            errors[m1, m2] += 1
        if not ok_alt:
            fails_alt += 1
    avg = fails / trials
    per = np.divide(errors, hits, out=np.zeros_like(errors), where=hits > 0)
    r1, r2 = _rates(cb)
    return SimReport(
        scheme=cb.scheme, n=cb.n, r1=r1, r2=r2, delta=float(_delta_of(cb, delta)),
        m1_count=m1c, m2_count=m2c, average_error=avg, average_error_alt=fails_alt / trials,
        receiver1_error=None, receiver2_error=None,
        per_message_errors=per.tolist(),
        encoder_failure_count=getattr(cb, "encoder_failures", 0),
        mode="monte-carlo", nonunique_credit=bool(nonunique_credit), seed=int(seed),
        trials=int(trials), std_error=math.sqrt(max(avg * (1 - avg), 0.0) / trials),
        wall_time=time.perf_counter() - start,
    )


# ---------------------------------------------------------------------------
# One-call drivers


def run_superposition(ch, p_w, p_x_given_w, n, r1, r2, seed, delta=None, trials=0,
                      mode="auto", nonunique_credit=True):
    """Generate a code, build both decoders and evaluate its error."""
    delta = default_delta(n) if delta is None else delta
    cb = generate_superposition_codebook(p_w, p_x_given_w, n, message_count(n, r1),
                                         message_count(n, r2), seed)
    povm1 = build_receiver1_povm(cb, ch, delta)
    povm2 = build_receiver2_povm(cb, ch, delta)
    if trials:
        report = simulate_decode(cb, povm1, povm2, ch, trials, seed, nonunique_credit, delta)
    else:
        report = average_error_probability(cb, povm1, povm2, ch, mode, nonunique_credit, delta)
    return report, cb, (povm1, povm2)


def run_marton(ch, p_u1u2, f, n, r1, r2, seed, delta=None, trials=0, mode="auto",
               average_flavor="strong"):
    delta = default_delta(n) if delta is None else delta
    cb = generate_marton_codebook(p_u1u2, f, n, r1, r2, delta, seed, ch=ch)
    povm1 = build_marton_povm(cb, ch, 1, delta, average_flavor)
    povm2 = build_marton_povm(cb, ch, 2, delta, average_flavor)
    if trials:
        report = simulate_decode(cb, povm1, povm2, ch, trials, seed, True, delta)
    else:
        report = average_error_probability(cb, povm1, povm2, ch, mode, True, delta)
    return report, cb, (povm1, povm2)


# ---------------------------------------------------------------------------
# Default input distributions and reference configurations


def cloud_distribution(w_size, x_size, mix=0.0):
    """``p_W`` uniform and ``p_{X|W}`` uniform on a contiguous cloud of letters.

    Letter ``x`` belongs to cloud ``floor(x * |W| / |X|)``; clouds with no
    letter fall back to the uniform distribution.  ``mix`` blends every row
    with the uniform distribution on all letters.
    """
    if not 0 <= mix <= 1:
        raise ValueError("mix must lie in [0, 1]")
    p_w = np.full(w_size, 1.0 / w_size)
    cond = np.zeros((w_size, x_size))
    for x in range(x_size):
        cond[x * w_size // x_size, x] = 1.0
    for w in range(w_size):
        if cond[w].sum() == 0:
            cond[w] = 1.0
    cond /= cond.sum(axis=1, keepdims=True)
    cond = (1 - mix) * cond + mix / x_size
    return p_w, cond


def correlated_distribution(u1_size, u2_size, x_size, mix=0.2):
    """Correlated ``p_{U1 U2}`` and the letter map ``f(u1, u2) = (u2 |U1| + u1) mod |X|``.

    ``p`` puts mass on the diagonal ``u1 = u2`` (mod the smaller alphabet)
    blended with a fraction ``mix`` of the uniform table.
    """
    if not 0 <= mix <= 1:
        raise ValueError("mix must lie in [0, 1]")
    diag = np.zeros((u1_size, u2_size))
    for a in range(max(u1_size, u2_size)):
        diag[a % u1_size, a % u2_size] = 1.0
    diag /= diag.sum()
    p = (1 - mix) * diag + mix / (u1_size * u2_size)
    u1, u2 = np.meshgrid(np.arange(u1_size), np.arange(u2_size), indexing="ij")
    f = (u2 * u1_size + u1) % x_size
    return p, f


def superposition_corner(p_w, p_x_given_w, ch):
    """Corner ``(min(I(X;B1|W), I(X;B1) - I(W;B2)), I(W;B2))`` of the region."""
    a, b, c = superposition_rate_triple(p_w, p_x_given_w, ch)
    return max(0.0, min(a, c - b)), b


def marton_split(p_u1u2, f, ch, offset):
    """Rates on the line ``R1 + R2 = bound + offset`` split in proportion to the
    single-receiver terms; ``offset < 0`` stays inside the sum constraint."""
    a, b, i12 = marton_rate_triple(p_u1u2, f, ch)
    total = max(0.0, a + b - i12 + offset)
    if a + b <= 0:
        return total / 2, total / 2
    return total * a / (a + b), total * b / (a + b)


def reference_configuration(ch, scheme, scale=0.5):
    """Distribution and rates used for the bundled-channel sweeps.

    Superposition uses :func:`cloud_distribution` with ``|W| = 2`` at
    ``scale`` times :func:`superposition_corner`; Marton uses
    :func:`correlated_distribution` with binary auxiliaries at ``scale``
    times the proportional split of the sum bound.
    """
    k = ch.input_alphabet_size
    if scheme == "superposition":
        p_w, cond = cloud_distribution(2, k)
        r1, r2 = superposition_corner(p_w, cond, ch)
        return {"p_w": p_w, "p_x_given_w": cond, "r1": scale * r1, "r2": scale * r2}
    if scheme == "marton":
        p, f = correlated_distribution(2, 2, k)
        r1, r2 = marton_split(p, f, ch, 0.0)
        return {"p_u1u2": p, "f": f, "r1": scale * r1, "r2": scale * r2}
    raise ValueError(f"unknown scheme {scheme!r}")


def run_reference(ch, scheme, n, seed, scale=0.5, delta=None, trials=0, mode="auto"):
    """:func:`run_superposition` or :func:`run_marton` on :func:`reference_configuration`."""
    cfg = reference_configuration(ch, scheme, scale)
    if scheme == "superposition":
        return run_superposition(ch, cfg["p_w"], cfg["p_x_given_w"], n, cfg["r1"], cfg["r2"],
                                 seed, delta, trials, mode)
    return run_marton(ch, cfg["p_u1u2"], cfg["f"], n, cfg["r1"], cfg["r2"], seed, delta,
                      trials, mode)
