"""Randomised numerical checks of the operator inequalities behind the codes.

Each check draws independent instances from per-instance child seeds of
``numpy.random.SeedSequence(seed)``, evaluates a slack that is nonnegative
exactly when the inequality holds, and keeps the worst instance.  Re-running
a check with the same seed reproduces every slack bit for bit.
"""

import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from .channel import load_example, marginal_channel, n_fold_output
from .codec import cloud_distribution, correlated_distribution, marton_states
from .exceptions import EmptyTypicalSetError
from .info import _check_distribution, build_superposition_state, conditional_entropy
from .linalg import inv_sqrt_on_support, sqrtm_psd, trace_norm
from .typicality import (conditional_typical_projector, joint_strong_typical_set,
                         strong_typical_projector)

TOL_OPERATOR = 1e-8
TOL_TRACE = 1e-9

SUITES = ("hayashi-nagaoka", "gentle", "trace-ineq", "projector-trick",
          "marton-support", "combined-ineq")


@dataclass
class LemmaCheckResult:
    """Worst slack of one inequality over ``instances`` random draws.

    ``passed`` is ``worst_slack >= -tolerance``.  ``worst_instance`` holds
    the serialised operators (``[re, im]`` pairs) of the worst draw together
    with its instance index.
    """

    lemma: str
    instances: int
    worst_slack: float
    passed: bool
    seed: int
    tolerance: float
    worst_instance: dict = field(default=None, repr=False)
    details: dict = field(default_factory=dict)

    def to_dict(self, include_instance=None):
        d = asdict(self)
        if include_instance is None:
            include_instance = not self.passed
        if not include_instance:
            d.pop("worst_instance")
        return _jsonable(d)

    def to_json(self, include_instance=None):
        return json.dumps(self.to_dict(include_instance), sort_keys=True)


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        if np.iscomplexobj(obj):
            return _jsonable(np.stack([obj.real, obj.imag], axis=-1))
        return _jsonable(obj.tolist())
    if isinstance(obj, (np.floating, float)):
        return float(format(float(obj) + 0.0, ".12g"))
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    return obj


# ---------------------------------------------------------------------------
# Random operators


def _rngs(seed, instances):
    return [np.random.default_rng(s) for s in np.random.SeedSequence(seed).spawn(instances)]


def random_psd(rng, dim, rank=None):
    """``G G^dagger`` for a complex Gaussian ``dim x rank`` matrix ``G``."""
    rank = dim if rank is None else rank
    g = rng.standard_normal((dim, rank)) + 1j * rng.standard_normal((dim, rank))
    return g @ g.conj().T


def random_density(rng, dim, rank=None):
    m = random_psd(rng, dim, rank)
    return m / np.trace(m).real


def random_effect(rng, dim):
    """Random ``0 <= E <= I``: a random Hermitian with eigenvalues clamped to [0, 1].

    The clamp leaves some eigenvalues at exactly 0 or 1, so projector-like
    effects are drawn with positive probability.
    """
    g = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    h = (g + g.conj().T) / 2
    vals, vecs = np.linalg.eigh(h)
    vals = np.clip(0.5 + 0.5 * vals / max(1.0, math.sqrt(dim)), 0.0, 1.0)
    return (vecs * vals) @ vecs.conj().T


def _hermitian_min_eig(m):
    return float(np.linalg.eigvalsh((m + m.conj().T) / 2)[0])


def _run(lemma, seed, instances, tol, one, details=None):
    if instances < 1:
        raise ValueError("instances must be at least 1")
    worst, worst_k, worst_ops = math.inf, None, None
    for k, rng in enumerate(_rngs(seed, instances)):
        slack, ops = one(rng)
        if slack < worst:
            worst, worst_k, worst_ops = slack, k, ops
    inst = dict(worst_ops or {})
    inst["index"] = worst_k
    return LemmaCheckResult(lemma, int(instances), float(worst), bool(worst >= -tol),
                            int(seed), float(tol), inst, dict(details or {}))


# ---------------------------------------------------------------------------
# Operator inequalities


def hayashi_nagaoka_slack(s, t):
    """Min eigenvalue of ``2(I - S) + 4T - (I - (S+T)^{-1/2} S (S+T)^{-1/2})``."""
    d = s.shape[0]
    root = inv_sqrt_on_support(s + t).matrix
    lhs = np.eye(d) - root @ s @ root
    rhs = 2 * (np.eye(d) - s) + 4 * t
    return _hermitian_min_eig(rhs - lhs)


def check_hayashi_nagaoka(dim, instances, seed):
    """Random ``0 <= S <= I`` and PSD ``T`` of random rank; inverse on the support of ``S + T``."""
    if dim < 1:
        raise ValueError("dim must be at least 1")

    def one(rng):
        s = random_effect(rng, dim)
        t = random_psd(rng, dim, int(rng.integers(0, dim + 1))) * rng.uniform(0, 1)
        return hayashi_nagaoka_slack(s, t), {"S": s, "T": t}

    return _run("hayashi-nagaoka", seed, instances, TOL_OPERATOR, one, {"dim": dim})


def gentle_operator_gap(probabilities, states, effect):
    """``2 sqrt(eps) - sum_x p(x) ||sqrt(L) rho_x sqrt(L) - rho_x||_1`` with ``eps = 1 - Tr L rho_avg``."""
    p = np.asarray(probabilities, dtype=float)
    avg = np.tensordot(p, states, axes=1)
    eps = max(0.0, 1.0 - float(np.real(np.trace(effect @ avg))))
    root = sqrtm_psd(effect)
    dist = sum(px * trace_norm(root @ r @ root - r) for px, r in zip(p, states))
    return 2 * math.sqrt(eps) - dist, eps


def check_gentle_operator(dim, ensemble_size, instances, seed):
    """Expected disturbance of a random ensemble under a random effect."""

    def one(rng):
        p = rng.dirichlet(np.ones(ensemble_size))
        states = np.stack([random_density(rng, dim, int(rng.integers(1, dim + 1)))
                           for _ in range(ensemble_size)])
        lam = random_effect(rng, dim)
        gap, eps = gentle_operator_gap(p, states, lam)
        return gap, {"p": p, "states": states, "Lambda": lam, "epsilon": eps}

    return _run("gentle", seed, instances, TOL_OPERATOR, one,
                {"dim": dim, "ensemble_size": ensemble_size})


def trace_inequality_gap(rho, sigma, effect):
    """``Tr L sigma + ||rho - sigma||_1 - Tr L rho``."""
    tl = lambda m: float(np.real(np.trace(effect @ m)))  # noqa: E731
    return tl(sigma) + trace_norm(rho - sigma) - tl(rho)


def check_trace_inequality(dim, instances, seed):

    def one(rng):
        rho = random_density(rng, dim, int(rng.integers(1, dim + 1)))
        sigma = random_density(rng, dim, int(rng.integers(1, dim + 1)))
        lam = random_effect(rng, dim)
        return trace_inequality_gap(rho, sigma, lam), {"rho": rho, "sigma": sigma, "Lambda": lam}

    return _run("trace-ineq", seed, instances, TOL_TRACE, one, {"dim": dim})


def combined_inequality_slack(gamma, lam):
    """Min eigenvalue of ``(I - G⊗I) + (I - I⊗L) - (I - G⊗L)``."""
    d1, d2 = gamma.shape[0], lam.shape[0]
    i1, i2 = np.eye(d1), np.eye(d2)
    eye = np.eye(d1 * d2)
    lhs = eye - np.kron(gamma, lam)
    rhs = (eye - np.kron(gamma, i2)) + (eye - np.kron(i1, lam))
    return _hermitian_min_eig(rhs - lhs)


def check_combined_operator_inequality(dim1, dim2, instances, seed):

    def one(rng):
        g = random_effect(rng, dim1)
        lam = random_effect(rng, dim2)
        return combined_inequality_slack(g, lam), {"Gamma": g, "Lambda": lam}

    return _run("combined-ineq", seed, instances, TOL_TRACE, one, {"dims": [dim1, dim2]})


# ---------------------------------------------------------------------------
# Code-dependent checks


def _sample_rows(rng, p, size):
    c = np.cumsum(p)
    return np.minimum(np.searchsorted(c, rng.random(size) * c[-1], side="right"), len(p) - 1)


def projector_trick_constant(ch, p_w, p_x_given_w, n, delta):
    """``K = 2^{n [H(B1|W X) + delta]}``."""
    theta = build_superposition_state(p_w, p_x_given_w, ch)
    h = conditional_entropy(theta, "B1", ("W", "X"))
    return 2.0 ** (n * (h + delta)), h


def projector_trick_slack(states, seq, delta, k_const):
    """Min eigenvalue of ``K rho_{x^n} - Pi_{x^n}`` on the support of ``Pi_{x^n}``."""
    proj = conditional_typical_projector(states, seq, delta, "weak")
    if proj.rank == 0:
        return math.inf, proj
    rho = states[seq[0]]
    for a in seq[1:]:
        rho = np.kron(rho, states[a])
    b = proj.basis
    m = k_const * (b.conj().T @ rho @ b) - np.eye(b.shape[1])
    return _hermitian_min_eig(m), proj


def check_projector_trick(ch, p_w, p_x_given_w, n, delta, instances, seed):
    """Sample codewords ``x^n`` from the code distribution and compare operators.

    Codewords whose typical projector is empty pass vacuously and are
    counted in ``details["empty"]``.
    """
    p_w = _check_distribution(p_w, "p_W")
    cond = np.asarray(p_x_given_w, dtype=float)
    p_x = p_w @ cond
    rho = marginal_channel(ch, 1)
    k_const, h = projector_trick_constant(ch, p_w, cond, n, delta)
    empty = [0]

    def one(rng):
        ws = _sample_rows(rng, p_w, n)
        seq = tuple(int(_sample_rows(rng, cond[w], 1)[0]) for w in ws)
        slack, proj = projector_trick_slack(rho, seq, delta, k_const)
        if proj.rank == 0:
            empty[0] += 1
        return slack, {"codeword": list(seq), "rank": proj.rank}

    res = _run("projector-trick", seed, instances, TOL_OPERATOR, one,
               {"n": n, "delta": delta, "K": k_const, "H_B1_given_WX": h,
                "p_x": p_x.tolist()})
    res.details["empty"] = empty[0]
    if math.isinf(res.worst_slack):
        res.worst_slack = 0.0
        res.passed = True
    return res


def marton_support_traces(ch, p_u1u2, f, u1, u2, delta, receiver=1):
    """``(Tr[Pi_avg rho], Tr[Pi_u rho])`` on receiver ``i`` for the pair ``(u1^n, u2^n)``."""
    f = np.asarray(f, dtype=int)
    letters = [int(f[a, b]) for a, b in zip(u1, u2)]
    rho = n_fold_output(ch, letters, receiver)
    omega, avg = marton_states(p_u1u2, f, ch, receiver)
    n = len(letters)
    pi_avg = strong_typical_projector(avg, n, delta).projector
    own = u1 if receiver == 1 else u2
    pi_u = conditional_typical_projector(omega, own, delta, "strong").projector
    tr = lambda m: float(np.real(np.sum(m.T * rho)))  # noqa: E731
    return tr(pi_avg), tr(pi_u)


def check_marton_support_lemma(ch, p_u1u2, f, n, delta, instances, seed, epsilon=None):
    """Support of strongly jointly typical pairs on both receivers' projectors.

    Pairs are drawn uniformly from the enumerated jointly typical set.  The
    reported ``details["epsilon"]`` is ``1 - min trace``.  With ``epsilon``
    given the check passes iff every trace is at least ``1 - epsilon``;
    otherwise it passes iff every trace is positive, which is the
    nontrivial-support part of the claim.

    Raises
    ------
    EmptyTypicalSetError
        If no pair is jointly typical at this ``(n, delta)``.
    """
    p = _check_distribution(p_u1u2, "p_U1U2")
    members = joint_strong_typical_set(p, n, delta).members
    if not members:
        raise EmptyTypicalSetError(f"no strongly jointly typical pair at n={n}, delta={delta}")
    traces = []

    def one(rng):
        u1, u2 = members[int(rng.integers(len(members)))]
        vals = [*marton_support_traces(ch, p, f, u1, u2, delta, 1),
                *marton_support_traces(ch, p, f, u1, u2, delta, 2)]
        low = min(vals)
        traces.append(low)
        bar = 0.0 if epsilon is None else 1.0 - epsilon
        return low - bar, {"u1": list(u1), "u2": list(u2), "traces": vals}

    res = _run("marton-support", seed, instances, TOL_OPERATOR, one,
               {"n": n, "delta": delta, "typical_pairs": len(members)})
    low = min(traces)
    res.details.update({"min_trace": low, "epsilon": 1.0 - low,
                        "epsilon_bound": epsilon})
    if epsilon is None:
        res.passed = bool(low > 0)
    return res


# ---------------------------------------------------------------------------
# Suite


def run_suite(suite="all", instances=500, seed=7, channel=None, n=6, delta=0.3,
              superposition_dist=None, marton_dist=None, threads=None):
    """Run one lemma check or all of them; returns a list of results.

    ``channel`` feeds the projector-trick and Marton-support checks; they
    default to the bundled ``bsc_like`` channel with the reference
    distributions of :mod:`cqbroadcast.codec`.
    """
    names = SUITES if suite == "all" else (suite,)
    unknown = [s for s in names if s not in SUITES]
    if unknown:
        raise ValueError(f"unknown suite {unknown[0]!r}; choose from {SUITES + ('all',)}")
    ch = load_example("bsc_like") if channel is None else channel
    k = ch.input_alphabet_size
    sp = superposition_dist or cloud_distribution(2, k)
    mt = marton_dist or correlated_distribution(2, 2, k)
    jobs = {
        "hayashi-nagaoka": lambda: check_hayashi_nagaoka(8, instances, seed),
        "gentle": lambda: check_gentle_operator(6, 3, instances, seed),
        "trace-ineq": lambda: check_trace_inequality(5, instances, seed),
        "projector-trick": lambda: check_projector_trick(ch, sp[0], sp[1], n, delta,
                                                         instances, seed),
        "marton-support": lambda: check_marton_support_lemma(ch, mt[0], mt[1], n, delta,
                                                             instances, seed),
        "combined-ineq": lambda: check_combined_operator_inequality(3, 3, instances, seed),
    }
    workers = max(1, int(threads or 1))
    if workers == 1:
        return [jobs[s]() for s in names]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(lambda s: jobs[s](), names))
