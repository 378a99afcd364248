import itertools

import numpy as np
import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

from cqbroadcast.channel import load_example, product_channel
from cqbroadcast.codec import (SuperpositionCodebook, cloud_distribution, correlated_distribution,
                               generate_marton_codebook)

settings.register_profile("default", deadline=None, max_examples=40,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


def ket(v):
    v = np.asarray(v, dtype=complex)
    v = v / np.linalg.norm(v)
    return np.outer(v, v.conj())


def random_density(rng, d, rank=None):
    rank = d if rank is None else rank
    g = rng.standard_normal((d, rank)) + 1j * rng.standard_normal((d, rank))
    m = g @ g.conj().T
    return m / np.trace(m).real


def random_unitary(rng, d):
    g = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    q, r = np.linalg.qr(g)
    return q * (np.diag(r) / np.abs(np.diag(r)))


def random_channel(rng, k=2, d1=2, d2=2):
    """Generic (entangled-output) channel with ``k`` letters."""
    from cqbroadcast.channel import CQBroadcastChannel

    outs = np.stack([random_density(rng, d1 * d2, int(rng.integers(1, d1 * d2 + 1)))
                     for _ in range(k)])
    return CQBroadcastChannel(outs, d1, d2)


seeds = st.integers(min_value=0, max_value=2 ** 32 - 1)


@pytest.fixture(scope="session")
def noiseless():
    return load_example("noiseless")


@pytest.fixture(scope="session")
def constant():
    return load_example("constant")


@pytest.fixture(scope="session")
def bsc_like():
    return load_example("bsc_like")


@pytest.fixture(scope="session")
def b2_constant():
    return load_example("product_b2_constant")


@pytest.fixture(scope="session")
def orthogonal4():
    """Four letters with orthogonal outputs on both receivers."""
    basis = [ket(np.eye(4)[i]) for i in range(4)]
    return product_channel(basis, basis)


def orthogonal_superposition_codebook(n, m1, m2):
    # W letters pick one of two clouds; X letters 2w, 2w+1 stay inside it.
    w = np.array([list(s) for s in itertools.product(range(2), repeat=n)][:m2])
    x = np.empty((m1, m2, n), dtype=int)
    for b in range(m2):
        for a in range(m1):
            bits = [(a >> k) & 1 for k in range(n)]
            x[a, b] = 2 * w[b] + bits
    p_w, cond = cloud_distribution(2, 4)
    return SuperpositionCodebook(n, m1, m2, w, x, p_w, cond, 0)


def distinct_marton_codebook(ch, n, delta):
    p, f = correlated_distribution(2, 2, 4, mix=1.0)
    for seed in range(200):
        cb = generate_marton_codebook(p, f, n, 0.25, 0.25, delta, seed, ch=ch)
        distinct = (len({tuple(s) for s in cb.u1_sequences}) == cb.l1_count
                    and len({tuple(s) for s in cb.u2_sequences}) == cb.l2_count)
        if distinct and cb.encoder_failures == 0:
            return cb
    raise AssertionError("no codebook with distinct sequences found")


ACCEPTANCE = {}
CRITERIA = range(1, 11)


@pytest.fixture
def record():
    """Record one criterion's outcome for the end-of-run summary."""

    def _record(number, passed, detail):
        line = f"criterion {number:2d}: {'PASS' if passed else 'FAIL'}  {detail}"
        ACCEPTANCE[number] = line
        print(line)
        return passed

    return _record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for k in CRITERIA:
        terminalreporter.write_line(ACCEPTANCE.get(k, f"criterion {k:2d}: FAIL  did not complete"))
