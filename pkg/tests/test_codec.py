import itertools
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from cqbroadcast.channel import EXAMPLE_CHANNELS, load_example, n_fold_output
from cqbroadcast.codec import (CSV_HEADER, SuperpositionCodebook, average_error_probability,
                               build_marton_povm, build_receiver1_povm, build_receiver2_povm,
                               cloud_distribution, correlated_distribution, default_delta,
                               generate_marton_codebook, generate_superposition_codebook,
                               joint_success, marton_split, message_count, receiver2_operator,
                               reference_configuration, run_reference,
                               simulate_decode, square_root_povm, typical_pair_table)
from cqbroadcast.exceptions import OversizeError
from cqbroadcast.regions import superposition_rate_triple
from cqbroadcast.typicality import jointly_typical_check

from conftest import (distinct_marton_codebook, orthogonal_superposition_codebook,
                      random_channel, random_density, seeds)

CORRELATED = np.array([[0.45, 0.05], [0.05, 0.45]])
COPY_U1 = np.array([[0, 0], [1, 1]])


def test_message_count():
    assert message_count(4, 0.5) == 4
    assert message_count(3, 0.0) == 1
    assert message_count(2, 0.1) == 1
    assert message_count(10, 0.3) == 8


def test_deterministic_codebook():
    cb = generate_superposition_codebook([1.0, 0.0], [[0.0, 1.0], [1.0, 0.0]], 5, 3, 2, 9)
    assert np.all(cb.w_sequences == 0)
    assert np.all(cb.x_sequences == 1)
    one = generate_superposition_codebook([0.5, 0.5], np.full((2, 2), 0.5), 4, 1, 1, 0)
    assert one.x_sequences.shape == (1, 1, 4)


@given(seeds)
def test_codebook_seed_determinism(seed):
    p_w, cond = cloud_distribution(2, 4, 0.3)
    a = generate_superposition_codebook(p_w, cond, 5, 3, 2, seed)
    b = generate_superposition_codebook(p_w, cond, 5, 3, 2, seed)
    assert np.array_equal(a.w_sequences, b.w_sequences)
    assert np.array_equal(a.x_sequences, b.x_sequences)


def test_symbol_frequencies_within_three_sigma():
    n = 10_000
    cb = generate_superposition_codebook([0.5, 0.5], np.full((2, 2), 0.5), n, 1, 1, 4)
    for seq in (cb.w_sequences[0], cb.x_sequences[0, 0]):
        freq = np.bincount(seq, minlength=2) / n
        assert np.all(np.abs(freq - 0.5) <= 3 * math.sqrt(0.25 / n))


def test_square_root_povm_degenerate():
    povm = square_root_povm(np.zeros((2, 3, 3)), ["a", "b"])
    assert np.allclose(povm.remainder, np.eye(3))
    assert povm.is_valid()
    empty = square_root_povm(np.zeros((0, 2, 2)), [])
    assert empty.labels == [None]


@given(seeds, st.integers(1, 5))
def test_square_root_povm_valid_for_random_detectors(seed, m):
    rng = np.random.default_rng(seed)
    dets = [random_density(rng, 3, int(rng.integers(1, 4))) for _ in range(m)]
    povm = square_root_povm(dets, list(range(m)))
    assert povm.is_valid()


def test_superposition_zero_error_on_orthogonal_outputs(orthogonal4):
    cb = orthogonal_superposition_codebook(4, 3, 4)
    povm1 = build_receiver1_povm(cb, orthogonal4, 0.3)
    povm2 = build_receiver2_povm(cb, orthogonal4, 0.3)
    rep = average_error_probability(cb, povm1, povm2, orthogonal4)
    assert rep.average_error <= 1e-9
    assert rep.mode == "marginal"
    probs = povm1.probabilities(n_fold_output(orthogonal4, cb.x_sequences[0, 0], 1))
    assert probs[-1] == pytest.approx(0.0, abs=1e-12)


def test_zero_error_joint_mode_on_noiseless(noiseless):
    n = 4
    seqs = np.array([list(s) for s in itertools.product(range(2), repeat=n)][:5])
    cb = SuperpositionCodebook(n, 5, 1, np.zeros((1, n), dtype=int), seqs[:, None, :],
                               np.array([1.0, 0.0]), np.full((2, 2), 0.5), 0)
    povm1 = build_receiver1_povm(cb, noiseless, 0.3)
    povm2 = build_receiver2_povm(cb, noiseless, 0.3)
    rep = average_error_probability(cb, povm1, povm2, noiseless, mode="joint")
    assert rep.average_error <= 1e-9
    mc = simulate_decode(cb, povm1, povm2, noiseless, 500, 0)
    assert mc.average_error == 0.0


def test_marton_zero_error_on_orthogonal_outputs(orthogonal4):
    cb = distinct_marton_codebook(orthogonal4, 4, 0.3)
    povm1 = build_marton_povm(cb, orthogonal4, 1)
    povm2 = build_marton_povm(cb, orthogonal4, 2)
    rep = average_error_probability(cb, povm1, povm2, orthogonal4)
    assert rep.average_error <= 1e-9


def test_constant_channel_uniform_confusion(constant):
    cb = generate_superposition_codebook([0.5, 0.5], np.eye(2), 2, 2, 2, 0)
    povm1 = build_receiver1_povm(cb, constant)
    povm2 = build_receiver2_povm(cb, constant)
    rep = average_error_probability(cb, povm1, povm2, constant)
    assert rep.average_error == pytest.approx(0.75, abs=1e-6)
    assert np.allclose(povm1.detection, povm1.detection[0])
    cb = generate_superposition_codebook([0.5, 0.5], np.eye(2), 2, 2, 1, 0)
    povm1 = build_receiver1_povm(cb, constant)
    rho = n_fold_output(constant, cb.x_sequences[0, 0], 1)
    assert np.allclose(povm1.probabilities(rho)[:2], 0.5)


def test_single_message_pair_is_reliable(bsc_like):
    p_w, cond = cloud_distribution(2, 4)
    for seed in range(5):
        cb = generate_superposition_codebook(p_w, cond, 6, 1, 1, seed)
        povm1 = build_receiver1_povm(cb, bsc_like, 0.4)
        povm2 = build_receiver2_povm(cb, bsc_like, 0.4)
        rep = average_error_probability(cb, povm1, povm2, bsc_like, delta=0.4)
        assert rep.average_error <= 0.2


@pytest.mark.parametrize("name", EXAMPLE_CHANNELS)
@pytest.mark.parametrize("scheme", ["superposition", "marton"])
def test_povms_are_valid(name, scheme):
    ch = load_example(name)
    for n in (2, 4):
        for seed in range(2):
            _, _, povms = run_reference(ch, scheme, n, seed)
            assert all(p.is_valid() for p in povms)


def test_joint_success_matches_explicit_kron(bsc_like):
    rng = np.random.default_rng(2)
    lam = random_density(rng, 4)
    gam = random_density(rng, 4)
    x = [1, 3]
    want = np.trace(np.kron(lam, gam) @ n_fold_output(bsc_like, x)).real
    assert joint_success(lam, gam, x, bsc_like) == pytest.approx(want, abs=1e-12)


@given(seeds, st.lists(st.integers(0, 2), min_size=1, max_size=3))
def test_receiver2_operator_matches_partial_trace(seed, x):
    from cqbroadcast.linalg import partial_trace

    rng = np.random.default_rng(seed)
    ch = random_channel(rng, 3)
    n = len(x)
    lam = random_density(rng, 2 ** n)
    joint = np.kron(lam, np.eye(2 ** n)) @ n_fold_output(ch, x)
    want = partial_trace(joint, [2] * (2 * n), range(n, 2 * n))
    assert np.allclose(receiver2_operator(lam, x, ch), want, atol=1e-10)


def test_error_report_fields(bsc_like):
    rep, cb, _ = run_reference(bsc_like, "superposition", 2, 0)
    assert 0 <= rep.average_error <= 1
    assert rep.receiver1_error is not None
    assert rep.mode == "joint"
    assert len(rep.per_message_errors) == cb.m1_count
    assert CSV_HEADER.count(",") == rep.csv_row().count(",")
    assert "wall_time" not in rep.to_json()


def test_seed_determinism_of_reports(bsc_like):
    a = run_reference(bsc_like, "marton", 4, 3)[0]
    b = run_reference(bsc_like, "marton", 4, 3)[0]
    assert a.to_json() == b.to_json()


def test_joint_mode_guardrail(bsc_like):
    cb = generate_superposition_codebook(*cloud_distribution(2, 4), 7, 1, 1, 0)
    povm1 = build_receiver1_povm(cb, bsc_like)
    povm2 = build_receiver2_povm(cb, bsc_like)
    with pytest.raises(OversizeError):
        average_error_probability(cb, povm1, povm2, bsc_like, mode="joint")
    with pytest.raises(OversizeError):
        build_receiver1_povm(generate_superposition_codebook([1.0], [[1, 0, 0, 0]], 13, 1, 1, 0),
                             bsc_like)


def test_monte_carlo_agrees_with_exact(bsc_like):
    rep, cb, (p1, p2) = run_reference(bsc_like, "superposition", 4, 1)
    mc = simulate_decode(cb, p1, p2, bsc_like, 4000, 5)
    sigma = math.sqrt(rep.average_error * (1 - rep.average_error) / 4000)
    assert abs(mc.average_error - rep.average_error) <= 3 * sigma + 1e-12
    assert mc.receiver1_error is None
    with pytest.raises(ValueError):
        simulate_decode(cb, p1, p2, bsc_like, 0, 5)


def test_monte_carlo_zero_variance_for_deterministic_outcomes(noiseless):
    rep, cb, (p1, p2) = run_reference(noiseless, "superposition", 2, 0)
    mc = simulate_decode(cb, p1, p2, noiseless, 200, 0)
    assert rep.average_error == pytest.approx(0.0, abs=1e-12)
    assert mc.average_error == 0.0 and mc.std_error == 0.0


# Marton encoder


def test_marton_failure_free_when_correlated_and_generous(noiseless):
    p = np.diag([0.5, 0.5])
    cb = generate_marton_codebook(p, COPY_U1, 4, 0.25, 0.25, 0.5, 0, l1_count=16, l2_count=16)
    assert cb.encoder_failures == 0


def test_marton_delta_zero_non_dyadic_fails_everywhere():
    p = np.array([[0.3, 0.2], [0.1, 0.4]])
    cb = generate_marton_codebook(p, COPY_U1, 5, 0.2, 0.2, 0.0, 0, l1_count=8, l2_count=8)
    assert cb.encoder_failures == cb.m1_count * cb.m2_count
    assert cb.codeword(0, 0) is None


@given(seeds)
def test_marton_chosen_pairs_are_typical_and_bins_partition(seed):
    p, f = correlated_distribution(2, 2, 2, mix=0.4)
    cb = generate_marton_codebook(p, f, 5, 0.2, 0.2, 0.3, seed, l1_count=9, l2_count=7)
    for bins, count in ((cb.bins(1), cb.l1_count), (cb.bins(2), cb.l2_count)):
        assert sorted(np.concatenate(bins).tolist()) == list(range(count))
    for m1, m2 in itertools.product(range(cb.m1_count), range(cb.m2_count)):
        l1, l2 = cb.chosen[m1, m2]
        if l1 >= 0:
            assert cb.bin1[l1] == m1 and cb.bin2[l2] == m2
            assert jointly_typical_check(cb.u1_sequences[l1], cb.u2_sequences[l2], p, 0.3)


def test_typical_pair_table_matches_check():
    rng = np.random.default_rng(0)
    u1 = rng.integers(0, 2, (6, 5))
    u2 = rng.integers(0, 2, (4, 5))
    table = typical_pair_table(u1, u2, CORRELATED, 0.3)
    for a, b in itertools.product(range(6), range(4)):
        assert table[a, b] == jointly_typical_check(u1[a], u2[b], CORRELATED, 0.3)


def failure_rates(ch, offset, ns, seeds_):
    out = []
    for n in ns:
        delta = default_delta(n)
        r1, r2 = marton_split(CORRELATED, COPY_U1, ch, offset)
        rates = [generate_marton_codebook(CORRELATED, COPY_U1, n, r1, r2, delta, s,
                                          ch=ch).failure_rate for s in seeds_]
        out.append(float(np.mean(rates)))
    return out


def test_marton_failure_decreases_with_n(noiseless):
    rates = failure_rates(noiseless, -0.1, (4, 6, 8), range(50))
    assert rates[0] > rates[1] > rates[2]


def test_marton_failure_above_baseline_when_sum_bound_violated(noiseless):
    compliant, = failure_rates(noiseless, -0.1, (8,), range(100))
    violating, = failure_rates(noiseless, 0.3, (8,), range(100))
    assert violating > compliant + 0.1


def test_message_size_consistency():
    # Message sizes with a 3-delta margin on every bound: error at n = 8 below n = 2.
    for name in EXAMPLE_CHANNELS:
        ch = load_example(name)
        cfg = reference_configuration(ch, "superposition")
        a, b, c = superposition_rate_triple(cfg["p_w"], cfg["p_x_given_w"], ch)
        errors = []
        for n in (2, 8):
            d = default_delta(n)
            m2 = message_count(n, max(0.0, b - 3 * d))
            m1 = message_count(n, max(0.0, min(a, c - math.log2(m2) / n) - 3 * d))
            assert m1 * m2 <= max(1, 2 ** (n * (c - 3 * d)) + 1e-9)
            cb = generate_superposition_codebook(cfg["p_w"], cfg["p_x_given_w"], n, m1, m2, 0)
            povm1 = build_receiver1_povm(cb, ch, d)
            povm2 = build_receiver2_povm(cb, ch, d)
            errors.append(average_error_probability(cb, povm1, povm2, ch).average_error)
        if errors[0] > 1e-9:
            assert errors[1] < errors[0], name
        else:
            assert errors[1] <= 1e-9, name


def test_marton_independent_uniform_two_arms(bsc_like):
    p = np.full((2, 2), 0.25)
    _, f = correlated_distribution(2, 2, 4)

    def mean_failure(offset):
        r1, r2 = marton_split(p, f, bsc_like, offset)
        return np.mean([generate_marton_codebook(p, f, 8, r1, r2, 0.2, s, ch=bsc_like).failure_rate
                        for s in range(100)])

    assert mean_failure(0.3) > mean_failure(-0.1) + 0.1
