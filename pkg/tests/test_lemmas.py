import json

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from cqbroadcast.channel import product_channel
from cqbroadcast.codec import correlated_distribution
from cqbroadcast.exceptions import EmptyTypicalSetError
from cqbroadcast.lemmas import (SUITES, LemmaCheckResult, check_combined_operator_inequality,
                                check_gentle_operator, check_hayashi_nagaoka,
                                check_marton_support_lemma, check_projector_trick,
                                check_trace_inequality, combined_inequality_slack,
                                gentle_operator_gap, hayashi_nagaoka_slack, projector_trick_slack,
                                random_effect, run_suite, trace_inequality_gap)

from conftest import random_density, seeds


def test_hayashi_nagaoka_trivial_cases():
    eye = np.eye(3)
    assert hayashi_nagaoka_slack(eye, np.zeros((3, 3))) == pytest.approx(0.0, abs=1e-12)
    # S = 0, T = I: LHS = I, RHS = 2I + 4I.
    assert hayashi_nagaoka_slack(np.zeros((3, 3)), eye) == pytest.approx(5.0)


def test_gentle_trivial_cases():
    rng = np.random.default_rng(0)
    states = np.stack([random_density(rng, 3) for _ in range(2)])
    gap, eps = gentle_operator_gap([0.5, 0.5], states, np.eye(3))
    assert eps == pytest.approx(0.0, abs=1e-12)
    assert gap == pytest.approx(0.0, abs=1e-9)


def test_trace_inequality_trivial_cases():
    rng = np.random.default_rng(1)
    rho = random_density(rng, 3)
    assert trace_inequality_gap(rho, rho, random_effect(rng, 3)) == pytest.approx(0.0, abs=1e-12)


def test_combined_trivial_cases():
    assert combined_inequality_slack(np.eye(2), np.eye(3)) == pytest.approx(0.0, abs=1e-12)
    assert combined_inequality_slack(np.zeros((2, 2)), np.zeros((3, 3))) == pytest.approx(1.0)


@given(seeds)
def test_inequalities_hold_on_random_draws(seed):
    for res in (check_hayashi_nagaoka(4, 5, seed), check_gentle_operator(3, 2, 5, seed),
                check_trace_inequality(3, 5, seed),
                check_combined_operator_inequality(2, 2, 5, seed)):
        assert res.passed, res.lemma


@given(seeds, st.integers(1, 4))
def test_random_effect_is_between_zero_and_identity(seed, d):
    lam = random_effect(np.random.default_rng(seed), d)
    vals = np.linalg.eigvalsh(lam)
    assert vals.min() >= -1e-12 and vals.max() <= 1 + 1e-12


def test_projector_trick_on_maximally_mixed_letters():
    mixed = np.eye(2) / 2
    slack, proj = projector_trick_slack(np.stack([mixed, mixed]), (0, 1, 0), 0.1, 2 ** 3)
    assert proj.rank == 8
    assert slack == pytest.approx(0.0, abs=1e-12)
    slack, _ = projector_trick_slack(np.stack([mixed, mixed]), (0, 1, 0), 0.1, 2 ** 2)
    assert slack < 0


def test_projector_trick_on_bundled_channel(bsc_like):
    res = check_projector_trick(bsc_like, [0.5, 0.5], [[0.5, 0.5, 0, 0], [0, 0, 0.5, 0.5]],
                                6, 0.3, 50, 0)
    assert res.passed
    assert res.details["empty"] == 0


def test_marton_support_and_empty_set(bsc_like):
    p, f = correlated_distribution(2, 2, 4)
    res = check_marton_support_lemma(bsc_like, p, f, 6, 0.3, 20, 0)
    assert res.passed and res.details["min_trace"] > 0
    tight = check_marton_support_lemma(bsc_like, p, f, 6, 0.3, 20, 0, epsilon=1e-6)
    assert not tight.passed
    with pytest.raises(EmptyTypicalSetError):
        check_marton_support_lemma(bsc_like, [[0.3, 0.2], [0.1, 0.4]], f, 3, 0.0, 5, 0)


def test_marton_support_exact_on_orthogonal_outputs():
    basis = [np.diag(np.eye(2)[i]) for i in range(2)]
    ch = product_channel(basis, basis)
    res = check_marton_support_lemma(ch, np.diag([0.5, 0.5]), [[0, 0], [1, 1]], 4, 0.25, 10, 0,
                                     epsilon=1e-9)
    assert res.passed
    assert res.details["min_trace"] == pytest.approx(1.0)


def test_suite_is_deterministic_and_serialisable():
    a = run_suite(instances=20, seed=3)
    b = run_suite(instances=20, seed=3, threads=2)
    assert [r.lemma for r in a] == list(SUITES)
    assert [r.to_json() for r in a] == [r.to_json() for r in b]
    assert all(r.passed for r in a)
    for r in a:
        assert "worst_instance" not in json.loads(r.to_json())


def test_result_json_includes_failing_instance():
    res = LemmaCheckResult("x", 1, -1.0, False, 0, 1e-8,
                           {"index": 0, "A": np.array([[1 + 2j]])})
    d = json.loads(res.to_json())
    assert d["worst_instance"]["A"] == [[[1.0, 2.0]]]


def test_unknown_suite():
    with pytest.raises(ValueError):
        run_suite("nope", instances=1)


def test_marton_support_min_trace_trend(bsc_like):
    p, f = correlated_distribution(2, 2, 4)
    lows = [check_marton_support_lemma(bsc_like, p, f, n, 0.4, 50, 0).details["min_trace"]
            for n in (4, 6, 8)]
    assert lows[0] <= lows[1] <= lows[2]


def test_marton_support_min_trace_dips_at_coarse_delta(bsc_like):
    # With delta = 0.3 the allowed count windows are coarse and n = 6 dips below n = 4.
    p, f = correlated_distribution(2, 2, 4)
    lows = [check_marton_support_lemma(bsc_like, p, f, n, 0.3, 50, 0).details["min_trace"]
            for n in (4, 6)]
    assert lows[1] < lows[0]
