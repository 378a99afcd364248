import json

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from cqbroadcast.channel import (EXAMPLE_CHANNELS, CQBroadcastChannel, channel_to_dict,
                                 dump_channel, load_example, marginal_channel, n_fold_output,
                                 parse_channel, product_channel)
from cqbroadcast.exceptions import OversizeError, ParseError, ShapeError, ValidationError
from cqbroadcast.info import CQEnsemble, holevo_information, von_neumann_entropy

from conftest import ket, random_channel, random_density, seeds


def channel_json(states, k=None, d1=2, d2=2):
    return json.dumps({
        "input_alphabet": len(states) if k is None else k, "dim_b1": d1, "dim_b2": d2,
        "states": [[[[float(np.real(z)), float(np.imag(z))] for z in row] for row in s]
                   for s in states],
    })


def test_parse_noiseless():
    ch = parse_channel(channel_json([ket([1, 0, 0, 0]), ket([0, 0, 0, 1])]))
    assert ch.input_alphabet_size == 2
    assert np.allclose(marginal_channel(ch, 1), [ket([1, 0]), ket([0, 1])])
    assert np.allclose(marginal_channel(ch, 2), [ket([1, 0]), ket([0, 1])])


def test_bad_trace_names_letter():
    with pytest.raises(ValidationError, match="letter 1"):
        parse_channel(channel_json([np.eye(4) / 4, 0.9 * np.eye(4) / 4]))


def test_not_psd_names_letter():
    bad = np.diag([1.1, -0.1, 0, 0])
    with pytest.raises(ValidationError, match="letter 0"):
        parse_channel(channel_json([bad]))


def test_not_hermitian_names_letter():
    bad = np.eye(4, dtype=complex) / 4
    bad[0, 1] = 0.1
    with pytest.raises(ValidationError, match="letter 0"):
        parse_channel(channel_json([bad]))


@pytest.mark.parametrize("text, field", [
    ("[1, 2]", "object"),
    ("{not json", "JSON"),
    (json.dumps({"dim_b1": 2, "dim_b2": 2, "states": []}), "input_alphabet"),
    (json.dumps({"input_alphabet": 1, "dim_b1": 0, "dim_b2": 2, "states": []}), "dim_b1"),
    (json.dumps({"input_alphabet": 1, "dim_b1": 2, "dim_b2": 2}), "states"),
    (json.dumps({"input_alphabet": 2, "dim_b1": 1, "dim_b2": 1, "states": [[[[1, 0]]]]}),
     "input_alphabet"),
    (json.dumps({"input_alphabet": 1, "dim_b1": 1, "dim_b2": 1, "states": [[[1]]]}), "states"),
])
def test_parse_errors_name_field(text, field):
    with pytest.raises(ParseError, match=field):
        parse_channel(text)


def test_roundtrip(bsc_like):
    again = parse_channel(dump_channel(bsc_like))
    assert np.array_equal(again.outputs, bsc_like.outputs)
    assert channel_to_dict(again) == channel_to_dict(bsc_like)


@pytest.mark.parametrize("name", EXAMPLE_CHANNELS)
def test_examples_load_and_marginals_normalised(name):
    ch = load_example(name)
    for receiver in (1, 2):
        traces = np.trace(marginal_channel(ch, receiver), axis1=1, axis2=2).real
        assert np.allclose(traces, 1, atol=1e-9)


def test_bsc_like_holevo_recomputed(bsc_like):
    # Rebuild receiver-1 states from their closed form and compare.
    th = np.arccos(np.sqrt(2 / 3))
    c, s = np.cos(th), np.sin(th)
    psi = [ket([c, s]), ket([c, -s]), ket([s, c]), ket([s, -c])]
    p = np.full(4, 0.25)
    got = holevo_information(CQEnsemble(p, marginal_channel(bsc_like, 1)))
    assert got == pytest.approx(holevo_information(CQEnsemble(p, np.stack(psi))), abs=1e-12)
    assert got == pytest.approx(1.0, abs=1e-9)


def test_product_marginal_and_bell():
    rng = np.random.default_rng(0)
    sig = [random_density(rng, 2) for _ in range(2)]
    tau = random_density(rng, 3)
    ch = product_channel(sig, [tau, tau])
    assert np.allclose(marginal_channel(ch, 1), sig)
    bell = ket([1, 0, 0, 1])
    ch = CQBroadcastChannel(np.stack([bell]), 2, 2)
    assert np.allclose(marginal_channel(ch, 1)[0], np.eye(2) / 2)
    assert np.allclose(marginal_channel(ch, 2)[0], np.eye(2) / 2)


def test_n_fold_examples(bsc_like):
    assert np.allclose(n_fold_output(bsc_like, [2]), bsc_like.outputs[2])
    rho1 = marginal_channel(bsc_like, 1)[3]
    assert np.allclose(n_fold_output(bsc_like, [3, 3, 3], 1), np.kron(np.kron(rho1, rho1), rho1))
    seq = [0, 2, 1]
    total = sum(von_neumann_entropy(bsc_like.outputs[x]) for x in seq)
    assert von_neumann_entropy(n_fold_output(bsc_like, seq)) == pytest.approx(total, abs=1e-8)


@given(seeds, st.lists(st.integers(0, 2), min_size=1, max_size=4))
def test_marginal_then_tensor_equals_tensor_then_marginal(seed, seq):
    from cqbroadcast.linalg import partial_trace

    ch = random_channel(np.random.default_rng(seed), 3)
    joint = n_fold_output(ch, seq)
    n = len(seq)
    dims = [2] * (2 * n)
    b1 = partial_trace(joint, dims, range(n))
    b2 = partial_trace(joint, dims, range(n, 2 * n))
    assert np.allclose(b1, n_fold_output(ch, seq, 1), atol=1e-8)
    assert np.allclose(b2, n_fold_output(ch, seq, 2), atol=1e-8)
    assert abs(np.trace(joint) - 1) <= 1e-8


def test_joint_ordering_puts_b1_first():
    # With product letters the joint output factorises as B1^n ⊗ B2^n.
    rng = np.random.default_rng(5)
    sig = [random_density(rng, 2) for _ in range(2)]
    tau = [random_density(rng, 2) for _ in range(2)]
    ch = product_channel(sig, tau)
    got = n_fold_output(ch, [0, 1])
    assert np.allclose(got, np.kron(np.kron(sig[0], sig[1]), np.kron(tau[0], tau[1])))


def test_guardrails(noiseless):
    with pytest.raises(OversizeError):
        n_fold_output(noiseless, [0] * 7)
    assert n_fold_output(noiseless, [0] * 6).shape == (4096, 4096)
    with pytest.raises(OversizeError):
        n_fold_output(noiseless, [0] * 13, 1)
    with pytest.raises(ShapeError):
        n_fold_output(noiseless, [0, 2])
    with pytest.raises(ShapeError):
        n_fold_output(noiseless, [])


def test_outputs_read_only(noiseless):
    with pytest.raises(ValueError):
        noiseless.outputs[0, 0, 0] = 0
