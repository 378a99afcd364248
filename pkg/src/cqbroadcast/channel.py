"""Classical-quantum broadcast channels ``x -> rho_x^{B1 B2}``.

Channel JSON format::

    {"input_alphabet": k, "dim_b1": d1, "dim_b2": d2,
     "states": [ [[ [re, im], ... ], ...], ... ]}

Each state is a row-major ``(d1*d2) x (d1*d2)`` matrix; B1 is the slower
(most significant) tensor factor.
"""

import json
from dataclasses import dataclass
from importlib import resources

import numpy as np

from .exceptions import OversizeError, ParseError, ShapeError, ValidationError
from .info import CQEnsemble, DensityOperator
from .linalg import MAX_DIM, TOL_PSD, partial_trace, tensor_power_list

EXAMPLE_CHANNELS = ("noiseless", "constant", "bsc_like", "product_b2_constant")


@dataclass(frozen=True, eq=False)
class CQBroadcastChannel:
    """A finite classical-quantum broadcast channel.

    ``outputs`` has shape ``(k, d1*d2, d1*d2)``; letter ``x`` produces
    ``outputs[x]``.
    """

    outputs: np.ndarray
    dim_b1: int
    dim_b2: int

    def __post_init__(self):
        outs = np.asarray(self.outputs, dtype=complex)
        D = self.dim_b1 * self.dim_b2
        if outs.ndim != 3 or outs.shape[1:] != (D, D) or outs.shape[0] < 1:
            raise ValidationError(f"outputs of shape {outs.shape} do not match "
                                  f"dim_b1*dim_b2 = {D}")
        for x, rho in enumerate(outs):
            try:
                DensityOperator(rho, (self.dim_b1, self.dim_b2))
            except (ValidationError, ShapeError) as exc:
                raise ValidationError(f"letter {x}: {exc}") from None
        outs = (outs + np.swapaxes(outs.conj(), 1, 2)) / 2
        outs.setflags(write=False)
        object.__setattr__(self, "outputs", outs)

    @property
    def input_alphabet_size(self):
        return self.outputs.shape[0]

    def output(self, x, receiver="joint"):
        if receiver in ("joint", "B1B2"):
            return self.outputs[x]
        return marginal_channel(self, receiver)[x]

    def __repr__(self):
        return (f"CQBroadcastChannel(|X|={self.input_alphabet_size}, "
                f"dim_b1={self.dim_b1}, dim_b2={self.dim_b2})")


def _receiver_index(receiver):
    if receiver in (1, "1", "B1"):
        return 0
    if receiver in (2, "2", "B2"):
        return 1
    raise ShapeError(f"receiver must be 1 or 2, got {receiver!r}")


def marginal_channel(ch, receiver):
    """Per-letter reduced outputs for receiver 1 or 2, shape ``(k, d, d)``."""
    keep = _receiver_index(receiver)
    dims = (ch.dim_b1, ch.dim_b2)
    return np.stack([partial_trace(rho, dims, keep) for rho in ch.outputs])


def marginal_ensemble(ch, p_x, receiver):
    """``{p_x(x), rho_x^{B_i}}`` for receiver ``i``."""
    return CQEnsemble(p_x, marginal_channel(ch, receiver))


def check_codeword(ch, codeword):
    seq = np.asarray(codeword, dtype=int).ravel()
    if seq.size == 0:
        raise ShapeError("codeword must have at least one symbol")
    if np.any(seq < 0) or np.any(seq >= ch.input_alphabet_size):
        raise ShapeError(f"codeword symbols must lie in [0, {ch.input_alphabet_size})")
    return seq


def n_fold_output(ch, codeword, receiver="joint", max_dim=None):
    """Output ``rho_{x_1} ⊗ ... ⊗ rho_{x_n}`` of ``n`` channel uses.

    For ``receiver`` 1 or 2 each letter is marginalised before tensoring.
    For ``"joint"`` the result is ordered ``B1^n ⊗ B2^n`` (all receiver-1
    factors first), so that ``Lambda ⊗ Gamma`` acts on it directly.
    """
    seq = check_codeword(ch, codeword)
    n = seq.size
    limit = MAX_DIM if max_dim is None else max_dim
    if receiver in ("joint", "B1B2"):
        d1, d2 = ch.dim_b1, ch.dim_b2
        D = (d1 * d2) ** n
        if D > limit:
            raise OversizeError(D, limit, "joint output")
        full = tensor_power_list([ch.outputs[x] for x in seq], max_dim=limit)
        # Interleaved (B1_1 B2_1 B1_2 B2_2 ...) -> (B1_1 .. B1_n B2_1 .. B2_n).
        t = full.reshape([d1, d2] * n + [d1, d2] * n)
        row = [2 * k for k in range(n)] + [2 * k + 1 for k in range(n)]
        t = t.transpose(row + [2 * n + r for r in row])
        return t.reshape(D, D)
    local = marginal_channel(ch, receiver)
    d = local.shape[1]
    if d ** n > limit:
        raise OversizeError(d ** n, limit, f"receiver-{receiver} output")
    return tensor_power_list([local[x] for x in seq], max_dim=limit)


def _to_pairs(m):
    m = np.asarray(m, dtype=complex)
    return [[[float(z.real), float(z.imag)] for z in row] for row in m]


def channel_to_dict(ch):
    return {
        "input_alphabet": int(ch.input_alphabet_size),
        "dim_b1": int(ch.dim_b1),
        "dim_b2": int(ch.dim_b2),
        "states": [_to_pairs(rho) for rho in ch.outputs],
    }


def dump_channel(ch):
    """Serialise a channel to channel JSON text."""
    return json.dumps(channel_to_dict(ch), indent=1)


def _positive_int(doc, key):
    if key not in doc:
        raise ParseError(f"missing field {key!r}")
    v = doc[key]
    if isinstance(v, bool) or not isinstance(v, int) or v < 1:
        raise ParseError(f"field {key!r} must be a positive integer, got {v!r}")
    return v


def _parse_matrix(raw, D, x):
    if not isinstance(raw, list) or len(raw) != D:
        raise ParseError(f"states[{x}] must be a list of {D} rows")
    out = np.empty((D, D), dtype=complex)
    for i, row in enumerate(raw):
        if not isinstance(row, list) or len(row) != D:
            raise ParseError(f"states[{x}][{i}] must have {D} entries")
        for j, z in enumerate(row):
            if (not isinstance(z, list) or len(z) != 2
                    or not all(isinstance(c, (int, float)) and not isinstance(c, bool) for c in z)):
                raise ParseError(f"states[{x}][{i}][{j}] must be a [re, im] pair")
            out[i, j] = complex(z[0], z[1])
    if not np.all(np.isfinite(out)):
        raise ParseError(f"states[{x}] has non-finite entries")
    return out


def parse_channel(text):
    """Parse channel JSON text into a validated channel.

    Raises
    ------
    ParseError
        Malformed JSON or missing/mistyped fields.
    ValidationError
        A state that is not Hermitian, PSD, or unit trace; the message names
        the offending letter.
    """
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON: {exc}") from None
    if not isinstance(doc, dict):
        raise ParseError("channel document must be a JSON object")
    k = _positive_int(doc, "input_alphabet")
    d1 = _positive_int(doc, "dim_b1")
    d2 = _positive_int(doc, "dim_b2")
    states = doc.get("states")
    if not isinstance(states, list):
        raise ParseError("missing field 'states'")
    if len(states) != k:
        raise ParseError(f"'states' has {len(states)} entries but input_alphabet = {k}")
    D = d1 * d2
    mats = [_parse_matrix(raw, D, x) for x, raw in enumerate(states)]
    for x, m in enumerate(mats):
        herm = np.max(np.abs(m - m.conj().T))
        if herm > 1e-10:
            raise ValidationError(f"letter {x}: matrix is not Hermitian (deviation {herm:.3e})")
        tr = np.trace(m).real
        if abs(tr - 1) > TOL_PSD:
            raise ValidationError(f"letter {x}: trace {tr:.12g} differs from 1")
        lo = np.linalg.eigvalsh((m + m.conj().T) / 2)[0]
        if lo < -TOL_PSD:
            raise ValidationError(f"letter {x}: not positive semi-definite "
                                  f"(min eigenvalue {lo:.3e})")
    return CQBroadcastChannel(np.stack(mats), d1, d2)


def load_channel(path):
    with open(path, encoding="utf-8") as fh:
        return parse_channel(fh.read())


def example_path(name):
    """Filesystem path of a bundled example channel."""
    if name not in EXAMPLE_CHANNELS:
        raise KeyError(f"unknown example {name!r}; choose from {EXAMPLE_CHANNELS}")
    return resources.files("cqbroadcast") / "examples" / f"{name}.json"


def load_example(name):
    return parse_channel(example_path(name).read_text(encoding="utf-8"))


def product_channel(b1_states, b2_states):
    """Channel with per-letter product outputs ``sigma_x ⊗ tau_x``."""
    b1 = np.asarray(b1_states, dtype=complex)
    b2 = np.asarray(b2_states, dtype=complex)
    if b1.shape[0] != b2.shape[0]:
        raise ShapeError("both receivers need one state per input letter")
    outs = np.stack([np.kron(a, b) for a, b in zip(b1, b2)])
    return CQBroadcastChannel(outs, b1.shape[1], b2.shape[1])
