"""Entropies and Holevo-type quantities of classical-quantum states.

All logarithms are base 2, so every quantity is in bits.
"""

from dataclasses import dataclass

import numpy as np

from .exceptions import ShapeError, ValidationError
from .linalg import TOL_PSD, TOL_ZERO_EIG, HermitianOperator, as_matrix

PROB_TOL = 1e-9


class DensityOperator(HermitianOperator):
    """Unit-trace PSD operator on a space with subsystem dimensions ``dims``."""

    __slots__ = ("dims",)

    def __init__(self, matrix, dims=None, *, tol=TOL_PSD):
        super().__init__(matrix)
        if dims is None:
            dims = (self.dim,)
        dims = tuple(int(d) for d in dims)
        if int(np.prod(dims)) != self.dim:
            raise ShapeError(f"dims {dims} do not multiply to {self.dim}")
        self.dims = dims
        tr = np.trace(self.matrix).real
        if abs(tr - 1) > tol:
            raise ValidationError(f"trace {tr:.12g} differs from 1")
        if self.eigenvalues[-1] < -tol:
            raise ValidationError(f"minimum eigenvalue {self.eigenvalues[-1]:.3e} is negative")

    def __repr__(self):
        return f"DensityOperator(dims={self.dims})"


def _entropy_from_eigs(vals):
    vals = np.asarray(vals, dtype=float)
    vals = vals[vals > TOL_ZERO_EIG]
    return float(max(0.0, -np.sum(vals * np.log2(vals))))


def von_neumann_entropy(rho):
    """Von Neumann entropy ``-Tr rho log2 rho`` in bits."""
    if isinstance(rho, HermitianOperator):
        return _entropy_from_eigs(rho.eigenvalues)
    a = as_matrix(rho)
    return _entropy_from_eigs(np.linalg.eigvalsh((a + a.conj().T) / 2))


def entropies(stack):
    """Entropies of a stack of density matrices with shape ``(..., d, d)``."""
    stack = np.asarray(stack, dtype=complex)
    vals = np.linalg.eigvalsh((stack + np.swapaxes(stack.conj(), -1, -2)) / 2)
    safe = np.where(vals > TOL_ZERO_EIG, vals, 1.0)
    h = -np.sum(np.where(vals > TOL_ZERO_EIG, vals * np.log2(safe), 0.0), axis=-1)
    return np.maximum(h, 0.0)


def shannon_entropy(p):
    p = np.asarray(p, dtype=float).ravel()
    p = p[p > 0]
    return float(max(0.0, -np.sum(p * np.log2(p))))


def _check_distribution(p, name="distribution"):
    p = np.asarray(p, dtype=float)
    if np.any(p < -PROB_TOL) or not np.all(np.isfinite(p)):
        raise ValidationError(f"{name} has negative or non-finite entries")
    if abs(p.sum() - 1) > PROB_TOL:
        raise ValidationError(f"{name} sums to {p.sum():.12g}, not 1")
    return np.clip(p, 0.0, None)


@dataclass(frozen=True)
class CQEnsemble:
    """Ensemble ``{p(x), rho_x}``; ``states`` has shape ``(k, d, d)``."""

    probabilities: np.ndarray
    states: np.ndarray

    def __post_init__(self):
        p = _check_distribution(self.probabilities, "ensemble probabilities")
        s = np.asarray(self.states, dtype=complex)
        if s.ndim != 3 or s.shape[0] != p.shape[0] or s.shape[1] != s.shape[2]:
            raise ShapeError(f"states of shape {s.shape} do not match {p.shape[0]} probabilities")
        object.__setattr__(self, "probabilities", p)
        object.__setattr__(self, "states", s)

    def average_state(self):
        return np.tensordot(self.probabilities, self.states, axes=1)


def holevo_information(ens):
    """Holevo information ``H(sum p rho) - sum p H(rho)`` of an ensemble."""
    p = ens.probabilities
    avg = von_neumann_entropy(ens.average_state())
    cond = float(np.dot(p, entropies(ens.states)))
    return max(0.0, avg - cond)


def classical_mutual_information(p_joint):
    """``I(U1;U2)`` of a two-register joint distribution (2-d array)."""
    p = _check_distribution(p_joint, "joint distribution")
    if p.ndim != 2:
        raise ShapeError("classical_mutual_information expects a 2-d table")
    return max(0.0, shannon_entropy(p.sum(1)) + shannon_entropy(p.sum(0)) - shannon_entropy(p))


@dataclass(frozen=True)
class JointCodeState:
    """Classical-quantum state ``sum_c p(c) |c><c| ⊗ rho_c``.

    Attributes
    ----------
    registers : tuple of str
        Names of the classical registers, e.g. ``("W", "X")``.
    joint_probability : ndarray
        Array with one axis per register.
    conditional_states : ndarray
        Shape ``joint_probability.shape + (D, D)``; the quantum state
        attached to each classical cell.
    quantum_dims : tuple of int
        ``(d_b1, d_b2)``; ``D = d_b1 * d_b2`` with B1 the slower factor.
    """

    registers: tuple
    joint_probability: np.ndarray
    conditional_states: np.ndarray
    quantum_dims: tuple

    def __post_init__(self):
        p = _check_distribution(self.joint_probability, "joint probability")
        s = np.asarray(self.conditional_states, dtype=complex)
        if p.ndim != len(self.registers):
            raise ShapeError("one probability axis per register is required")
        D = int(np.prod(self.quantum_dims))
        if s.shape != p.shape + (D, D):
            raise ShapeError(f"conditional states shape {s.shape} != {p.shape + (D, D)}")
        object.__setattr__(self, "joint_probability", p)
        object.__setattr__(self, "conditional_states", s)
        object.__setattr__(self, "registers", tuple(self.registers))
        object.__setattr__(self, "quantum_dims", tuple(int(d) for d in self.quantum_dims))

    @property
    def classical_alphabets(self):
        return self.joint_probability.shape

    def reduced_states(self, subsystem):
        """Conditional states reduced to ``"B1"``, ``"B2"`` or ``"B1B2"``."""
        s = self.conditional_states
        if subsystem in ("B1B2", "joint"):
            return s
        keep = {"B1": 0, "B2": 1}.get(subsystem)
        if keep is None:
            raise ShapeError(f"unknown quantum subsystem {subsystem!r}")
        d1, d2 = self.quantum_dims
        t = s.reshape(s.shape[:-2] + (d1, d2, d1, d2))
        if keep == 0:
            return np.einsum("...ajbj->...ab", t)
        return np.einsum("...iaib->...ab", t)

    def average_state(self, subsystem="B1B2"):
        st = self.reduced_states(subsystem)
        p = self.joint_probability
        return np.tensordot(p, st, axes=p.ndim)

    def marginal_ensemble(self, register, subsystem):
        """Ensemble ``{p(r), rho_r}`` for one register and one quantum subsystem."""
        p, states = self._grouped((register,), subsystem)
        return CQEnsemble(p.ravel(), states.reshape((-1,) + states.shape[-2:]))

    def _axes(self, names):
        if isinstance(names, str):
            names = (names,)
        try:
            return tuple(self.registers.index(n) for n in names)
        except ValueError:
            raise ShapeError(f"registers {names} not all in {self.registers}") from None

    def _grouped(self, names, subsystem):
        """Marginal probability and conditional states over ``names`` only."""
        axes = self._axes(names)
        other = tuple(i for i in range(len(self.registers)) if i not in axes)
        p = self.joint_probability
        st = self.reduced_states(subsystem)
        weighted = st * p[(...,) + (None, None)]
        perm = axes + other
        p_r = np.transpose(p, perm).reshape(tuple(p.shape[i] for i in axes) + (-1,)).sum(-1)
        w = np.transpose(weighted, perm + (p.ndim, p.ndim + 1))
        w = w.reshape(p_r.shape + (-1,) + st.shape[-2:]).sum(-3)
        safe = np.where(p_r > 0, p_r, 1.0)
        return p_r, w / safe[(...,) + (None, None)]


def conditional_entropy(theta, subsystem, given=()):
    """``H(B|C)`` for quantum subsystem ``B`` and classical registers ``C``."""
    if isinstance(given, str):
        given = (given,)
    if not given:
        return von_neumann_entropy(theta.average_state(subsystem))
    p, states = theta._grouped(tuple(given), subsystem)
    return float(np.sum(p * entropies(states)))


def mutual_information(theta, message, subsystem, given=()):
    """``I(M;B|C)`` between classical registers ``message`` and subsystem ``B``.

    Zero-probability classical cells contribute nothing.
    """
    if isinstance(message, str):
        message = (message,)
    if isinstance(given, str):
        given = (given,)
    both = tuple(given) + tuple(m for m in message if m not in given)
    value = conditional_entropy(theta, subsystem, given) - conditional_entropy(theta, subsystem, both)
    return max(0.0, value)


def conditional_holevo(theta, conditioning_register, message_register, quantum_subsystem):
    """``I(X;B|W)`` with ``W`` the conditioning and ``X`` the message register."""
    return mutual_information(theta, message_register, quantum_subsystem,
                              given=conditioning_register)


def _channel_outputs(channel):
    return np.asarray(channel.outputs, dtype=complex)


def build_superposition_state(p_w, p_x_given_w, channel):
    """Code state over registers ``("W", "X")`` for superposition coding.

    ``p_x_given_w[w, x]`` is the conditional distribution of ``X`` given ``W``.
    """
    p_w = _check_distribution(p_w, "p_W")
    cond = np.asarray(p_x_given_w, dtype=float)
    if cond.ndim != 2 or cond.shape[0] != p_w.shape[0]:
        raise ShapeError(f"p_X|W of shape {cond.shape} does not match |W| = {p_w.shape[0]}")
    if cond.shape[1] != channel.input_alphabet_size:
        raise ShapeError(f"|X| = {cond.shape[1]} but the channel has "
                         f"{channel.input_alphabet_size} input letters")
    for w in range(cond.shape[0]):
        cond[w] = _check_distribution(cond[w], f"p_X|W(.|{w})")
    joint = p_w[:, None] * cond
    outs = _channel_outputs(channel)
    states = np.broadcast_to(outs, joint.shape + outs.shape[1:])
    return JointCodeState(("W", "X"), joint, states, (channel.dim_b1, channel.dim_b2))


def build_marton_state(p_u1u2, f, channel):
    """Code state over registers ``("U1", "U2")``; cell ``(u1, u2)`` holds ``rho_{f(u1,u2)}``."""
    p = _check_distribution(p_u1u2, "p_U1U2")
    f = np.asarray(f)
    if p.ndim != 2 or f.shape != p.shape:
        raise ShapeError(f"f table of shape {f.shape} does not match p_U1U2 {p.shape}")
    if not np.issubdtype(f.dtype, np.integer):
        if not np.all(np.equal(np.mod(f, 1), 0)):
            raise ShapeError("f must take integer letter values")
        f = f.astype(int)
    if np.any(f < 0) or np.any(f >= channel.input_alphabet_size):
        raise ShapeError(f"f maps outside the input alphabet of size {channel.input_alphabet_size}")
    outs = _channel_outputs(channel)
    return JointCodeState(("U1", "U2"), p, outs[f], (channel.dim_b1, channel.dim_b2))
