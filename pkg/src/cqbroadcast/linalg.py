"""Dense complex-matrix kernel.

Everything here works on plain ``numpy`` arrays.  :class:`HermitianOperator`
is a thin wrapper that validates hermiticity once and caches the
eigendecomposition, which every entropy and typical projector needs.
"""

from functools import reduce

import numpy as np

from .exceptions import NotPSDError, NumericalError, OversizeError, ShapeError

# Tolerances used across the package.
TOL_HERMITIAN = 1e-10
TOL_RECONSTRUCT = 1e-8
TOL_PSD = 1e-9
TOL_ZERO_EIG = 1e-12

MAX_DIM = 4096


def _check_dim(dim, max_dim=None, what="operator"):
    limit = MAX_DIM if max_dim is None else max_dim
    if dim > limit:
        raise OversizeError(dim, limit, what)


def as_matrix(m):
    """Return ``m`` as a finite 2-d complex array."""
    if isinstance(m, HermitianOperator):
        return m.matrix
    a = np.asarray(m, dtype=complex)
    if a.ndim != 2:
        raise ShapeError(f"expected a matrix, got array of shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise NumericalError("matrix has non-finite entries")
    return a


def _phase_fix(vecs):
    # Make the largest-magnitude component of each column real positive.
    idx = np.argmax(np.abs(vecs), axis=0)
    phases = vecs[idx, np.arange(vecs.shape[1])]
    phases = phases / np.abs(phases)
    return vecs / phases


def _sorted_eig(matrix):
    try:
        vals, vecs = np.linalg.eigh(matrix)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"eigendecomposition did not converge: {exc}") from exc
    vecs = _phase_fix(vecs)
    # Descending eigenvalues; within (numerically) degenerate groups order
    # eigenvectors by descending lexicographic (real, imag) parts, so a
    # diagonal matrix keeps the standard basis order.
    keys = np.round(-vals / TOL_RECONSTRUCT).astype(np.int64)
    order = np.argsort(keys, kind="stable")
    keys = keys[order]
    start = 0
    while start < len(order):
        stop = start + 1
        while stop < len(order) and keys[stop] == keys[start]:
            stop += 1
        if stop - start > 1:
            group = order[start:stop]
            block = np.round(vecs[:, group], 9)
            # Compare (re_0, im_0, re_1, im_1, ...); np.lexsort wants the
            # primary key last.
            comps = np.empty((2 * block.shape[0], block.shape[1]))
            comps[0::2] = block.real
            comps[1::2] = block.imag
            order[start:stop] = group[np.lexsort(-comps[::-1])]
        start = stop
    return vals[order], vecs[:, order]


class HermitianOperator:
    """Hermitian matrix with a lazily cached eigendecomposition.

    Parameters
    ----------
    matrix : array_like
        Square complex matrix; must satisfy ``max|M - M^dagger| <= 1e-10``.
        It is symmetrised exactly on construction.
    """

    __slots__ = ("matrix", "_eig")

    def __init__(self, matrix, *, check=True):
        a = as_matrix(matrix)
        if a.shape[0] != a.shape[1]:
            raise ShapeError(f"Hermitian operator must be square, got {a.shape}")
        if check:
            err = np.max(np.abs(a - a.conj().T)) if a.size else 0.0
            if err > TOL_HERMITIAN:
                raise ShapeError(f"matrix is not Hermitian (max deviation {err:.3e})")
        self.matrix = (a + a.conj().T) / 2
        self._eig = None

    @property
    def dim(self):
        return self.matrix.shape[0]

    def eig(self):
        """Eigenvalues (descending) and unitary eigenvector matrix."""
        if self._eig is None:
            self._eig = _sorted_eig(self.matrix)
        return self._eig

    @property
    def eigenvalues(self):
        return self.eig()[0]

    def __array__(self, dtype=None, copy=None):
        return self.matrix if dtype is None else self.matrix.astype(dtype)

    def __repr__(self):
        return f"HermitianOperator(dim={self.dim})"


def as_hermitian(h):
    if isinstance(h, HermitianOperator):
        return h
    return HermitianOperator(h)


def tensor_product(a, b, max_dim=None):
    """Kronecker product ``a ⊗ b`` with the dimension guardrail applied."""
    a = as_matrix(a)
    b = as_matrix(b)
    _check_dim(max(a.shape[0] * b.shape[0], a.shape[1] * b.shape[1]), max_dim)
    return np.kron(a, b)


def tensor_power_list(mats, max_dim=None):
    """Kronecker product of a sequence of matrices, left to right."""
    mats = [as_matrix(m) for m in mats]
    if not mats:
        return np.ones((1, 1), dtype=complex)
    _check_dim(int(np.prod([m.shape[0] for m in mats])), max_dim)
    return reduce(np.kron, mats)


def partial_trace(m, dims, keep):
    """Trace out every subsystem not listed in ``keep``.

    Parameters
    ----------
    m : array_like
        Square matrix on the space ``dims[0] ⊗ dims[1] ⊗ ...`` with the first
        factor most significant.
    dims : sequence of int
        Subsystem dimensions.
    keep : int or iterable of int
        Indices of subsystems to keep; the result keeps them in ascending order.
    """
    a = as_matrix(m)
    dims = [int(d) for d in dims]
    if any(d < 1 for d in dims):
        raise ShapeError(f"subsystem dimensions must be positive, got {dims}")
    total = int(np.prod(dims))
    if a.shape != (total, total):
        raise ShapeError(f"matrix shape {a.shape} does not match dims {dims}")
    if np.isscalar(keep) or isinstance(keep, (int, np.integer)):
        keep = [int(keep)]
    keep = sorted(set(int(k) for k in keep))
    if any(k < 0 or k >= len(dims) for k in keep):
        raise ShapeError(f"keep indices {keep} out of range for {len(dims)} subsystems")

    n = len(dims)
    t = a.reshape(dims + dims)
    traced = [i for i in range(n) if i not in keep]
    # Contract traced subsystems pairwise, highest index first so axis
    # positions of the remaining ones stay valid.
    for i in sorted(traced, reverse=True):
        cur = t.ndim // 2
        t = np.trace(t, axis1=i, axis2=i + cur)
    d = int(np.prod([dims[k] for k in keep])) if keep else 1
    return t.reshape(d, d)


def hermitian_eig(h):
    """Return ``(eigenvalues, eigenvectors)`` with eigenvalues descending.

    Raises
    ------
    NumericalError
        If the decomposition fails or its reconstruction residual exceeds 1e-8.
    """
    h = as_hermitian(h)
    vals, vecs = h.eig()
    if h.dim:
        recon = (vecs * vals) @ vecs.conj().T
        if np.max(np.abs(recon - h.matrix)) > TOL_RECONSTRUCT * max(1.0, np.max(np.abs(vals))):
            raise NumericalError("eigendecomposition reconstruction residual too large")
    return vals, vecs


def trace_norm(m):
    """Sum of singular values of ``m``."""
    a = as_matrix(m)
    if a.shape[0] != a.shape[1]:
        raise ShapeError("trace norm expects a square matrix")
    if np.allclose(a, a.conj().T, atol=TOL_HERMITIAN, rtol=0):
        return float(np.sum(np.abs(np.linalg.eigvalsh((a + a.conj().T) / 2))))
    return float(np.sum(np.linalg.svd(a, compute_uv=False)))


def psd_check(h, tol=TOL_PSD):
    """True iff the smallest eigenvalue of ``h`` is at least ``-tol``."""
    h = as_hermitian(h)
    if h.dim == 0:
        return True
    return bool(h.eigenvalues[-1] >= -tol)


def support_projector(h, tol=TOL_PSD):
    """Orthogonal projector onto eigenspaces with eigenvalue above ``tol``."""
    vals, vecs = as_hermitian(h).eig()
    v = vecs[:, vals > tol]
    return v @ v.conj().T


def inv_sqrt_on_support(h, tol=TOL_PSD):
    """Pseudo-inverse square root ``h^{-1/2}`` restricted to the support of ``h``.

    Eigenvalues above ``tol`` map to ``lambda**-0.5``; the rest map to zero.

    Raises
    ------
    NotPSDError
        If some eigenvalue is below ``-tol``.
    """
    h = as_hermitian(h)
    vals, vecs = h.eig()
    if h.dim and vals[-1] < -tol:
        raise NotPSDError(f"minimum eigenvalue {vals[-1]:.3e} below -{tol:g}")
    mask = vals > tol
    v = vecs[:, mask]
    out = (v * (1.0 / np.sqrt(vals[mask]))) @ v.conj().T
    return HermitianOperator(out, check=False)


def sqrtm_psd(h, tol=TOL_PSD):
    """Square root of a PSD operator (negative round-off clipped to zero)."""
    h = as_hermitian(h)
    vals, vecs = h.eig()
    if h.dim and vals[-1] < -tol:
        raise NotPSDError(f"minimum eigenvalue {vals[-1]:.3e} below -{tol:g}")
    return (vecs * np.sqrt(np.clip(vals, 0.0, None))) @ vecs.conj().T


def min_eigenvalue(m):
    """Smallest eigenvalue of the Hermitian part of ``m``."""
    a = as_matrix(m)
    return float(np.linalg.eigvalsh((a + a.conj().T) / 2)[0])
