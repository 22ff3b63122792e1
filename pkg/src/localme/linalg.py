"""Dense linear algebra shared by the solvers.

Operators are plain ``numpy`` complex arrays.  The operator/vector mapping is
row-major: entry ``(i, j)`` of a ``d x d`` matrix becomes component ``i*d + j``.
"""
import warnings
from functools import reduce

import numpy as np
import scipy.linalg
from scipy.sparse.csgraph import connected_components

I2 = np.eye(2, dtype=complex)
SX = np.array([[0, 1], [1, 0]], dtype=complex)
SY = np.array([[0, -1j], [1j, 0]], dtype=complex)
SZ = np.array([[1, 0], [0, -1]], dtype=complex)
PAULI = {"I": I2, "X": SX, "Y": SY, "Z": SZ}


class ConditioningWarning(UserWarning):
    pass


def as_operator(m):
    m = np.asarray(m, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {m.shape}")
    return m


def dag(m):
    return np.conj(np.swapaxes(m, -1, -2))


def is_hermitian(m, rtol=1e-12):
    m = np.asarray(m)
    scale = np.max(np.abs(m)) if m.size else 0.0
    return np.max(np.abs(m - dag(m)), initial=0.0) <= rtol * max(scale, 1e-300)


def commutator(a, b):
    return a @ b - b @ a


def kron(*ops):
    return reduce(np.kron, ops)


def pauli_string(label, coeff=1.0):
    """``pauli_string("XZ")`` is ``X (x) Z``; qubit 0 is the leftmost factor."""
    try:
        return coeff * kron(*[PAULI[c] for c in label.upper()])
    except KeyError as exc:
        raise ValueError(f"bad Pauli label {label!r}") from exc


def site_operator(op, site, n_sites, local_dim=2):
    ops = [np.eye(local_dim, dtype=complex)] * n_sites
    ops[site] = np.asarray(op, dtype=complex)
    return kron(*ops)


def vectorize(m):
    return as_operator(m).reshape(-1).copy()


def devectorize(v, dim):
    v = np.asarray(v, dtype=complex)
    if v.ndim != 1 or v.size != dim * dim:
        raise ValueError(f"vector of length {v.size} does not match dim {dim}")
    return v.reshape(dim, dim).copy()


def partial_trace(m, dims, keep):
    """Trace out every tensor factor not listed in ``keep``.

    ``dims`` lists the factor dimensions; the result is ordered like ``keep``
    sorted ascending.
    """
    m = as_operator(m)
    dims = [int(d) for d in dims]
    n = len(dims)
    keep = sorted(set(int(k) for k in keep))
    if any(k < 0 or k >= n for k in keep):
        raise ValueError(f"keep indices {keep} out of range for {n} factors")
    if int(np.prod(dims)) != m.shape[0]:
        raise ValueError(f"factor dims {dims} do not multiply to {m.shape[0]}")
    t = m.reshape(dims + dims)
    row = list(range(n))
    col = [i + n if i in keep else i for i in range(n)]
    out = [i for i in keep] + [i + n for i in keep]
    t = np.einsum(t, row + col, out)
    dk = int(np.prod([dims[k] for k in keep])) if keep else 1
    return t.reshape(dk, dk)


def expm(m):
    return scipy.linalg.expm(as_operator(m))


def _eig_2x2(h):
    a, c = h[0, 0].real, h[1, 1].real
    b = h[0, 1]
    mid, half = 0.5 * (a + c), 0.5 * (a - c)
    r = np.hypot(half, abs(b))
    theta = 0.5 * np.arctan2(2 * abs(b), a - c)
    phase = np.exp(-1j * np.angle(b)) if b != 0 else 1.0
    cos, sin = np.cos(theta), np.sin(theta)
    upper = np.array([cos, phase * sin])
    lower = np.array([-np.conj(phase) * sin, cos])
    return np.array([mid - r, mid + r]), np.column_stack([lower, upper])


def eig_hermitian(m):
    """Ascending eigenvalues and orthonormal eigenvectors of a Hermitian matrix.

    Decoupled blocks of the sparsity pattern are diagonalised separately and
    2x2 blocks use a closed-form rotation.  This keeps mixing angles far below
    machine epsilon (relative to the norm) that a dense solve rounds to noise.
    """
    m = as_operator(m)
    if not is_hermitian(m):
        raise ValueError("eig_hermitian needs a Hermitian matrix")
    d = m.shape[0]
    n_blocks, labels = connected_components(np.abs(m) > 0, directed=False)
    evals = np.empty(d)
    evecs = np.zeros((d, d), dtype=complex)
    col = 0
    for b in range(n_blocks):
        idx = np.flatnonzero(labels == b)
        sub = m[np.ix_(idx, idx)]
        if idx.size == 1:
            w, v = np.array([sub[0, 0].real]), np.ones((1, 1), dtype=complex)
        elif idx.size == 2:
            w, v = _eig_2x2(sub)
        else:
            w, v = np.linalg.eigh(sub)
        k = idx.size
        evals[col:col + k] = w
        evecs[idx, col:col + k] = v
        col += k
    order = np.argsort(evals, kind="stable")
    return evals[order], evecs[:, order]


def eig_general(m, rtol=1e-10):
    """Eigenpairs of a general square matrix, with a residual check."""
    m = as_operator(m)
    w, v = np.linalg.eig(m)
    scale = max(np.linalg.norm(m, 2), 1e-300)
    res = np.linalg.norm(m @ v - v * w, axis=0)
    if np.any(res > rtol * scale):
        warnings.warn(f"eigenpair residual {res.max():.2e} exceeds {rtol:g}*|M|",
                      ConditioningWarning, stacklevel=2)
    return w, v
