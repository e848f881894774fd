"""Dense complex linear algebra kernel.

Matrices are plain complex numpy arrays treated as immutable values; every
operation returns a fresh array. Tolerances are relative to max(1, norm)
unless noted, with DEFAULT_TOL as the global default.
"""

from dataclasses import dataclass

import numpy as np

from .errors import (
    ClusterFailure,
    DimensionMismatch,
    NoConvergence,
    NotHermitian,
    NotUnitary,
)

DEFAULT_TOL = 1e-10

# eigenvalues of the Hermitian part closer than this are treated as one
# degenerate cluster when diagonalizing a unitary
CLUSTER_GAP = 1e-8


def _tol(tol):
    return DEFAULT_TOL if tol is None else tol


def dag(a):
    """Conjugate transpose."""
    return np.conj(a.T)


def frob(a):
    """Frobenius norm."""
    return float(np.linalg.norm(a))


def as_complex(a):
    """Copy input as a 2-d complex array, rejecting non-finite entries."""
    m = np.array(a, dtype=complex)
    if m.ndim != 2:
        raise DimensionMismatch(f"expected a matrix, got ndim={m.ndim}")
    if not np.all(np.isfinite(m)):
        raise ValueError("matrix contains NaN/Inf entries")
    return m


def identity(d):
    return np.eye(d, dtype=complex)


def is_hermitian(h, tol=None):
    return frob(h - dag(h)) <= _tol(tol) * max(1.0, frob(h))


def is_unitary(u, tol=None):
    if u.shape[0] != u.shape[1]:
        return False
    return frob(dag(u) @ u - np.eye(u.shape[0])) <= _tol(tol) * max(1.0, np.sqrt(u.shape[0]))


def kron(a, b):
    """Tensor product: out[i*rb+p, j*cb+q] = a[i,j] * b[p,q]."""
    return np.kron(np.asarray(a, dtype=complex), np.asarray(b, dtype=complex))


@dataclass(frozen=True)
class EigenDecomposition:
    """Spectral data of a Hermitian matrix.

    eigenvalues are real and ascending; eigenvectors holds the matching
    orthonormal eigenvectors as columns.
    """

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    def reconstruct(self):
        v = self.eigenvectors
        return (v * self.eigenvalues) @ dag(v)


def eig_hermitian(h, tol=None):
    """Eigendecomposition of a Hermitian matrix, eigenvalues ascending.

    Raises NotHermitian when the input fails the Hermiticity tolerance and
    NoConvergence if the underlying solver gives up (a numerics bug at the
    dimensions used here, never expected).
    """
    h = as_complex(h)
    if not is_hermitian(h, tol):
        raise NotHermitian(
            f"matrix deviates from Hermitian by {frob(h - dag(h)):.3e}"
        )
    try:
        vals, vecs = np.linalg.eigh(h)
    except np.linalg.LinAlgError as exc:  # pragma: no cover
        raise NoConvergence(str(exc)) from exc
    return EigenDecomposition(eigenvalues=vals, eigenvectors=vecs)


def diagonalize_unitary(u, tol=None):
    """Unitarily diagonalize a unitary matrix: returns (V, D) with u = V D V†.

    Diagonalizes the Hermitian part (u+u†)/2, then rediagonalizes the
    anti-Hermitian part (u-u†)/2i inside each eigenvalue cluster; the two
    parts commute because u is normal, so this resolves degeneracies exactly.
    """
    u = as_complex(u)
    n = u.shape[0]
    if not is_unitary(u, tol):
        raise NotUnitary(
            f"matrix deviates from unitary by {frob(dag(u) @ u - np.eye(n)):.3e}"
        )
    herm = (u + dag(u)) / 2
    skew = (u - dag(u)) / 2j
    base = eig_hermitian(herm, tol)
    vals, vecs = base.eigenvalues, base.eigenvectors.copy()

    start = 0
    while start < n:
        stop = start + 1
        while stop < n and vals[stop] - vals[stop - 1] <= CLUSTER_GAP:
            stop += 1
        if stop - start > 1:
            block = vecs[:, start:stop]
            sub = dag(block) @ skew @ block
            sub = (sub + dag(sub)) / 2
            _, rot = np.linalg.eigh(sub)
            vecs[:, start:stop] = block @ rot
        start = stop

    d = np.diag(dag(vecs) @ u @ vecs)
    residual = frob(vecs @ np.diag(d) @ dag(vecs) - u)
    if residual > 1e-9 * max(1.0, frob(u)):
        raise ClusterFailure(
            f"unitary diagonalization residual {residual:.3e} exceeds tolerance"
        )
    return vecs, np.diag(d)


def partial_transpose(m, dim_a, dim_b):
    """Transpose the second tensor factor: <i,j|out|k,l> = <i,l|m|k,j>."""
    m = as_complex(m)
    n = dim_a * dim_b
    if m.shape != (n, n):
        raise DimensionMismatch(
            f"matrix shape {m.shape} does not match dims ({dim_a},{dim_b})"
        )
    return (
        m.reshape(dim_a, dim_b, dim_a, dim_b)
        .transpose(0, 3, 2, 1)
        .reshape(n, n)
    )
