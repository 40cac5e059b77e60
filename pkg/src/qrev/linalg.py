"""Dense complex-matrix kernels shared by every other module.

All routines accept array-likes, return fresh ``complex128``/``float64``
arrays and never mutate their inputs.  Rank and support decisions use a
tolerance relative to the largest eigenvalue or singular value.
"""

from __future__ import annotations

from typing import NamedTuple

import numpy as np

from .errors import DimensionMismatch, NotHermitian, NotPSD, ZeroMatrix

DEFAULT_TOL = 1e-9
PHASE_TOL = 1e-6


class HermitianEig(NamedTuple):
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray


def as_matrix(m) -> np.ndarray:
    arr = np.asarray(m, dtype=np.complex128)
    if arr.ndim != 2:
        raise DimensionMismatch(f"expected a 2-d matrix, got shape {arr.shape}")
    return arr


def as_square(m) -> np.ndarray:
    arr = as_matrix(m)
    if arr.shape[0] != arr.shape[1]:
        raise DimensionMismatch(f"expected a square matrix, got shape {arr.shape}")
    return arr


def dagger(m: np.ndarray) -> np.ndarray:
    return np.conj(np.swapaxes(m, -1, -2))


def hermitian_part(m) -> np.ndarray:
    arr = as_square(m)
    return 0.5 * (arr + arr.conj().T)


def is_hermitian(m, tol: float = DEFAULT_TOL) -> bool:
    arr = as_square(m)
    return np.linalg.norm(arr - arr.conj().T) <= tol * max(np.linalg.norm(arr), 1e-300)


def _fix_phases(vecs: np.ndarray) -> np.ndarray:
    # first entry with modulus > PHASE_TOL made real positive, column by column
    out = vecs.copy()
    for j in range(out.shape[1]):
        col = out[:, j]
        idx = np.flatnonzero(np.abs(col) > PHASE_TOL)
        if idx.size:
            z = col[idx[0]]
            out[:, j] = col * (abs(z) / z)
    return out


def herm_eig(m, tol: float = DEFAULT_TOL) -> HermitianEig:
    """Eigendecomposition of a Hermitian matrix with a deterministic gauge.

    Eigenvalues are sorted in descending order.  Every eigenvector has its
    first entry of modulus above ``1e-6`` made real and positive, and columns
    sharing an eigenvalue are ordered lexicographically by their entries.

    Raises
    ------
    NotHermitian
        If ``||M - M^dagger||_F > tol * ||M||_F``.
    """
    arr = as_square(m)
    if not is_hermitian(arr, tol):
        raise NotHermitian("matrix fails the Hermitian symmetry check")
    w, v = np.linalg.eigh(hermitian_part(arr))
    order = np.argsort(-w, kind="stable")
    w = w[order]
    v = _fix_phases(v[:, order])

    # lexicographic tie-break inside clusters of equal eigenvalues
    scale = max(1.0, float(np.max(np.abs(w)))) if w.size else 1.0
    start = 0
    n = w.size
    while start < n:
        stop = start + 1
        while stop < n and abs(w[stop] - w[start]) <= 1e-12 * scale:
            stop += 1
        if stop - start > 1:
            block = v[:, start:stop]
            keys = []
            for row in range(block.shape[0] - 1, -1, -1):
                keys.append(np.round(block[row].imag, 12))
                keys.append(np.round(block[row].real, 12))
            perm = np.lexsort(keys)[::-1]
            v[:, start:stop] = block[:, perm]
        start = stop
    return HermitianEig(w, v)


def _psd_eig(m, tol: float) -> HermitianEig:
    w, v = herm_eig(m, tol)
    scale = max(1.0, float(np.max(np.abs(w)))) if w.size else 1.0
    if w.size and w[-1] < -tol * scale:
        raise NotPSD(f"minimum eigenvalue {w[-1]:.3e} is below -tol")
    return HermitianEig(np.clip(w, 0.0, None), v)


def psd_sqrt(m, tol: float = DEFAULT_TOL) -> np.ndarray:
    w, v = _psd_eig(m, tol)
    return (v * np.sqrt(w)) @ v.conj().T


def support_projector(m, tol: float = DEFAULT_TOL) -> np.ndarray:
    w, v = _psd_eig(m, tol)
    keep = w > tol * w[0] if w.size and w[0] > 0 else np.zeros(w.size, dtype=bool)
    basis = v[:, keep]
    return basis @ basis.conj().T


def support_basis(m, tol: float = DEFAULT_TOL) -> np.ndarray:
    """Orthonormal columns spanning supp M, ordered by descending eigenvalue."""
    w, v = _psd_eig(m, tol)
    if not w.size or w[0] <= 0:
        return v[:, :0]
    return v[:, w > tol * w[0]]


def support_inv_sqrt(m, tol: float = DEFAULT_TOL) -> tuple[np.ndarray, np.ndarray]:
    """Return ``(M^{-1/2} on supp M, projector onto supp M)``.

    Eigenvalues at or below ``tol * lambda_max`` are treated as zero.
    """
    w, v = _psd_eig(m, tol)
    if not w.size or w[0] <= tol:
        raise ZeroMatrix("all eigenvalues are below tolerance")
    keep = w > tol * w[0]
    vk = v[:, keep]
    inv = (vk / np.sqrt(w[keep])) @ vk.conj().T
    return inv, vk @ vk.conj().T


def tensor(a, b) -> np.ndarray:
    """Kronecker product; the index of A (x) B is ``i_A * dim_B + i_B``."""
    return np.kron(as_matrix(a), as_matrix(b))


def partial_trace(m, dims: tuple[int, int], keep: int) -> np.ndarray:
    """Trace out one factor of a bipartite operator.

    ``keep=0`` keeps the first factor (traces out the second), ``keep=1``
    keeps the second.
    """
    arr = as_square(m)
    da, db = int(dims[0]), int(dims[1])
    if arr.shape[0] != da * db:
        raise DimensionMismatch(f"matrix of size {arr.shape[0]} is not {da}x{db}")
    t = arr.reshape(da, db, da, db)
    if keep in (0, "A", "a"):
        return np.einsum("ijkj->ik", t)
    if keep in (1, "B", "b"):
        return np.einsum("ijil->jl", t)
    raise ValueError(f"keep must be 0 or 1, got {keep!r}")


def rank_tol(m, tol: float = DEFAULT_TOL) -> int:
    arr = np.asarray(m, dtype=np.complex128)
    if arr.size == 0:
        return 0
    s = np.linalg.svd(arr, compute_uv=False)
    if s[0] == 0:
        return 0
    return int(np.count_nonzero(s > tol * s[0]))


def trace_norm(m) -> float:
    return float(np.sum(np.linalg.svd(np.asarray(m, dtype=np.complex128), compute_uv=False)))


def trace_norm_dist(a, b) -> float:
    a = np.asarray(a, dtype=np.complex128)
    b = np.asarray(b, dtype=np.complex128)
    if a.shape != b.shape:
        raise DimensionMismatch(f"shapes {a.shape} and {b.shape} differ")
    return trace_norm(a - b)


def orthonormal_range(m, tol: float = DEFAULT_TOL) -> np.ndarray:
    """Orthonormal basis (columns) of the column space of ``m``."""
    arr = np.asarray(m, dtype=np.complex128)
    if arr.size == 0:
        return np.zeros((arr.shape[0], 0), dtype=np.complex128)
    u, s, _ = np.linalg.svd(arr, full_matrices=False)
    if s[0] == 0:
        return u[:, :0]
    return u[:, s > tol * s[0]]


def complement_basis(basis: np.ndarray, dim: int) -> np.ndarray:
    """Orthonormal basis of the orthogonal complement of span(basis) in C^dim."""
    if basis.shape[1] == 0:
        return np.eye(dim, dtype=np.complex128)
    proj = np.eye(dim) - basis @ basis.conj().T
    w, v = np.linalg.eigh(hermitian_part(proj))
    return v[:, w > 0.5]


def null_space(a, rtol: float = 1e-8, atol: float = 0.0) -> np.ndarray:
    """Orthonormal basis of the right null space of ``a`` (columns).

    Singular values at or below ``max(rtol * s_max, atol)`` count as zero.
    """
    arr = np.asarray(a, dtype=np.complex128)
    _, s, vh = np.linalg.svd(arr, full_matrices=True)
    top = s[0] if s.size else 0.0
    rank = int(np.count_nonzero(s > max(rtol * top, atol)))
    return vh[rank:].conj().T
