"""Inner-loop kernels with an optional numba backend.

Each kernel exists twice: a pure-numpy version (``*_numpy``) and a numba
``@njit`` version (``*_numba``).  The public name is bound to one of them at
import time.  Set ``QREV_NUMBA=0`` in the environment to force the numpy
path; numba is used by default when it can be imported.
"""

import os

import numpy as np


def _noop_jit(*args, **kwargs):
    if len(args) == 1 and callable(args[0]) and not kwargs:
        return args[0]
    return lambda f: f


def _numba_requested() -> bool:
    flag = os.environ.get("QREV_NUMBA", "1").strip().lower()
    return flag not in ("0", "false", "off", "no")


try:
    from numba import njit

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - exercised only without numba
    njit = _noop_jit
    HAVE_NUMBA = False

USE_NUMBA = HAVE_NUMBA and _numba_requested()
BACKEND = "numba" if USE_NUMBA else "numpy"


# ---------------------------------------------------------------------------
# numpy reference kernels
# ---------------------------------------------------------------------------


def kraus_apply_numpy(kraus, rho):
    # sum_k K rho K^dagger
    return np.einsum("kij,jl,kml->im", kraus, rho, kraus.conj(), optimize=True)


def kraus_dual_numpy(kraus, a):
    # sum_k K^dagger A K
    return np.einsum("kji,jl,klm->im", kraus.conj(), a, kraus, optimize=True)


def choi_from_kraus_numpy(kraus):
    n = kraus.shape[0]
    vecs = kraus.reshape(n, -1)
    return vecs.T @ vecs.conj()


def overlap_labels_numpy(vectors, tol):
    gram = np.abs(vectors.conj() @ vectors.T)
    n = gram.shape[0]
    parent = np.arange(n)

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    rows, cols = np.nonzero(np.triu(gram > tol, k=1))
    for i, j in zip(rows, cols):
        ri, rj = find(i), find(j)
        if ri != rj:
            # smaller index wins so roots are canonical
            if ri < rj:
                parent[rj] = ri
            else:
                parent[ri] = rj
    return np.array([find(i) for i in range(n)], dtype=np.int64)


def entropy_from_eigs_numpy(eigs, cutoff):
    lam = eigs[eigs > cutoff]
    return float(-np.sum(lam * np.log(lam)))


# ---------------------------------------------------------------------------
# numba kernels
# ---------------------------------------------------------------------------


@njit(cache=True)
def kraus_apply_numba(kraus, rho):
    n, dout, din = kraus.shape
    out = np.zeros((dout, dout), dtype=np.complex128)
    tmp = np.empty((dout, din), dtype=np.complex128)
    for k in range(n):
        for i in range(dout):
            for m in range(din):
                acc = 0j
                for j in range(din):
                    acc += kraus[k, i, j] * rho[j, m]
                tmp[i, m] = acc
        for i in range(dout):
            for l in range(dout):
                acc = 0j
                for m in range(din):
                    acc += tmp[i, m] * np.conj(kraus[k, l, m])
                out[i, l] += acc
    return out


@njit(cache=True)
def kraus_dual_numba(kraus, a):
    n, dout, din = kraus.shape
    out = np.zeros((din, din), dtype=np.complex128)
    tmp = np.empty((din, dout), dtype=np.complex128)
    for k in range(n):
        for i in range(din):
            for l in range(dout):
                acc = 0j
                for j in range(dout):
                    acc += np.conj(kraus[k, j, i]) * a[j, l]
                tmp[i, l] = acc
        for i in range(din):
            for m in range(din):
                acc = 0j
                for l in range(dout):
                    acc += tmp[i, l] * kraus[k, l, m]
                out[i, m] += acc
    return out


@njit(cache=True)
def choi_from_kraus_numba(kraus):
    n, dout, din = kraus.shape
    dim = dout * din
    out = np.zeros((dim, dim), dtype=np.complex128)
    for k in range(n):
        v = kraus[k].reshape(dim)
        for p in range(dim):
            vp = v[p]
            if vp == 0:
                continue
            for q in range(dim):
                out[p, q] += vp * np.conj(v[q])
    return out


@njit(cache=True)
def _find(parent, i):
    while parent[i] != i:
        parent[i] = parent[parent[i]]
        i = parent[i]
    return i


@njit(cache=True)
def overlap_labels_numba(vectors, tol):
    n, d = vectors.shape
    parent = np.arange(n)
    for i in range(n):
        for j in range(i + 1, n):
            acc = 0j
            for a in range(d):
                acc += np.conj(vectors[i, a]) * vectors[j, a]
            if abs(acc) > tol:
                ri = _find(parent, i)
                rj = _find(parent, j)
                if ri != rj:
                    if ri < rj:
                        parent[rj] = ri
                    else:
                        parent[ri] = rj
    labels = np.empty(n, dtype=np.int64)
    for i in range(n):
        labels[i] = _find(parent, i)
    return labels


@njit(cache=True)
def entropy_from_eigs_numba(eigs, cutoff):
    acc = 0.0
    for lam in eigs:
        if lam > cutoff:
            acc -= lam * np.log(lam)
    return acc


if USE_NUMBA:
    kraus_apply = kraus_apply_numba
    kraus_dual = kraus_dual_numba
    choi_from_kraus = choi_from_kraus_numba
    overlap_labels = overlap_labels_numba
    entropy_from_eigs = entropy_from_eigs_numba
else:
    kraus_apply = kraus_apply_numpy
    kraus_dual = kraus_dual_numpy
    choi_from_kraus = choi_from_kraus_numpy
    overlap_labels = overlap_labels_numpy
    entropy_from_eigs = entropy_from_eigs_numpy
