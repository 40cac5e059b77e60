"""States, discrete ensembles and pure-state families.

Density matrices are plain ``complex128`` arrays; :func:`as_state` validates
one.  Ensembles and pure-state families are small dataclasses holding arrays.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from . import linalg as la
from .errors import (
    DegenerateDistribution,
    DimensionMismatch,
    InvalidRank,
    InvalidState,
)

STATE_TOL = 1e-10
PRUNE_WEIGHT = 1e-12


def as_state(rho, tol: float = STATE_TOL) -> np.ndarray:
    """Validate and return ``rho`` as a density matrix.

    Checks Hermiticity, positivity and unit trace, each to ``tol``.
    """
    arr = la.as_square(rho)
    if np.linalg.norm(arr - arr.conj().T) > tol:
        raise InvalidState("state is not Hermitian")
    tr = np.trace(arr).real
    if abs(tr - 1.0) > tol:
        raise InvalidState(f"trace = {tr:.12g}, expected 1 +/- {tol:g}")
    w = np.linalg.eigvalsh(la.hermitian_part(arr))
    if w[0] < -tol:
        raise InvalidState(f"minimum eigenvalue {w[0]:.3e} < -{tol:g}")
    return la.hermitian_part(arr)


def is_state(rho, tol: float = STATE_TOL) -> bool:
    try:
        as_state(rho, tol)
    except (InvalidState, DimensionMismatch):
        return False
    return True


def pure(vec) -> np.ndarray:
    v = np.asarray(vec, dtype=np.complex128).reshape(-1)
    v = v / np.linalg.norm(v)
    return np.outer(v, v.conj())


def maximally_mixed(dim: int) -> np.ndarray:
    return np.eye(dim, dtype=np.complex128) / dim


def purity(rho) -> float:
    rho = np.asarray(rho)
    return float(np.trace(rho @ rho).real)


@dataclass
class DiscreteEnsemble:
    """Probability vector paired with density matrices.

    Weights below ``1e-12`` are pruned and the remainder renormalized.
    """

    weights: np.ndarray
    states: np.ndarray

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=np.float64).reshape(-1)
        s = np.asarray(self.states, dtype=np.complex128)
        if s.ndim != 3 or s.shape[1] != s.shape[2]:
            raise DimensionMismatch(f"states must have shape (n, d, d), got {s.shape}")
        if w.size != s.shape[0]:
            raise DimensionMismatch(f"{w.size} weights for {s.shape[0]} states")
        if np.any(w < 0):
            raise DegenerateDistribution("negative ensemble weight")
        if abs(w.sum() - 1.0) > 1e-10:
            raise DegenerateDistribution(f"weights sum to {w.sum():.12g}, expected 1")
        keep = w >= PRUNE_WEIGHT
        if not keep.all():
            w, s = w[keep], s[keep]
            w = w / w.sum()
        self.weights = w
        self.states = np.stack([as_state(r) for r in s])

    @property
    def dim(self) -> int:
        return self.states.shape[1]

    def __len__(self) -> int:
        return self.weights.size


def average_state(ens: DiscreteEnsemble) -> np.ndarray:
    return np.einsum("i,ijk->jk", ens.weights, ens.states)


@dataclass
class PureStateFamily:
    """Indexed unit vectors ``|phi_i>``; rows of ``vectors``."""

    dim: int
    vectors: np.ndarray
    labels: Optional[list[str]] = field(default=None)

    def __post_init__(self):
        v = np.asarray(self.vectors, dtype=np.complex128)
        if v.ndim == 1:
            v = v[None, :]
        if v.ndim != 2 or v.shape[1] != self.dim:
            raise DimensionMismatch(f"vectors must have shape (n, {self.dim}), got {v.shape}")
        norms = np.linalg.norm(v, axis=1)
        if np.any(np.abs(norms - 1.0) > 1e-10):
            raise InvalidState("family vectors must be unit vectors")
        if self.labels is not None and len(self.labels) != v.shape[0]:
            raise DimensionMismatch("one label per vector is required")
        self.vectors = v

    @classmethod
    def from_vectors(cls, vectors, labels=None, normalize: bool = True) -> "PureStateFamily":
        v = np.asarray(vectors, dtype=np.complex128)
        if v.ndim == 1:
            v = v[None, :]
        if normalize:
            v = v / np.linalg.norm(v, axis=1, keepdims=True)
        return cls(v.shape[1], v, labels)

    def __len__(self) -> int:
        return self.vectors.shape[0]

    def projectors(self) -> np.ndarray:
        v = self.vectors
        return np.einsum("ia,ib->iab", v, v.conj())

    def ensemble(self, weights=None) -> DiscreteEnsemble:
        n = len(self)
        w = np.full(n, 1.0 / n) if weights is None else np.asarray(weights, dtype=np.float64)
        return DiscreteEnsemble(w, self.projectors())

    def subfamily(self, idx: Sequence[int]) -> "PureStateFamily":
        labels = None if self.labels is None else [self.labels[i] for i in idx]
        return PureStateFamily(self.dim, self.vectors[list(idx)], labels)


def is_complete(fam: PureStateFamily, tol: float = la.DEFAULT_TOL) -> bool:
    return la.rank_tol(fam.vectors, tol) == fam.dim


def is_orthonormal(fam: PureStateFamily, tol: float = 1e-8) -> bool:
    g = fam.vectors.conj() @ fam.vectors.T
    return bool(np.max(np.abs(g - np.eye(len(fam)))) <= tol)


def _check_distribution(pi, n: int) -> np.ndarray:
    p = np.asarray(pi, dtype=np.float64).reshape(-1)
    if p.size != n:
        raise DimensionMismatch(f"{p.size} weights for {n} family members")
    if np.any(p <= 0):
        raise DegenerateDistribution("every weight must be strictly positive")
    if abs(p.sum() - 1.0) > 1e-10:
        raise DegenerateDistribution(f"weights sum to {p.sum():.12g}, expected 1")
    return p


def dual_overcomplete(fam: PureStateFamily, pi=None, tol: float = la.DEFAULT_TOL) -> np.ndarray:
    """Vectors ``sqrt(pi_i) rhobar^{-1/2} |phi_i>`` as rows.

    ``rhobar = sum_i pi_i |phi_i><phi_i|``; its inverse square root is taken on
    the support, so the returned vectors resolve the projector onto
    ``supp rhobar`` (the identity when the family is complete).  If the family
    is a basis, the result is an orthonormal basis.
    """
    n = len(fam)
    p = np.full(n, 1.0 / n) if pi is None else _check_distribution(pi, n)
    v = fam.vectors
    rhobar = np.einsum("i,ia,ib->ab", p, v, v.conj())
    inv_sqrt, _ = la.support_inv_sqrt(rhobar, tol)
    return np.sqrt(p)[:, None] * (v @ inv_sqrt.T)


# ---------------------------------------------------------------------------
# seeded generators
# ---------------------------------------------------------------------------


def _rng(seed) -> np.random.Generator:
    return seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)


def ginibre(rows: int, cols: int, seed=None) -> np.ndarray:
    rng = _rng(seed)
    return (rng.standard_normal((rows, cols)) + 1j * rng.standard_normal((rows, cols))) / np.sqrt(2)


def random_state(dim: int, rank: Optional[int] = None, seed=None) -> np.ndarray:
    rank = dim if rank is None else rank
    if not 1 <= rank <= dim:
        raise InvalidRank(f"rank must be in [1, {dim}], got {rank}")
    g = ginibre(dim, rank, seed)
    rho = g @ g.conj().T
    return rho / np.trace(rho).real


def random_unit_vector(dim: int, seed=None) -> np.ndarray:
    v = ginibre(dim, 1, seed)[:, 0]
    return v / np.linalg.norm(v)


def random_pure_family(dim: int, n: int, seed=None) -> PureStateFamily:
    g = ginibre(n, dim, seed)
    return PureStateFamily.from_vectors(g)


def random_unitary(dim: int, seed=None) -> np.ndarray:
    q, r = np.linalg.qr(ginibre(dim, dim, seed))
    d = np.diag(r)
    return q * (d / np.abs(d))


def random_isometry(rows: int, cols: int, seed=None) -> np.ndarray:
    if cols > rows:
        raise DimensionMismatch("an isometry needs rows >= cols")
    q, r = np.linalg.qr(ginibre(rows, cols, seed))
    d = np.diag(r)
    return q * (d / np.abs(d))


def random_probability(n: int, seed=None) -> np.ndarray:
    p = _rng(seed).dirichlet(np.ones(n))
    # keep the distribution safely non-degenerate
    p = 0.9 * p + 0.1 / n
    return p / p.sum()


def random_ensemble(dim: int, n: int, rank: Optional[int] = None, seed=None) -> DiscreteEnsemble:
    rng = _rng(seed)
    states = np.stack([random_state(dim, rank, rng) for _ in range(n)])
    return DiscreteEnsemble(random_probability(n, rng), states)
