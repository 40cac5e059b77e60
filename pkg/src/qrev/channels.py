"""Kraus-form quantum channels: representations, complements and structure.

A channel is stored as a ``(n, dim_out, dim_in)`` array of Kraus operators.
Channel equality is always judged by the trace-norm distance of Choi
matrices.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from . import _accel
from . import linalg as la
from .errors import (
    DimensionMismatch,
    InvalidResolution,
    NotAGramMatrix,
    NotOvercomplete,
)
from .states import as_state

TP_TOL = 1e-9
CLUSTER_TOL = 1e-7


@dataclass(frozen=True, eq=False)
class KrausChannel:
    dim_in: int
    dim_out: int
    kraus: np.ndarray

    def __post_init__(self):
        k = np.ascontiguousarray(self.kraus, dtype=np.complex128)
        if k.ndim == 2:
            k = k[None]
        if k.ndim != 3 or k.shape[1:] != (self.dim_out, self.dim_in):
            raise DimensionMismatch(
                f"Kraus operators must have shape (n, {self.dim_out}, {self.dim_in}), got {k.shape}"
            )
        object.__setattr__(self, "kraus", k)

    @classmethod
    def from_ops(cls, ops, check: bool = True, tol: float = TP_TOL) -> "KrausChannel":
        k = np.asarray(ops, dtype=np.complex128)
        if k.ndim == 2:
            k = k[None]
        ch = cls(k.shape[2], k.shape[1], k)
        if check and ch.tp_residual() > tol:
            raise InvalidResolution(
                f"Kraus operators are not trace preserving (residual {ch.tp_residual():.3e})"
            )
        return ch

    @property
    def n_kraus(self) -> int:
        return self.kraus.shape[0]

    def tp_residual(self) -> float:
        s = np.einsum("kji,kjl->il", self.kraus.conj(), self.kraus)
        return float(np.linalg.norm(s - np.eye(self.dim_in)))

    def is_cptp(self, tol: float = TP_TOL) -> bool:
        return self.tp_residual() <= tol

    def __call__(self, rho) -> np.ndarray:
        return apply(self, rho)

    def __repr__(self) -> str:
        return f"KrausChannel(dim_in={self.dim_in}, dim_out={self.dim_out}, n_kraus={self.n_kraus})"


@dataclass(frozen=True, eq=False)
class CqStructure:
    """``Phi(rho) = sum_k Tr(P_k rho) sigma_k`` with an orthogonal resolution {P_k}."""

    projectors: np.ndarray
    sigmas: np.ndarray
    residual: float = 0.0

    def __len__(self) -> int:
        return self.projectors.shape[0]

    def ranks(self, tol: float = la.DEFAULT_TOL) -> list[int]:
        return [la.rank_tol(s, tol) for s in self.sigmas]


# ---------------------------------------------------------------------------
# action, dual, Choi
# ---------------------------------------------------------------------------


def apply(ch: KrausChannel, rho) -> np.ndarray:
    r = la.as_square(rho)
    if r.shape[0] != ch.dim_in:
        raise DimensionMismatch(f"input of size {r.shape[0]} for channel with dim_in={ch.dim_in}")
    return _accel.kraus_apply(ch.kraus, np.ascontiguousarray(r))


def dual_apply(ch: KrausChannel, a) -> np.ndarray:
    """Heisenberg-picture map ``A -> sum_k V_k^dagger A V_k``."""
    x = la.as_square(a)
    if x.shape[0] != ch.dim_out:
        raise DimensionMismatch(f"operator of size {x.shape[0]} for channel with dim_out={ch.dim_out}")
    return _accel.kraus_dual(ch.kraus, np.ascontiguousarray(x))


def choi(ch: KrausChannel) -> np.ndarray:
    """Choi matrix ``sum_ij Phi(|i><j|) (x) |i><j|`` (output factor first).

    Unnormalized: its trace equals ``dim_in``.
    """
    return _accel.choi_from_kraus(ch.kraus)


def choi_distance(a: KrausChannel, b: KrausChannel) -> float:
    if (a.dim_in, a.dim_out) != (b.dim_in, b.dim_out):
        raise DimensionMismatch("channels have different input/output dimensions")
    return la.trace_norm_dist(choi(a), choi(b))


def same_channel(a: KrausChannel, b: KrausChannel, tol: float = TP_TOL) -> bool:
    return choi_distance(a, b) <= tol


def compose(outer: KrausChannel, inner: KrausChannel) -> KrausChannel:
    """``outer o inner``."""
    if outer.dim_in != inner.dim_out:
        raise DimensionMismatch("cannot compose: dimension mismatch")
    k = np.einsum("aij,bjk->abik", outer.kraus, inner.kraus)
    return KrausChannel(inner.dim_in, outer.dim_out, k.reshape(-1, outer.dim_out, inner.dim_in))


def conjugate_output(ch: KrausChannel, w) -> KrausChannel:
    """The map ``rho -> W Phi(rho) W^dagger`` (CP, trace preserving only if W is isometric on the output span)."""
    w = la.as_matrix(w)
    if w.shape[1] != ch.dim_out:
        raise DimensionMismatch("W does not act on the channel output")
    return KrausChannel(ch.dim_in, w.shape[0], np.einsum("ij,kjl->kil", w, ch.kraus))


def minimal_kraus(ch: KrausChannel, tol: float = la.DEFAULT_TOL) -> KrausChannel:
    """Kraus form with as many operators as the Choi rank.

    Operators are the reshaped eigenvectors of the Choi matrix scaled by the
    square roots of its nonzero eigenvalues, so they are mutually orthogonal
    in the Hilbert-Schmidt inner product.
    """
    w, v = la.herm_eig(choi(ch))
    keep = w > tol * w[0]
    ops = (v[:, keep] * np.sqrt(w[keep])).T.reshape(-1, ch.dim_out, ch.dim_in)
    return KrausChannel(ch.dim_in, ch.dim_out, ops)


def complementary_raw(ch: KrausChannel) -> KrausChannel:
    """Complement evaluated on the Kraus list as given.

    ``Phi^(rho) = sum_{k,l} Tr[V_k rho V_l^dagger] |k><l|``; the Kraus
    operators of the complement are ``R_b[k, :] = <b| V_k``.
    """
    return KrausChannel(ch.dim_in, ch.n_kraus, np.transpose(ch.kraus, (1, 0, 2)))


def complementary(ch: KrausChannel, tol: float = la.DEFAULT_TOL) -> KrausChannel:
    return complementary_raw(minimal_kraus(ch, tol))


def reexpand_kraus(ch: KrausChannel, psi, tol: float = TP_TOL) -> KrausChannel:
    """Re-express the channel with ``W_i = sum_k <psi_i|k> V_k``.

    ``psi`` holds the vectors of an overcomplete system on the Kraus index
    space as rows.
    """
    p = np.asarray(psi, dtype=np.complex128)
    if p.ndim != 2 or p.shape[1] != ch.n_kraus:
        raise DimensionMismatch(f"psi must have shape (m, {ch.n_kraus}), got {p.shape}")
    resid = np.linalg.norm(p.T @ p.conj() - np.eye(ch.n_kraus))
    if resid > tol:
        raise NotOvercomplete(f"sum |psi_i><psi_i| differs from identity by {resid:.3e}")
    return KrausChannel(ch.dim_in, ch.dim_out, np.einsum("ik,kab->iab", p.conj(), ch.kraus))


def output_span(ch: KrausChannel, tol: float = la.DEFAULT_TOL) -> np.ndarray:
    """Orthonormal basis (columns) of the span of all output supports."""
    return la.support_basis(apply(ch, np.eye(ch.dim_in) / ch.dim_in), tol)


def output_span_and_m(ch: KrausChannel, tol: float = la.DEFAULT_TOL) -> tuple[np.ndarray, int]:
    """Projector onto the output span and the kernel dimension of the dual
    map restricted to operators supported on that span."""
    q = output_span(ch, tol)
    s = q.shape[1]
    # columns: vec(Phi*(Q E_ab Q^dagger)) = vec(sum_k (V_k^dag Q) E_ab (Q^dag V_k))
    left = np.einsum("kji,ja->kia", ch.kraus.conj(), q)  # V^dag Q : (n, din, s)
    cols = np.einsum("kia,kbj->ijab", left, left.conj().transpose(0, 2, 1))
    mat = cols.reshape(ch.dim_in * ch.dim_in, s * s)
    m_value = s * s - la.rank_tol(mat, tol)
    return q @ q.conj().T, int(m_value)


def reversibility_m(ch: KrausChannel, tol: float = la.DEFAULT_TOL) -> int:
    """``min{m(Phi) + 1, dim of the output span}``."""
    proj, m_value = output_span_and_m(ch, tol)
    return min(m_value + 1, int(round(np.trace(proj).real)))


# ---------------------------------------------------------------------------
# c-q structure
# ---------------------------------------------------------------------------


def _hermitian_basis(d: int):
    for a in range(d):
        e = np.zeros((d, d), dtype=np.complex128)
        e[a, a] = 1
        yield e
    for a in range(d):
        for b in range(a + 1, d):
            e = np.zeros((d, d), dtype=np.complex128)
            e[a, b] = e[b, a] = 1
            yield e
            f = np.zeros((d, d), dtype=np.complex128)
            f[a, b], f[b, a] = -1j, 1j
            yield f


def _cluster(values: np.ndarray, tol: float) -> list[np.ndarray]:
    order = np.argsort(values, kind="stable")
    groups = [[order[0]]]
    for prev, cur in zip(order[:-1], order[1:]):
        if values[cur] - values[prev] > tol:
            groups.append([cur])
        else:
            groups[-1].append(cur)
    return [np.array(g) for g in groups]


def _joint_blocks(ops: Sequence[np.ndarray], dim: int, tol: float) -> list[np.ndarray]:
    # refine the trivial block by every operator's spectral clusters
    blocks = [np.eye(dim, dtype=np.complex128)]
    for a in ops:
        scale = max(1.0, np.linalg.norm(a, 2))
        refined = []
        for q in blocks:
            if q.shape[1] == 1:
                refined.append(q)
                continue
            w, v = np.linalg.eigh(la.hermitian_part(q.conj().T @ a @ q))
            for g in _cluster(w, tol * scale):
                refined.append(q @ v[:, g])
        blocks = refined
    return blocks


def detect_cq(ch: KrausChannel, tol: float = la.DEFAULT_TOL) -> Optional[CqStructure]:
    """Find ``{P_k}, {sigma_k}`` with ``Phi(rho) = sum_k Tr(P_k rho) sigma_k``.

    The range of the dual map over a Hermitian operator basis must be a
    commuting family; its joint eigenspaces give the projectors.  Blocks are
    merged exactly when their output states coincide, so the resolution is
    the canonical one with pairwise distinct ``sigma_k``.  Returns ``None``
    when no such representation verifies to ``tol`` in Choi distance.
    """
    images = []
    for y in _hermitian_basis(ch.dim_out):
        a = la.hermitian_part(dual_apply(ch, y))
        if np.linalg.norm(a) > 1e-14:
            images.append(a)
    for i, a in enumerate(images):
        for b in images[i + 1:]:
            comm = a @ b - b @ a
            if np.linalg.norm(comm) > CLUSTER_TOL * max(1.0, np.linalg.norm(a) * np.linalg.norm(b)):
                return None

    blocks = _joint_blocks(images, ch.dim_in, CLUSTER_TOL)
    # deterministic order: by the smallest basis index carrying weight
    def key(q):
        weight = np.sum(np.abs(q) ** 2, axis=1)
        return int(np.flatnonzero(weight > 1e-6)[0])

    blocks.sort(key=key)
    projectors = np.stack([q @ q.conj().T for q in blocks])
    sigmas = np.stack([la.hermitian_part(apply(ch, p / np.trace(p).real)) for p in projectors])
    candidate = cq_channel(projectors, sigmas)
    resid = choi_distance(ch, candidate)
    if resid > tol:
        return None
    return CqStructure(projectors, sigmas, resid)


# ---------------------------------------------------------------------------
# isometric equivalence
# ---------------------------------------------------------------------------


def is_partial_isometry(w, tol: float = 1e-9) -> bool:
    w = la.as_matrix(w)
    for p in (w.conj().T @ w, w @ w.conj().T):
        if np.linalg.norm(p @ p - p) > tol:
            return False
    return True


def equivalence_residual(a: KrausChannel, b: KrausChannel, w) -> float:
    """Largest violation of ``b = W a W^dag`` and ``a = W^dag b W`` in Choi distance."""
    w = la.as_matrix(w)
    if w.shape != (b.dim_out, a.dim_out):
        raise DimensionMismatch(f"W must have shape {(b.dim_out, a.dim_out)}, got {w.shape}")
    fwd = la.trace_norm_dist(choi(conjugate_output(a, w)), choi(b))
    back = la.trace_norm_dist(choi(conjugate_output(b, w.conj().T)), choi(a))
    return max(fwd, back)


def verify_isometric_equivalence(a: KrausChannel, b: KrausChannel, w, tol: float = 1e-8) -> bool:
    if a.dim_in != b.dim_in:
        raise DimensionMismatch("channels have different input dimensions")
    return is_partial_isometry(w) and equivalence_residual(a, b, w) <= tol


def find_equivalence_witness(
    a: KrausChannel, b: KrausChannel, tol: float = 1e-8
) -> Optional[np.ndarray]:
    """Search for a partial isometry W with ``b = W a W^dag``, ``a = W^dag b W``.

    Solves the linear intertwining relations ``T X_ij = X'_ij T`` on the two
    output spans (``X_ij`` = compressed images of the matrix units), takes a
    generic element of the solution space and replaces it by its unitary
    polar factor.  ``None`` means no witness was found; it is not a proof of
    inequivalence.
    """
    if a.dim_in != b.dim_in:
        raise DimensionMismatch("channels have different input dimensions")
    qa, qb = output_span(a), output_span(b)
    s = qa.shape[1]
    if qb.shape[1] != s:
        return None
    avg = np.eye(a.dim_in) / a.dim_in
    wa = np.linalg.eigvalsh(qa.conj().T @ apply(a, avg) @ qa)
    wb = np.linalg.eigvalsh(qb.conj().T @ apply(b, avg) @ qb)
    if np.max(np.abs(wa - wb)) > 1e-6:
        return None

    # compressed Kraus operators; X_ij = sum_k A_k E_ij A_k^dag
    ka = np.einsum("ax,kab->kxb", qa.conj(), a.kraus)
    kb = np.einsum("ax,kab->kxb", qb.conj(), b.kraus)
    eye = np.eye(s)
    rows = []
    for i in range(a.dim_in):
        for j in range(a.dim_in):
            xa = np.einsum("kx,ky->xy", ka[:, :, i], ka[:, :, j].conj())
            xb = np.einsum("kx,ky->xy", kb[:, :, i], kb[:, :, j].conj())
            # vec_row(T X) - vec_row(X' T) = (I (x) X^T - X' (x) I) vec_row(T)
            rows.append(np.kron(eye, xa.T) - np.kron(xb, eye))
    ns = la.null_space(np.vstack(rows), rtol=1e-8, atol=1e-10)
    if ns.shape[1] == 0:
        return None
    coeffs = np.random.default_rng(20240607).standard_normal(ns.shape[1])
    t = (ns @ coeffs).reshape(s, s)
    u, _, vh = np.linalg.svd(t)
    w = qb @ (u @ vh) @ qa.conj().T
    if verify_isometric_equivalence(a, b, w, tol):
        return w
    return None


def equivalence_pullback(w, sigma) -> KrausChannel:
    """The channel ``X -> W^dag X W + sigma Tr[(I - W W^dag) X]``.

    Composing a reversing channel of ``Phi`` with this map reverses any
    ``Phi' = W Phi W^dag``.
    """
    w = la.as_matrix(w)
    sigma = as_state(sigma)
    d_big, d_small = w.shape
    ops = [w.conj().T]
    rest = la.complement_basis(la.orthonormal_range(w), d_big)
    ops.extend(_replace_branch(rest, sigma))
    return KrausChannel.from_ops(np.stack(ops).reshape(-1, d_small, d_big))


def _replace_branch(basis: np.ndarray, sigma: np.ndarray) -> list[np.ndarray]:
    # Kraus ops of X -> sigma Tr[P X], P the projector onto span(basis)
    if basis.shape[1] == 0:
        return []
    w, v = la.herm_eig(sigma)
    ops = []
    for lam, s in zip(w, v.T):
        if lam <= 0:
            continue
        for f in basis.T:
            ops.append(np.sqrt(lam) * np.outer(s, f.conj()))
    return ops


# ---------------------------------------------------------------------------
# constructors
# ---------------------------------------------------------------------------


def identity(d: int) -> KrausChannel:
    return KrausChannel(d, d, np.eye(d, dtype=np.complex128)[None])


def unitary(u) -> KrausChannel:
    u = la.as_square(u)
    if np.linalg.norm(u.conj().T @ u - np.eye(u.shape[0])) > TP_TOL:
        raise InvalidResolution("matrix is not unitary")
    return KrausChannel(u.shape[0], u.shape[0], u[None])


def isometry(v) -> KrausChannel:
    v = la.as_matrix(v)
    return KrausChannel.from_ops(v[None])


def depolarize_to(sigma, d_in: int) -> KrausChannel:
    """Completely depolarizing channel ``rho -> sigma Tr(rho)``."""
    sigma = as_state(sigma)
    ops = _replace_branch(np.eye(d_in, dtype=np.complex128), sigma)
    return KrausChannel(d_in, sigma.shape[0], np.stack(ops))


def _check_resolution(projectors, tol: float = 1e-9) -> np.ndarray:
    p = np.asarray(projectors, dtype=np.complex128)
    if p.ndim != 3 or p.shape[1] != p.shape[2]:
        raise InvalidResolution(f"projectors must have shape (n, d, d), got {p.shape}")
    d = p.shape[1]
    for k in range(p.shape[0]):
        for l in range(p.shape[0]):
            target = p[k] if k == l else np.zeros((d, d))
            if np.linalg.norm(p[k] @ p[l] - target) > tol:
                raise InvalidResolution(f"P_{k} P_{l} violates orthogonality")
        if np.linalg.norm(p[k] - p[k].conj().T) > tol:
            raise InvalidResolution(f"P_{k} is not Hermitian")
    if np.linalg.norm(p.sum(axis=0) - np.eye(d)) > tol:
        raise InvalidResolution("projectors do not sum to the identity")
    return p


def basis_projectors(basis) -> np.ndarray:
    """Rank-one projectors onto the columns of a unitary matrix."""
    u = la.as_square(basis)
    return np.einsum("ak,bk->kab", u, u.conj())


def cq_channel(resolution, sigmas) -> KrausChannel:
    """``rho -> sum_k Tr(P_k rho) sigma_k``.

    ``resolution`` is either a unitary whose columns form the basis, or a
    stack of orthogonal projectors summing to the identity.
    """
    r = np.asarray(resolution, dtype=np.complex128)
    projectors = basis_projectors(r) if r.ndim == 2 else _check_resolution(r)
    sig = [as_state(s, 1e-9) for s in sigmas]
    if len(sig) != projectors.shape[0]:
        raise DimensionMismatch(f"{len(sig)} states for {projectors.shape[0]} projectors")
    d_in = projectors.shape[1]
    ops = []
    for p, s in zip(projectors, sig):
        ops.extend(_replace_branch(la.support_basis(p), s))
    return KrausChannel(d_in, sig[0].shape[0], np.stack(ops))


def pinching(projectors) -> KrausChannel:
    p = _check_resolution(projectors)
    return KrausChannel(p.shape[1], p.shape[1], p)


def gram_vectors(c) -> np.ndarray:
    """Rows ``psi_k`` with ``<psi_l|psi_k> = c_kl``."""
    return la.psd_sqrt(c).T.conj()


def gram_channel(projectors, c) -> KrausChannel:
    """``rho -> sum_{k,l} c_kl P_k rho P_l`` for a Gram matrix ``c`` of unit vectors."""
    p = _check_resolution(projectors)
    c = la.as_square(c)
    n = p.shape[0]
    if c.shape[0] != n:
        raise NotAGramMatrix(f"c is {c.shape[0]}x{c.shape[0]} for {n} projectors")
    if np.max(np.abs(np.diag(c) - 1)) > 1e-9:
        raise NotAGramMatrix("diagonal of c must be 1")
    try:
        psi = gram_vectors(c)
    except Exception as exc:
        raise NotAGramMatrix(f"c is not positive semidefinite ({exc})") from None
    # K_j = sum_k psi_k[j] P_k
    ops = np.einsum("kj,kab->jab", psi, p)
    return KrausChannel.from_ops(ops)


def block_dilation_channel(projectors, sigmas, m: Optional[int] = None) -> KrausChannel:
    """``rho -> sum_{k,l} P_k rho P_l (x) sum_{p,t} <psi^l_t|psi^k_p> |p><t|``.

    ``sigma_k = sum_p |psi^k_p><psi^k_p|`` (spectral vectors, padded to ``m``).
    Its complement is the c-q channel ``rho -> sum_k Tr(P_k rho) sigma_k``,
    and the partial trace over the second factor reverses it on every
    block-diagonal state.
    """
    p = _check_resolution(projectors)
    sig = [as_state(s, 1e-9) for s in sigmas]
    ranks = [la.rank_tol(s) for s in sig]
    m = max(ranks) if m is None else int(m)
    if m < max(ranks):
        raise DimensionMismatch(f"m={m} is smaller than the largest rank {max(ranks)}")
    e = sig[0].shape[0]
    # psi[k, q] : vector psi^k_q in C^e (zero beyond the rank)
    psi = np.zeros((len(sig), m, e), dtype=np.complex128)
    for k, s in enumerate(sig):
        w, v = la.herm_eig(s)
        r = ranks[k]
        psi[k, :r] = (v[:, :r] * np.sqrt(np.clip(w[:r], 0, None))).T
    # a^k_j = sum_q psi^k_q[j] |q>  ->  K_j = sum_k P_k (x) |a^k_j>
    d = p.shape[1]
    ops = np.einsum("kqj,kab->jaqb", psi, p).reshape(e, d * m, d)
    return KrausChannel.from_ops(ops)


def partial_trace_channel(d_a: int, d_e: int, keep: int = 0) -> KrausChannel:
    """Partial trace on ``C^{d_a} (x) C^{d_e}``; ``keep=0`` keeps the first factor."""
    if keep in (0, "A", "a"):
        ops = [np.kron(np.eye(d_a), np.eye(d_e)[e][None, :]) for e in range(d_e)]
        return KrausChannel(d_a * d_e, d_a, np.stack(ops))
    ops = [np.kron(np.eye(d_a)[a][None, :], np.eye(d_e)) for a in range(d_a)]
    return KrausChannel(d_a * d_e, d_e, np.stack(ops))


def dephasing(d: int) -> KrausChannel:
    return pinching(basis_projectors(np.eye(d)))


def random_channel(d_in: int, d_out: int, n_kraus: int, seed=None) -> KrausChannel:
    from .states import random_isometry

    v = random_isometry(n_kraus * d_out, d_in, seed)
    return KrausChannel(d_in, d_out, v.reshape(n_kraus, d_out, d_in))
