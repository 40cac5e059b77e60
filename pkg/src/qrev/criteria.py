"""Structural reversibility criteria for families of states.

The checks here decide whether a channel can be reversed on a family by
looking at its complementary channel: reversibility on a complete family of
rank-``r`` states forces a Kraus form of the complement with rank-``r``
operators, and for pure families it forces a classical-quantum complement
built on the orthogonal blocks of the family.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Union

import numpy as np

from . import _accel
from . import linalg as la
from .channels import (
    CqStructure,
    KrausChannel,
    apply,
    block_dilation_channel,
    choi_distance,
    complementary,
    complementary_raw,
    detect_cq,
    dual_apply,
    equivalence_residual,
    find_equivalence_witness,
    gram_channel,
    is_partial_isometry,
    minimal_kraus,
    output_span_and_m,
    partial_trace_channel,
    reexpand_kraus,
)
from .divergences import conditional_entropy, holevo_chi, output_ensemble, parse_base
from .errors import (
    DegenerateDistribution,
    DimensionMismatch,
    HypothesisNotMet,
    NotComplete,
    NotOrthogonal,
    PreconditionFailed,
)
from .petz import check_family
from .report import CriterionReport, Statement, Verdict, combine
from .states import (
    DiscreteEnsemble,
    PureStateFamily,
    average_state,
    is_complete,
    is_orthonormal,
    random_state,
)

EDGE_TOL = 1e-8
AMBIGUOUS_TOL = 1e-10
BLOCK_TOL = 1e-7


# ---------------------------------------------------------------------------
# orthogonal decomposition of pure families
# ---------------------------------------------------------------------------


@dataclass
class OndDecomposition:
    """Split of a pure family into mutually orthogonal, internally connected blocks."""

    components: list[list[int]]
    projectors: np.ndarray
    bases: list[np.ndarray]
    warnings: list[str] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.components)

    def adapted_basis(self) -> tuple[np.ndarray, list[int]]:
        """Orthonormal basis (columns) adapted to the blocks, with each column's block index."""
        cols, owner = [], []
        for k, q in enumerate(self.bases):
            cols.append(q)
            owner.extend([k] * q.shape[1])
        return np.hstack(cols), owner


def ond_decompose(fam: PureStateFamily, tol: float = EDGE_TOL) -> OndDecomposition:
    """Connected components of the graph with an edge wherever ``|<phi_i|phi_j>| > tol``.

    Blocks are ordered by their smallest member index.  Pairs whose overlap
    falls in ``(1e-10, tol]`` are reported as warnings because the split is
    discontinuous there.
    """
    v = np.ascontiguousarray(fam.vectors)
    labels = _accel.overlap_labels(v, tol)
    roots = sorted(set(int(x) for x in labels))
    components = [[i for i in range(len(fam)) if labels[i] == r] for r in roots]

    warnings = []
    overlaps = np.abs(v.conj() @ v.T)
    ii, jj = np.nonzero(np.triu((overlaps > AMBIGUOUS_TOL) & (overlaps <= tol), k=1))
    for i, j in zip(ii, jj):
        warnings.append(f"ambiguous overlap |<phi_{i}|phi_{j}>| = {overlaps[i, j]:.2e}")

    bases = [la.orthonormal_range(v[c].T) for c in components]
    projectors = np.stack([q @ q.conj().T for q in bases])
    return OndDecomposition(components, projectors, bases, warnings)


def is_ond(fam: PureStateFamily, tol: float = EDGE_TOL) -> bool:
    return len(ond_decompose(fam, tol)) == 1


# ---------------------------------------------------------------------------
# rank-bounded Kraus extraction for the complement
# ---------------------------------------------------------------------------


@dataclass
class KrausExtraction:
    kraus: KrausChannel
    ranks: list[int]
    max_rank: int
    reversibility_residual: float
    state_rank: int
    m_value: int
    span_dim: int
    rank_bound: int
    count_bound: int
    member_counts: list[int]
    tp_residual: float
    choi_distance: float
    restricted: bool
    tolerance: float

    @property
    def kraus_count(self) -> int:
        return self.kraus.n_kraus

    @property
    def reversible(self) -> bool:
        return self.reversibility_residual <= self.tolerance

    @property
    def bounds_hold(self) -> bool:
        return self.max_rank <= self.state_rank and self.kraus_count <= self.count_bound


def _members(family, pi) -> tuple[np.ndarray, np.ndarray]:
    if isinstance(family, PureStateFamily):
        states = family.projectors()
        n = len(family)
        w = np.full(n, 1.0 / n) if pi is None else np.asarray(pi, dtype=np.float64)
    else:
        states = family.states
        w = family.weights if pi is None else np.asarray(pi, dtype=np.float64)
    if np.any(w <= 0):
        raise DegenerateDistribution("every weight must be strictly positive")
    return states, w


def extract_complement_kraus(
    ch: KrausChannel,
    family: Union[DiscreteEnsemble, PureStateFamily],
    pi=None,
    tol: float = 1e-8,
) -> KrausExtraction:
    """Kraus operators of the complement from a family of bounded-rank states.

    Works on the minimal dilation of the complement ``{V_k}`` and its own
    complement ``Psi``.  Forms ``A_i = pi_i rhobar^{-1/2} rho_i rhobar^{-1/2}``
    and ``B_i = pi_i Psi(rhobar)^{-1/2} Psi(rho_i) Psi(rhobar)^{-1/2}``,
    splits every ``B_i`` into weighted eigenvectors ``psi_ij`` and returns
    ``W_ij = sum_k <psi_ij|k> V_k``.  The channel is reversible on the family
    iff ``A_i = Psi^*(B_i)`` for all ``i``; in that case each ``W_ij`` has
    rank at most the largest member rank.

    With a singular average the ``psi_ij`` only resolve the support of
    ``Psi(rhobar)``; an orthonormal basis of the rest is appended, and ranks
    are measured on ``supp rhobar`` for the family-derived operators only.
    """
    states, w = _members(family, pi)
    rhobar = np.einsum("i,iab->ab", w, states)
    restricted = la.rank_tol(rhobar) < ch.dim_in
    state_rank = max(la.rank_tol(r) for r in states)

    comp = minimal_kraus(complementary(ch))
    psi_ch = complementary_raw(comp)
    inv_rho, supp = la.support_inv_sqrt(rhobar)
    inv_out, out_supp = la.support_inv_sqrt(la.hermitian_part(apply(psi_ch, rhobar)))

    residual = 0.0
    b_list = []
    for p, r in zip(w, states):
        a_i = p * inv_rho @ r @ inv_rho
        b_i = la.hermitian_part(p * inv_out @ apply(psi_ch, r) @ inv_out)
        residual = max(residual, la.trace_norm_dist(a_i, dual_apply(psi_ch, b_i)))
        b_list.append(b_i)

    top = max(np.linalg.eigvalsh(b)[-1] for b in b_list)
    rows, member_counts = [], []
    for b in b_list:
        mu, vec = la.herm_eig(b)
        keep = mu > la.DEFAULT_TOL * top
        rows.extend((vec[:, keep] * np.sqrt(mu[keep])).T)
        member_counts.append(int(np.count_nonzero(keep)))
    n_family = len(rows)
    # a singular average leaves part of the index space unresolved; complete it
    rows.extend(la.complement_basis(la.support_basis(out_supp), comp.n_kraus).T)
    psi = np.array(rows)

    new = reexpand_kraus(comp, psi, tol=1e-6)
    ranks = [la.rank_tol(k @ supp) for k in new.kraus[:n_family]]
    _, m_value = output_span_and_m(ch)
    span_dim = comp.n_kraus
    rank_bound = min(m_value + state_rank**2, span_dim)
    return KrausExtraction(
        kraus=new,
        ranks=ranks,
        max_rank=max(ranks),
        reversibility_residual=residual,
        state_rank=state_rank,
        m_value=m_value,
        span_dim=span_dim,
        rank_bound=rank_bound,
        count_bound=len(states) * rank_bound,
        member_counts=member_counts,
        tp_residual=new.tp_residual(),
        choi_distance=choi_distance(new, complementary(ch)),
        restricted=restricted,
        tolerance=tol,
    )


# ---------------------------------------------------------------------------
# orthogonal and general pure families
# ---------------------------------------------------------------------------


def _block_of(projectors: np.ndarray, p: np.ndarray) -> Optional[int]:
    """Index of the projector containing ``p``'s range, or None if ``p`` straddles blocks."""
    for j, q in enumerate(projectors):
        if np.linalg.norm(q @ p - p) <= BLOCK_TOL:
            return j
    return None


def _cq_on_blocks(cq: Optional[CqStructure], blocks: np.ndarray, m: int):
    """Match a detected c-q structure to given blocks.

    Returns ``(passed, note, sigma per block)``.
    """
    if cq is None:
        return False, "complement is not classical-quantum", None
    owner = []
    for p in blocks:
        j = _block_of(cq.projectors, p)
        if j is None:
            return False, "c-q resolution is not a coarsening of the family blocks", None
        owner.append(j)
    ranks = cq.ranks()
    if max(ranks) > m:
        return False, f"rank(sigma) = {max(ranks)} exceeds m = {m}", None
    return True, f"ranks {ranks} <= m = {m}", cq.sigmas[owner]


def _witness_statement(ch: KrausChannel, target: KrausChannel, tol: float):
    w = find_equivalence_witness(ch, target, tol)
    if w is None:
        return Statement(None, note="witness search inconclusive"), None
    return Statement(True, equivalence_residual(ch, target, w)), w


def check_orthogonal_criterion(
    ch: KrausChannel, fam: PureStateFamily, tol: float = la.DEFAULT_TOL
) -> CriterionReport:
    """Reversibility on an orthonormal basis, three ways.

    ``(i)`` Petz recovery on the family; ``(ii)`` the complement is c-q in the
    family's basis with output ranks at most ``m``; ``(iii)`` the channel is
    isometrically equivalent to the block dilation built from those output
    states.
    """
    if not is_orthonormal(fam):
        raise NotOrthogonal("family vectors are not orthonormal")
    if len(fam) != fam.dim:
        raise NotComplete(f"{len(fam)} orthonormal vectors do not span C^{fam.dim}")
    proj, m_value = output_span_and_m(ch)
    m = min(m_value + 1, int(round(np.trace(proj).real)))

    fam_report = check_family(ch, fam, tol=tol)
    statements = {"(i)": fam_report.statements["recovery"]}
    witnesses = {"petz": fam_report.witnesses["petz"]}

    cq = detect_cq(complementary(ch), tol)
    blocks = fam.projectors()
    ok, note, sigmas = _cq_on_blocks(cq, blocks, m)
    statements["(ii)"] = Statement(ok, cq.residual if cq is not None else math.nan, note)
    if cq is not None:
        witnesses["cq"] = cq

    if ok:
        target = block_dilation_channel(blocks, sigmas)
        statements["(iii)"], w = _witness_statement(ch, target, tol)
        witnesses["equivalent_channel"] = target
        if w is not None:
            witnesses["W"] = w
    else:
        statements["(iii)"] = Statement(None, note="needs the c-q representation of (ii)")

    verdict, notes = combine(statements, ("(i)", "(ii)"))
    return CriterionReport(
        verdict=verdict,
        statements=statements,
        witnesses=witnesses,
        m_value=m,
        tolerance=tol,
        warnings=notes,
        residuals={"recovery": statements["(i)"].residual},
    )


def natural_embedding(d: int, m_from: int, m_to: int) -> np.ndarray:
    """Partial isometry ``C^d (x) C^{m_from} -> C^d (x) C^{m_to}`` keeping the first basis vectors."""
    e = np.zeros((m_to, m_from), dtype=np.complex128)
    k = min(m_from, m_to)
    e[:k, :k] = np.eye(k)
    return np.kron(np.eye(d), e)


def w_condition_residual(ch: KrausChannel, fam: PureStateFamily, w, m: Optional[int] = None) -> float:
    """Largest violation of ``|phi_i><phi_i| = Phi^*(W (|phi_i><phi_i| (x) I_m) W^dag)`` and of ``Phi^*(W W^dag) = I``."""
    w = la.as_matrix(w)
    if m is None:
        proj, m_value = output_span_and_m(ch)
        m = min(m_value + 1, int(round(np.trace(proj).real)))
    if w.shape != (ch.dim_out, ch.dim_in * m):
        raise DimensionMismatch(f"W must have shape {(ch.dim_out, ch.dim_in * m)}, got {w.shape}")
    worst = la.trace_norm_dist(dual_apply(ch, w @ w.conj().T), np.eye(ch.dim_in))
    for p in fam.projectors():
        x = w @ np.kron(p, np.eye(m)) @ w.conj().T
        worst = max(worst, la.trace_norm_dist(dual_apply(ch, x), p))
    return worst


def verify_w_condition(
    ch: KrausChannel, fam: PureStateFamily, w, tol: float = 1e-8, m: Optional[int] = None
) -> bool:
    if not is_partial_isometry(w):
        return False
    return w_condition_residual(ch, fam, w, m) <= tol


def _block_diagonal_states(projectors: np.ndarray, count: int, seed) -> np.ndarray:
    rng = np.random.default_rng(seed)
    d = projectors.shape[1]
    out = []
    for _ in range(count):
        r = random_state(d, seed=rng)
        out.append(np.einsum("kab,bc,kcd->ad", projectors, r, projectors))
    return np.array(out)


def check_general_criterion(
    ch: KrausChannel,
    fam: PureStateFamily,
    tol: float = la.DEFAULT_TOL,
    n_mixed: int = 3,
    seed: int = 0,
) -> CriterionReport:
    """Reversibility on an arbitrary complete pure family.

    ``(i)`` Petz recovery on the family itself; ``(ii)`` Petz recovery on a
    basis adapted to the orthogonal blocks plus sampled block-diagonal mixed
    states; ``(iii)`` the complement is c-q on a coarsening of the blocks with
    output ranks at most ``m``; ``(iv)`` isometric equivalence with the block
    dilation channel (undecided when the witness search fails).
    """
    if not is_complete(fam):
        raise NotComplete("family does not span the input space")
    ond = ond_decompose(fam)
    proj, m_value = output_span_and_m(ch)
    m = min(m_value + 1, int(round(np.trace(proj).real)))
    statements, witnesses = {}, {"ond": ond}

    fam_report = check_family(ch, fam, tol=tol)
    statements["(i)"] = fam_report.statements["recovery"]
    witnesses["petz"] = fam_report.witnesses["petz"]

    basis, _ = ond.adapted_basis()
    adapted = np.einsum("ak,bk->kab", basis, basis.conj())
    mixed = _block_diagonal_states(ond.projectors, n_mixed, seed)
    hat_states = np.concatenate([adapted, mixed]) if n_mixed else adapted
    statements["(ii)"] = check_family(ch, hat_states, tol=tol).statements["recovery"]

    cq = detect_cq(complementary(ch), tol)
    ok, note, sigmas = _cq_on_blocks(cq, ond.projectors, m)
    statements["(iii)"] = Statement(ok, cq.residual if cq is not None else math.nan, note)
    if cq is not None:
        witnesses["cq"] = cq
    if ok:
        witnesses["block_sigmas"] = sigmas
        target = block_dilation_channel(ond.projectors, sigmas)
        witnesses["equivalent_channel"] = target
        statements["(iv)"], w = _witness_statement(ch, target, tol)
        if w is not None:
            witnesses["W"] = w
        if all(la.rank_tol(s) == 1 for s in sigmas):
            witnesses["gram"] = _gram_from_pure(sigmas)
    else:
        statements["(iv)"] = Statement(None, note="needs the c-q representation of (iii)")

    verdict, notes = combine(statements, ("(i)", "(ii)", "(iii)"))
    return CriterionReport(
        verdict=verdict,
        statements=statements,
        witnesses=witnesses,
        m_value=m,
        tolerance=tol,
        warnings=ond.warnings + notes,
        residuals={"recovery": statements["(i)"].residual, "adapted_recovery": statements["(ii)"].residual},
    )


def _gram_from_pure(sigmas: np.ndarray) -> np.ndarray:
    psi = []
    for s in sigmas:
        w, v = la.herm_eig(s)
        psi.append(np.sqrt(max(w[0], 0.0)) * v[:, 0])
    psi = np.array(psi)
    # c_kl = <psi_l|psi_k>
    return psi @ psi.conj().T


@dataclass
class GramReconstruction:
    projectors: np.ndarray
    gram: np.ndarray
    witness: Optional[np.ndarray]
    channel: KrausChannel
    report: CriterionReport


def gram_hypothesis(ch: KrausChannel, tol: float = la.DEFAULT_TOL) -> Optional[str]:
    """Which simplifying hypothesis holds: ``"injective_dual"``, ``"unital_square"`` or None."""
    proj, m_value = output_span_and_m(ch)
    if m_value == 0 and int(round(np.trace(proj).real)) == ch.dim_out:
        return "injective_dual"
    if ch.dim_in == ch.dim_out:
        if np.linalg.norm(apply(ch, np.eye(ch.dim_in)) - np.eye(ch.dim_out)) <= max(tol, 1e-9):
            return "unital_square"
    return None


def gram_reconstruct(
    ch: KrausChannel, fam: PureStateFamily, tol: float = la.DEFAULT_TOL
) -> Optional[GramReconstruction]:
    """Recover ``c_kl`` with ``ch ~ rho -> sum_kl c_kl P_k rho P_l`` up to a unitary.

    ``c`` is defined up to the gauge ``c_kl -> u_k c_kl conj(u_l)``.  Returns
    None when the channel is not reversible on the family.
    """
    if gram_hypothesis(ch, tol) is None:
        raise HypothesisNotMet("needs ker Phi^* = {0} or a unital channel with equal dimensions")
    report = check_general_criterion(ch, fam, tol)
    if not report.reversible or "gram" not in report.witnesses:
        return None
    c = report.witnesses["gram"]
    projectors = report.witnesses["ond"].projectors
    target = gram_channel(projectors, c)
    w = find_equivalence_witness(ch, target, tol)
    return GramReconstruction(projectors, c, w, target, report)


def gram_invariants(c) -> tuple[np.ndarray, np.ndarray]:
    """Gauge-invariant data of a Gram matrix: moduli and all 3-cycle products."""
    c = np.asarray(c)
    cycles = np.einsum("kl,lm,mk->klm", c, c, c)
    return np.abs(c), cycles


# ---------------------------------------------------------------------------
# Holevo-quantity applications
# ---------------------------------------------------------------------------


def _binary_entropy(p: float) -> float:
    return -sum(x * math.log2(x) for x in (p, 1 - p) if x > 0)


def unital_qubit_min_entropy(ch: KrausChannel, base=2) -> float:
    """Minimal output entropy of a unital qubit channel from its Bloch matrix."""
    paulis = [
        np.array([[0, 1], [1, 0]], dtype=np.complex128),
        np.array([[0, -1j], [1j, 0]]),
        np.array([[1, 0], [0, -1]], dtype=np.complex128),
    ]
    t = np.array([[0.5 * np.trace(a @ apply(ch, b)).real for b in paulis] for a in paulis])
    s_max = min(1.0, float(np.linalg.svd(t, compute_uv=False)[0]))
    return max(0.0, _binary_entropy((1 + s_max) / 2) * math.log(2) / math.log(parse_base(base)))


def capacity_saturation_check(
    ch: KrausChannel,
    family: Optional[PureStateFamily] = None,
    tol: float = la.DEFAULT_TOL,
    base=2,
    chi_tol: float = 1e-8,
) -> CriterionReport:
    """Does the Holevo capacity reach ``log dim_in``?

    Uses the structural criterion (complement c-q on an orthogonal resolution
    with bounded output ranks) to locate a saturating ensemble, the uniform
    mixture of a basis adapted to the resolution, and reports its Holevo
    quantity.  Unital qubit channels also get their minimal output entropy.
    """
    log_d = math.log(ch.dim_in) / math.log(parse_base(base))
    statements, witnesses, residuals = {}, {}, {"log_dim": log_d}
    blocks = None
    m = None
    if family is not None:
        rep = check_general_criterion(ch, family, tol)
        m = rep.m_value
        witnesses["criterion"] = rep
        statements["structure"] = Statement(
            None if rep.verdict is Verdict.UNKNOWN else rep.reversible, note="general criterion on the family"
        )
        if rep.reversible:
            blocks = rep.witnesses["ond"].projectors
    else:
        proj, m_value = output_span_and_m(ch)
        m = min(m_value + 1, int(round(np.trace(proj).real)))
        cq = detect_cq(complementary(ch), tol)
        if cq is None:
            statements["structure"] = Statement(False, note="complement is not classical-quantum")
        elif max(cq.ranks()) > m:
            statements["structure"] = Statement(False, note=f"output rank exceeds m = {m}")
        else:
            statements["structure"] = Statement(True, cq.residual, f"{len(cq)} blocks, m = {m}")
            witnesses["cq"] = cq
            blocks = cq.projectors

    if blocks is not None:
        basis = np.hstack([la.support_basis(p) for p in blocks])
        ens = DiscreteEnsemble(np.full(ch.dim_in, 1.0 / ch.dim_in), np.einsum("ak,bk->kab", basis, basis.conj()))
        chi = float(holevo_chi(output_ensemble(ch, ens), base))
        residuals["chi"] = chi
        statements["chi"] = Statement(abs(chi - log_d) <= chi_tol, abs(chi - log_d))
        witnesses["ensemble"] = ens

    if ch.dim_in == ch.dim_out == 2 and np.linalg.norm(apply(ch, np.eye(2)) - np.eye(2)) <= max(tol, 1e-9):
        h_min = unital_qubit_min_entropy(ch, base)
        residuals["h_min"] = h_min
        residuals["capacity"] = log_d - h_min
        statements["hmin"] = Statement(h_min <= chi_tol, h_min, "unital qubit: C = log 2 - H_min")

    required = ("structure", "chi") if blocks is not None else ("structure",)
    verdict, notes = combine(statements, required)
    return CriterionReport(
        verdict=verdict,
        statements=statements,
        witnesses=witnesses,
        m_value=m,
        tolerance=tol,
        warnings=notes,
        residuals=residuals,
    )


def _check_bipartite(ens: DiscreteEnsemble, dims: tuple[int, int], traced: int) -> None:
    d1, d2 = int(dims[0]), int(dims[1])
    if ens.dim != d1 * d2:
        raise DimensionMismatch(f"states of size {ens.dim} on a {d1}x{d2} system")
    d_traced = (d1, d2)[traced]
    ranks = [la.rank_tol(r) for r in ens.states]
    if max(ranks) >= d_traced:
        raise PreconditionFailed("rank", f"max member rank {max(ranks)} >= traced dimension {d_traced}")
    if la.rank_tol(average_state(ens)) < ens.dim:
        raise PreconditionFailed("full_rank_average", "average state is rank deficient")


def strict_decrease_gap(
    ens: DiscreteEnsemble, dims: tuple[int, int], traced: int = 1, base=2
) -> float:
    """``chi(E) - chi(Tr E)`` for the partial trace over factor ``traced``.

    Preconditions: every member rank is below the traced dimension and the
    average state is full rank; the gap is then strictly positive.
    """
    _check_bipartite(ens, dims, traced)
    tr = partial_trace_channel(int(dims[0]), int(dims[1]), keep=1 - traced)
    return holevo_chi(ens, base) - holevo_chi(output_ensemble(tr, ens), base)


def strict_concavity_gap(ens: DiscreteEnsemble, dims: tuple[int, int], base=2) -> float:
    """``H_{A|B}(rhobar) - sum_i pi_i H_{A|B}(rho_i)`` on ``A (x) B``.

    Preconditions: member ranks below ``dim A``, full-rank average.
    """
    _check_bipartite(ens, dims, traced=0)
    total = conditional_entropy(average_state(ens), dims, base)
    for p, r in zip(ens.weights, ens.states):
        total -= p * conditional_entropy(r, dims, base)
    return total
