"""Petz recovery channels and recovery-based reversibility tests."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence, Union

import numpy as np

from . import linalg as la
from .channels import KrausChannel, _replace_branch, apply, choi
from .divergences import relative_entropy
from .errors import DegenerateDistribution, DimensionMismatch, InvalidT, SupportViolation
from .report import CriterionReport, Statement, Verdict
from .states import DiscreteEnsemble, PureStateFamily, as_state, average_state

ENTROPY_TOL = 1e-6


def petz_channel(ch: KrausChannel, sigma, tol: float = la.DEFAULT_TOL) -> KrausChannel:
    """Petz recovery channel of ``ch`` with reference state ``sigma``.

    Kraus operators ``sigma^{1/2} V_k^dag Phi(sigma)^{-1/2}`` (inverse taken on
    the support of ``Phi(sigma)``), completed to a channel by the branch
    ``X -> sigma Tr[(I - Pi) X]`` where ``Pi`` projects onto
    ``supp Phi(sigma)``.
    """
    sigma = as_state(sigma, 1e-9)
    if sigma.shape[0] != ch.dim_in:
        raise DimensionMismatch("sigma does not live on the channel input")
    out = la.hermitian_part(apply(ch, sigma))
    inv_sqrt, proj = la.support_inv_sqrt(out, tol)
    root = la.psd_sqrt(sigma)
    ops = list(np.einsum("ab,kcb,cd->kad", root, ch.kraus.conj(), inv_sqrt))
    rest = la.complement_basis(la.support_basis(proj), ch.dim_out)
    ops.extend(_replace_branch(rest, sigma))
    return KrausChannel(ch.dim_out, ch.dim_in, np.stack(ops))


def recovery_residual(ch: KrausChannel, recovery: KrausChannel, rho) -> float:
    return la.trace_norm_dist(rho, apply(recovery, apply(ch, rho)))


@dataclass
class RecoveryDiagnostics:
    entropy_gap: float
    recovery_residual: float
    reversible: bool
    tolerance: float
    entropy_tolerance: float = ENTROPY_TOL

    @property
    def entropy_reversible(self) -> bool:
        return abs(self.entropy_gap) <= self.entropy_tolerance

    @property
    def agree(self) -> bool:
        return self.entropy_reversible == self.reversible


def check_pair(
    ch: KrausChannel,
    rho,
    sigma,
    tol: float = la.DEFAULT_TOL,
    entropy_tol: float = ENTROPY_TOL,
    base=2,
) -> RecoveryDiagnostics:
    """Compare the relative-entropy gap with the Petz recovery residual."""
    rho = as_state(rho, 1e-9)
    sigma = as_state(sigma, 1e-9)
    d_in = relative_entropy(rho, sigma, base)
    if math.isinf(d_in):
        raise SupportViolation("supp rho is not contained in supp sigma")
    d_out = relative_entropy(apply(ch, rho), apply(ch, sigma), base)
    resid = recovery_residual(ch, petz_channel(ch, sigma), rho)
    return RecoveryDiagnostics(d_in - d_out, resid, resid <= tol, tol, entropy_tol)


def _family_states(family, pi) -> tuple[np.ndarray, np.ndarray]:
    if isinstance(family, PureStateFamily):
        states = family.projectors()
        weights = pi
    elif isinstance(family, DiscreteEnsemble):
        states = family.states
        weights = family.weights if pi is None else pi
    else:
        states = np.asarray(family, dtype=np.complex128)
        weights = pi
    n = states.shape[0]
    w = np.full(n, 1.0 / n) if weights is None else np.asarray(weights, dtype=np.float64)
    if w.size != n:
        raise DimensionMismatch(f"{w.size} weights for {n} states")
    if np.any(w <= 0) or abs(w.sum() - 1) > 1e-10:
        raise DegenerateDistribution("weights must be strictly positive and sum to 1")
    return states, w


def check_family(
    ch: KrausChannel,
    family: Union[PureStateFamily, DiscreteEnsemble, np.ndarray],
    pi: Optional[Sequence[float]] = None,
    tol: float = la.DEFAULT_TOL,
) -> CriterionReport:
    """Recovery test against one Petz channel built from the family average.

    With a complete family, ``ch`` is reversible on it exactly when every
    member is returned by the Petz channel of the weighted average state.
    An incomplete family (singular average) is still checked, on the support
    of the average, and the report is flagged ``restricted``.
    """
    states, w = _family_states(family, pi)
    rhobar = np.einsum("i,iab->ab", w, states)
    restricted = la.rank_tol(rhobar) < rhobar.shape[0]
    recovery = petz_channel(ch, rhobar)
    residuals = [recovery_residual(ch, recovery, r) for r in states]
    worst = max(residuals)
    ok = worst <= tol
    report = CriterionReport(
        verdict=Verdict.from_bool(ok),
        statements={"recovery": Statement(ok, worst)},
        witnesses={"petz": recovery, "member_residuals": residuals},
        tolerance=tol,
        restricted=restricted,
        residuals={"max_recovery": worst},
    )
    if restricted:
        report.warnings.append("average state is rank deficient; checked on its support")
    return report


def petz_t_channel(ch: KrausChannel, rho, sigma, t: float, tol: float = la.DEFAULT_TOL) -> KrausChannel:
    """Petz channel for the mixture ``t rho + (1 - t) sigma``."""
    if not 0.0 < t < 1.0:
        raise InvalidT(f"t must lie in (0, 1), got {t}")
    rho = as_state(rho, 1e-9)
    sigma = as_state(sigma, 1e-9)
    return petz_channel(ch, t * rho + (1 - t) * sigma, tol)


def theta_t_convergence(
    ch: KrausChannel, rho, sigma, t_grid: Sequence[float], tol: float = la.DEFAULT_TOL
) -> list[tuple[float, float]]:
    """Choi trace distance between the mixed-reference and plain Petz channels along ``t_grid``."""
    grid = [float(t) for t in t_grid]
    if any(not 0.0 < t < 1.0 for t in grid):
        raise InvalidT("every t must lie in (0, 1)")
    if any(b >= a for a, b in zip(grid[:-1], grid[1:])):
        raise InvalidT("t_grid must be strictly decreasing")
    base = choi(petz_channel(ch, sigma, tol))
    return [(t, la.trace_norm_dist(choi(petz_t_channel(ch, rho, sigma, t, tol)), base)) for t in grid]
