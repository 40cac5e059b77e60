"""Entropies, relative entropy and the Holevo quantity.

Logarithms default to base 2 (bits); pass ``base=math.e`` for nats.  An
infinite relative entropy is returned as ``math.inf`` and only arises from a
support violation.  Eigenvalues at or below ``EIG_CUTOFF`` are left out of
every ``lambda log lambda`` sum.
"""

from __future__ import annotations

import math

import numpy as np

from . import _accel
from . import linalg as la
from .channels import KrausChannel, apply
from .errors import DimensionMismatch, NotApplicable
from .states import DiscreteEnsemble, as_state, average_state

EIG_CUTOFF = 1e-13
SUPPORT_TOL = 1e-10
HOLEVO_AGREEMENT = 1e-8


def parse_base(value) -> float:
    if value in ("e", "E", "nat", "nats"):
        return math.e
    return float(value)


def _log_factor(base) -> float:
    return 1.0 / math.log(parse_base(base))


def _eigvalsh(rho) -> np.ndarray:
    return np.linalg.eigvalsh(la.hermitian_part(rho))


def von_neumann_entropy(rho, base=2) -> float:
    """``-Tr rho log rho``."""
    w = np.ascontiguousarray(_eigvalsh(rho))
    return _accel.entropy_from_eigs(w, EIG_CUTOFF) * _log_factor(base)


def relative_entropy(rho, sigma, base=2) -> float:
    """``Tr rho (log rho - log sigma)``, or ``inf`` if supp rho is not inside supp sigma.

    ``log sigma`` is taken on the support of ``sigma`` only.
    """
    rho = la.as_square(rho)
    sigma = la.as_square(sigma)
    if rho.shape != sigma.shape:
        raise DimensionMismatch(f"states of size {rho.shape[0]} and {sigma.shape[0]}")
    mu, v = np.linalg.eigh(la.hermitian_part(sigma))
    supp = mu > SUPPORT_TOL * max(mu[-1], 0.0)
    diag = np.einsum("ai,ab,bi->i", v.conj(), rho, v).real
    outside = float(np.sum(diag[~supp]))
    if outside > SUPPORT_TOL:
        return math.inf
    cross = float(np.sum(diag[supp] * np.log(mu[supp])))
    neg_ent = -_accel.entropy_from_eigs(np.ascontiguousarray(_eigvalsh(rho)), EIG_CUTOFF)
    return (neg_ent - cross) * _log_factor(base)


def holevo_chi_forms(ens: DiscreteEnsemble, base=2) -> tuple[float, float]:
    """Both expressions of the Holevo quantity.

    Returns ``(sum_i pi_i D(rho_i || rhobar), H(rhobar) - sum_i pi_i H(rho_i))``.
    """
    rhobar = average_state(ens)
    div = 0.0
    ent = von_neumann_entropy(rhobar, base)
    for p, r in zip(ens.weights, ens.states):
        div += p * relative_entropy(r, rhobar, base)
        ent -= p * von_neumann_entropy(r, base)
    return div, ent


def holevo_chi(ens: DiscreteEnsemble, base=2) -> float:
    div, ent = holevo_chi_forms(ens, base)
    if math.isfinite(div) and abs(div - ent) > HOLEVO_AGREEMENT:
        raise ArithmeticError(f"Holevo forms disagree: {div!r} vs {ent!r}")
    return div


def output_ensemble(ch: KrausChannel, ens: DiscreteEnsemble) -> DiscreteEnsemble:
    states = np.stack([la.hermitian_part(apply(ch, r)) for r in ens.states])
    return DiscreteEnsemble(ens.weights, states)


def conditional_entropy(rho, dims: tuple[int, int], base=2) -> float:
    """``H(rho) - H(Tr_A rho)`` for a state on ``A (x) B``."""
    rho = as_state(rho, 1e-9)
    rho_b = la.partial_trace(rho, dims, keep=1)
    return von_neumann_entropy(rho, base) - von_neumann_entropy(rho_b, base)


def entropy_gain(ch: KrausChannel, rho, base=2) -> float:
    return von_neumann_entropy(apply(ch, rho), base) - von_neumann_entropy(rho, base)


def donald_residual(rho, sigma, t: float, base=2) -> float:
    """``|LHS - RHS|`` of the two-state Donald identity at mixing weight ``t``.

    With ``sigma_t = t rho + (1 - t) sigma``::

        t D(rho||sigma) + (1-t) D(sigma||sigma)
            = t D(rho||sigma_t) + (1-t) D(sigma||sigma_t) + D(sigma_t||sigma)
    """
    if not 0.0 < t < 1.0:
        raise ValueError(f"t must lie in (0, 1), got {t}")
    rho = la.as_square(rho)
    sigma = la.as_square(sigma)
    sigma_t = t * rho + (1 - t) * sigma
    lhs_terms = [relative_entropy(rho, sigma, base), relative_entropy(sigma, sigma, base)]
    rhs_terms = [
        relative_entropy(rho, sigma_t, base),
        relative_entropy(sigma, sigma_t, base),
        relative_entropy(sigma_t, sigma, base),
    ]
    if not all(math.isfinite(x) for x in lhs_terms + rhs_terms):
        raise NotApplicable("an infinite relative entropy appears in the identity")
    lhs = t * lhs_terms[0] + (1 - t) * lhs_terms[1]
    rhs = t * rhs_terms[0] + (1 - t) * rhs_terms[1] + rhs_terms[2]
    return abs(lhs - rhs)
