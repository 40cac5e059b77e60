"""Seeded constructions of reversible and irreversible test instances."""

import numpy as np

from qrev import channels as C
from qrev import states as st


def split_dims(d, rng, max_blocks=None):
    """Random composition of ``d`` into positive block sizes."""
    max_blocks = d if max_blocks is None else min(d, max_blocks)
    k = int(rng.integers(1, max_blocks + 1))
    cuts = np.sort(rng.choice(np.arange(1, d), size=k - 1, replace=False)) if k > 1 else []
    bounds = [0, *cuts, d]
    return [b - a for a, b in zip(bounds[:-1], bounds[1:])]


def random_blocks(d, rng, max_blocks=None):
    """Orthonormal bases (columns) of a random orthogonal split of C^d."""
    u = st.random_unitary(d, rng)
    out, start = [], 0
    for size in split_dims(d, rng, max_blocks):
        out.append(u[:, start:start + size])
        start += size
    return out


def projectors_of(bases):
    return np.stack([q @ q.conj().T for q in bases])


def block_family(bases, rng, extra=1):
    """Complete pure family whose orthogonal blocks are exactly ``bases``.

    Each block gets ``dim + extra`` generic vectors from its subspace, so
    the vectors inside a block overlap and the block is connected.
    """
    vecs = []
    for q in bases:
        k = q.shape[1]
        n = k + extra if k > 1 else 1 + (extra > 0)
        coeffs = st.ginibre(n, k, rng)
        vecs.extend(coeffs @ q.T)
    order = rng.permutation(len(vecs))
    return st.PureStateFamily.from_vectors(np.array(vecs)[order])


def reversible_channel(projectors, rng, env=3, max_rank=2, scramble=True):
    """Block dilation channel with random output states, optionally rotated on the output."""
    sigmas = [st.random_state(env, int(rng.integers(1, min(max_rank, env) + 1)), rng) for _ in projectors]
    ch = C.block_dilation_channel(projectors, sigmas)
    if scramble:
        ch = C.conjugate_output(ch, st.random_unitary(ch.dim_out, rng))
    return ch, sigmas


def irreversible_channel(d_in, rng, d_out=None, n_kraus=2):
    d_out = d_in if d_out is None else d_out
    n = max(n_kraus, -(-d_in // d_out))
    return C.random_channel(d_in, d_out, n, rng)


def block_states(bases, rng, rank, per_block=None):
    """States of rank <= ``rank``, each inside one block, with a full-rank average."""
    states = []
    for q in bases:
        k = q.shape[1]
        r = min(rank, k)
        count = per_block or max(2, -(-k // r) + 1)
        for _ in range(count):
            g = st.ginibre(k, r, rng)
            rho = q @ (g @ g.conj().T) @ q.conj().T
            states.append(rho / np.trace(rho).real)
    weights = st.random_probability(len(states), rng)
    return st.DiscreteEnsemble(weights, np.stack(states))
