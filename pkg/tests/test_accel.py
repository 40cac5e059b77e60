"""The numba kernels and their numpy fallbacks must agree."""

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as hs

from qrev import _accel
from qrev import states as st

from strategies import seeds

needs_numba = pytest.mark.skipif(not _accel.HAVE_NUMBA, reason="numba not installed")


def _kraus(seed, n=3, dout=3, din=2):
    return np.ascontiguousarray(st.ginibre(n * dout, din, seed).reshape(n, dout, din))


def test_backend_flag_is_consistent():
    assert _accel.BACKEND in ("numba", "numpy")
    assert (_accel.BACKEND == "numba") == (_accel.HAVE_NUMBA and _accel.USE_NUMBA)


@given(seeds)
def test_numpy_kernels_against_definitions(seed):
    k = _kraus(seed)
    rho = st.random_state(2, seed=seed)
    want = sum(v @ rho @ v.conj().T for v in k)
    np.testing.assert_allclose(_accel.kraus_apply_numpy(k, rho), want, atol=1e-12)
    a = st.ginibre(3, 3, seed)
    np.testing.assert_allclose(_accel.kraus_dual_numpy(k, a), sum(v.conj().T @ a @ v for v in k), atol=1e-12)


@needs_numba
@given(seeds)
def test_kraus_kernels_agree(seed):
    k = _kraus(seed)
    rho = st.random_state(2, seed=seed)
    a = np.ascontiguousarray(st.ginibre(3, 3, seed))
    np.testing.assert_allclose(_accel.kraus_apply_numba(k, rho), _accel.kraus_apply_numpy(k, rho), atol=1e-12)
    np.testing.assert_allclose(_accel.kraus_dual_numba(k, a), _accel.kraus_dual_numpy(k, a), atol=1e-12)
    np.testing.assert_allclose(_accel.choi_from_kraus_numba(k), _accel.choi_from_kraus_numpy(k), atol=1e-12)


@needs_numba
@given(hs.integers(1, 12), seeds)
def test_overlap_labels_agree(n, seed):
    v = np.ascontiguousarray(st.ginibre(n, 6, seed))
    v[np.abs(v) < 0.9] = 0  # sparse vectors give nontrivial components
    np.testing.assert_array_equal(_accel.overlap_labels_numba(v, 1e-8), _accel.overlap_labels_numpy(v, 1e-8))


@needs_numba
@given(seeds)
def test_entropy_kernels_agree(seed):
    w = np.ascontiguousarray(np.linalg.eigvalsh(st.random_state(5, seed=seed)))
    assert _accel.entropy_from_eigs_numba(w, 1e-13) == pytest.approx(_accel.entropy_from_eigs_numpy(w, 1e-13), abs=1e-14)


def test_overlap_labels_roots_are_smallest_members():
    v = np.array([[0, 1, 0], [1, 0, 0], [1, 1, 0], [0, 0, 1]], dtype=complex)
    np.testing.assert_array_equal(_accel.overlap_labels(v, 1e-8), [0, 0, 0, 3])
