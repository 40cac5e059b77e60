"""Time the numba kernels against their numpy references.

Both variants live in ``qrev._accel`` regardless of the ``QREV_NUMBA`` flag,
so one process can time them side by side.  The first numba call (compile)
is excluded.

    python benchmarks/bench_kernels.py [--repeat 200] [--dims 2 4 8 16]
"""

import argparse
import timeit

import numpy as np

from qrev import _accel


def _inputs(d, rng):
    n = 4
    kraus = rng.standard_normal((n, d, d)) + 1j * rng.standard_normal((n, d, d))
    rho = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    rho = rho @ rho.conj().T
    vecs = rng.standard_normal((3 * d, d)) + 0j
    vecs[:, d // 2 :] = 0  # leave some pairs orthogonal
    eigs = np.abs(rng.standard_normal(d))
    return {
        "kraus_apply": (kraus, rho),
        "kraus_dual": (kraus, rho),
        "choi_from_kraus": (kraus,),
        "overlap_labels": (vecs, 1e-8),
        "entropy_from_eigs": (eigs / eigs.sum(), 1e-12),
    }


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=200)
    parser.add_argument("--dims", type=int, nargs="+", default=[2, 4, 8, 16])
    args = parser.parse_args()
    if not _accel.HAVE_NUMBA:
        raise SystemExit("numba is not installed; nothing to compare")

    rng = np.random.default_rng(0)
    print(f"{'kernel':<20}{'d':>4}{'numpy us':>12}{'numba us':>12}{'speedup':>9}")
    for d in args.dims:
        for name, call_args in _inputs(d, rng).items():
            ref = getattr(_accel, f"{name}_numpy")
            fast = getattr(_accel, f"{name}_numba")
            np.testing.assert_allclose(fast(*call_args), ref(*call_args), atol=1e-10)
            t_ref = timeit.timeit(lambda: ref(*call_args), number=args.repeat) / args.repeat
            t_fast = timeit.timeit(lambda: fast(*call_args), number=args.repeat) / args.repeat
            print(f"{name:<20}{d:>4}{t_ref * 1e6:>12.1f}{t_fast * 1e6:>12.1f}{t_ref / t_fast:>9.2f}")


if __name__ == "__main__":
    main()
