"""Pairing kernels: compiled extension with a pure-python fallback.

The chain-against-form pairing loop dominates everything downstream (norm
sandwiches evaluate it for hundreds of candidate atoms, the experiment
suites for thousands of terms), so it is available both as a Cython
extension and as a vectorized numpy implementation.  Selection happens once
at import: the extension if it built, numpy otherwise, with the environment
variable DIRACHAINS_PURE forcing the fallback for testing/benchmarks.

Both backends share one contract:

* pair_terms(points, coeffs, dir_offsets, dirs_flat, amp, xi, phase, icol)
  -> per-term pairing values, shape (T,)
* pair_atoms(points, coeffs, dir_offsets, dirs_flat, xi_cand, icol_cand)
  -> (sin_resp, cos_resp), each shape (M,): the chain paired against unit
  sin/cos atoms for every candidate (frequency, covector) row

Backends may round differently (summation order), so cross-backend
agreement is to ~1e-12 relative, not bitwise.  Within one backend results
are deterministic.
"""

import os

import numpy as np

__all__ = ["pair_terms", "pair_atoms", "backend_name", "tree_sum"]


def _select():
    if not os.environ.get("DIRACHAINS_PURE"):
        try:
            from . import _pairing_cy as mod

            return mod, "cython"
        except ImportError:
            pass
    from . import _pairing_py as mod

    return mod, "python"


_mod, _name = _select()

pair_terms = _mod.pair_terms
pair_atoms = _mod.pair_atoms


def backend_name() -> str:
    """Which pairing backend import-time selection picked."""
    return _name


def tree_sum(values) -> float:
    """Pairwise (tree) reduction of a float array.

    Fixed association order regardless of how the values were produced, so
    reductions are reproducible and insensitive to chunked/parallel term
    evaluation upstream.
    """
    arr = np.ascontiguousarray(values, dtype=np.float64).reshape(-1).copy()
    n = arr.size
    if n == 0:
        return 0.0
    while n > 1:
        half = n // 2
        arr[:half] = arr[0 : 2 * half : 2] + arr[1 : 2 * half : 2]
        if n % 2:
            arr[half] = arr[n - 1]
            n = half + 1
        else:
            n = half
    return float(arr[0])
