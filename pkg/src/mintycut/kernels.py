"""Kernel backend selection.

The compiled extension is used when it imports; setting the environment
variable ``MINTYCUT_PURE_PYTHON=1`` forces the numpy implementation.  Even
with the extension loaded, large inputs go to numpy: its BLAS products and
sort beat the plain compiled loops past the sizes below (measured with
``benchmarks/bench_kernels.py``).
"""

import os

import numpy as np

from . import _kernels_py

BACKEND = "python"
_impl = _kernels_py

# largest sizes at which the compiled loops still win
COMPILED_MAX_WORK = 8000         # k * n for a single point
COMPILED_MAX_ROW_WORK = 500      # k * n per row for batches
COMPILED_MAX_SIMPLEX = 300       # vector length

if not os.environ.get("MINTYCUT_PURE_PYTHON"):
    try:
        from . import _kernels as _impl  # type: ignore[no-redef]
        BACKEND = "cython"
    except ImportError:
        pass


def _f64(a, ndim):
    a = np.ascontiguousarray(a, dtype=np.float64)
    if a.ndim != ndim:
        raise ValueError(f"expected a {ndim}-d array, got shape {a.shape}")
    return a


def max_affine(A, c, x):
    """Value and smallest maximizing index of ``A @ x - c``."""
    A = _f64(A, 2)
    impl = _impl if A.size <= COMPILED_MAX_WORK else _kernels_py
    return impl.max_affine(A, _f64(c, 1), _f64(x, 1))


def max_affine_batch(X, A, c):
    """Row-wise :func:`max_affine` over the rows of ``X``."""
    A = _f64(A, 2)
    impl = _impl if A.size <= COMPILED_MAX_ROW_WORK else _kernels_py
    return impl.max_affine_batch(_f64(X, 2), A, _f64(c, 1))


def project_simplex(v, scale=1.0):
    v = _f64(v, 1)
    impl = _impl if v.shape[0] <= COMPILED_MAX_SIMPLEX else _kernels_py
    return impl.project_simplex(v, float(scale))
