"""Pure numpy versions of the compiled kernels (same signatures and tie rules)."""

import numpy as np

_CHUNK_ELEMENTS = 1 << 22


def max_affine(A, c, x):
    if A.shape[0] == 0:
        raise ValueError("empty affine family")
    if x.shape[0] != A.shape[1] or c.shape[0] != A.shape[0]:
        raise ValueError("dimension mismatch")
    vals = A @ x - c
    i = int(np.argmax(vals))
    return float(vals[i]), i


def max_affine_batch(X, A, c):
    k = A.shape[0]
    if k == 0:
        raise ValueError("empty affine family")
    if X.shape[1] != A.shape[1] or c.shape[0] != k:
        raise ValueError("dimension mismatch")
    m = X.shape[0]
    values = np.empty(m)
    index = np.empty(m, dtype=np.intp)
    # keep the (rows x k) intermediate bounded
    step = max(1, _CHUNK_ELEMENTS // k)
    for start in range(0, m, step):
        block = X[start:start + step] @ A.T - c
        idx = np.argmax(block, axis=1)
        index[start:start + step] = idx
        values[start:start + step] = block[np.arange(block.shape[0]), idx]
    return values, index


def project_simplex(v, scale=1.0):
    if v.shape[0] == 0:
        raise ValueError("empty vector")
    u = np.sort(v)[::-1]
    css = np.cumsum(u) - scale
    ind = np.arange(1, v.shape[0] + 1)
    cond = u - css / ind > 0
    rho = ind[cond][-1]
    theta = css[cond][-1] / rho
    return np.maximum(v - theta, 0.0)
