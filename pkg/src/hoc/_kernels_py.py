"""Pure numpy tensor kernels.

Same contracts as the compiled twin ``_kernels.pyx``; ``hoc.kernels`` picks
one of the two at import time. Tensors arrive as dense C-contiguous float64
arrays of shape (n,)*d, points as (m, n) batches.
"""

import numpy as np

BACKEND = "numpy"


def _fold(tensor, points, keep):
    """Contract all but ``keep`` slots of ``tensor`` with each row of ``points``."""
    m, n = points.shape
    out = points @ tensor.reshape(n, -1)
    for _ in range(tensor.ndim - 1 - keep):
        out = np.matmul(points[:, None, :], out.reshape(m, n, -1))[:, 0, :]
    return out


def diagonal_values(tensor, points):
    """T[v, ..., v] for each row v of ``points``. Returns shape (m,)."""
    if tensor.ndim == 1:
        return points @ tensor
    return _fold(tensor, points, 0)[:, 0]


def diagonal_apply(tensor, points):
    """Gradient map T[v, ..., v, .] for each row v. Returns shape (m, n)."""
    m, n = points.shape
    if tensor.ndim == 1:
        return np.broadcast_to(tensor, (m, n)).copy()
    return _fold(tensor, points, 1)


def power_opnorm(tensor, starts, shift, tol, max_iter):
    """Largest fixed-point value of the shifted power map x -> T[x..x,.] + shift*x.

    All restart rows of ``starts`` run in lockstep; convergence is measured on
    the form value T[x,...,x]. The caller is responsible for the +/- sweep.
    """
    x = starts / np.linalg.norm(starts, axis=1, keepdims=True)
    w = diagonal_apply(tensor, x)
    vals = np.einsum("ij,ij->i", x, w)
    for _ in range(max_iter):
        y = w + shift * x
        norms = np.linalg.norm(y, axis=1, keepdims=True)
        np.clip(norms, 1e-300, None, out=norms)
        x = y / norms
        w = diagonal_apply(tensor, x)
        new_vals = np.einsum("ij,ij->i", x, w)
        done = np.all(np.abs(new_vals - vals) <= tol)
        vals = new_vals
        if done:
            break
    return float(np.max(vals))
