"""Kernel backend selection.

Prefers the compiled extension; set ``HOC_PURE_PYTHON=1`` to force the numpy
fallback. Tensors of order 5 or higher always take the numpy path (the
compiled kernels specialize orders 1 through 4).
"""

import os

import numpy as np

from . import _kernels_py

if os.environ.get("HOC_PURE_PYTHON", "").strip() not in ("", "0"):
    _impl = _kernels_py
else:
    try:
        from . import _kernels as _impl
    except ImportError:
        _impl = _kernels_py

BACKEND = _impl.BACKEND


def _coerce(tensor, points):
    t = np.ascontiguousarray(tensor, dtype=np.float64)
    p = np.ascontiguousarray(points, dtype=np.float64)
    if p.ndim != 2:
        raise ValueError("points must be a 2-D batch, got shape %r" % (p.shape,))
    if t.ndim < 1 or any(s != p.shape[1] for s in t.shape):
        raise ValueError("tensor shape %r does not match point dimension %d"
                         % (t.shape, p.shape[1]))
    return t, p


def _module_for(tensor):
    return _kernels_py if tensor.ndim > 4 else _impl


def diagonal_values(tensor, points):
    t, p = _coerce(tensor, points)
    return _module_for(t).diagonal_values(t, p)


def diagonal_apply(tensor, points):
    t, p = _coerce(tensor, points)
    return _module_for(t).diagonal_apply(t, p)


def power_opnorm(tensor, starts, shift, tol=1e-10, max_iter=10000):
    t, s = _coerce(tensor, starts)
    return _module_for(t).power_opnorm(t, s, float(shift), float(tol), int(max_iter))
