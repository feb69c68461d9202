"""Kernel backend selection.

At import time the compiled Cython core is preferred; if the extension was
not built the numpy fallback is used. Set ``VWAAKELM_KERNEL_BACKEND`` to
``compiled`` or ``numpy`` to force one explicitly (``compiled`` raises if
the extension is unavailable).

Both backends implement the same two functions on pre-scaled row matrices:

* ``rbf_kernel_symmetric(X, gamma)`` -- exactly symmetric, unit diagonal
* ``rbf_kernel_cross(A, B, gamma)``

Each backend is individually deterministic; the two may differ by normal
floating-point roundoff (≈1e-13) because the fallback uses the Gram-matrix
expansion of the squared distance.
"""

import os

import numpy as np

from . import _kernels_py

try:
    from . import _kernels_cy
except ImportError:
    _kernels_cy = None

_requested = os.environ.get("VWAAKELM_KERNEL_BACKEND", "").strip().lower()
if _requested == "numpy":
    _impl = _kernels_py
elif _requested == "compiled":
    if _kernels_cy is None:
        raise ImportError(
            "VWAAKELM_KERNEL_BACKEND=compiled but the compiled kernel core is "
            "not available; reinstall with a C compiler or unset the variable"
        )
    _impl = _kernels_cy
elif _requested:
    raise ImportError(
        f"unknown VWAAKELM_KERNEL_BACKEND {_requested!r}; use 'compiled' or 'numpy'"
    )
else:
    _impl = _kernels_cy if _kernels_cy is not None else _kernels_py


def backend_name() -> str:
    """Name of the active backend: 'compiled' or 'numpy'."""
    return "compiled" if _impl is _kernels_cy else "numpy"


def compiled_available() -> bool:
    return _kernels_cy is not None


def _as_matrix(X) -> np.ndarray:
    X = np.ascontiguousarray(X, dtype=np.float64)
    if X.ndim != 2:
        raise ValueError(f"expected a 2-D row matrix, got ndim={X.ndim}")
    return X


def rbf_kernel_symmetric(X, gamma: float) -> np.ndarray:
    X = _as_matrix(X)
    return _impl.rbf_kernel_symmetric(X, float(gamma))


def rbf_kernel_cross(A, B, gamma: float) -> np.ndarray:
    A = _as_matrix(A)
    B = _as_matrix(B)
    if A.shape[1] != B.shape[1]:
        raise ValueError(
            f"row dimension mismatch: {A.shape[1]} vs {B.shape[1]} columns"
        )
    return _impl.rbf_kernel_cross(A, B, float(gamma))
