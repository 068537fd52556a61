"""Select the trajectory stepping backend at import time.

The compiled Cython kernel is used when available; the numpy fallback
otherwise. Set UNRAVEL_FORCE_PY=1 to force the fallback (useful for
benchmark comparisons and debugging).
"""
from __future__ import annotations

import os

import numpy as np

from . import _pykernel

if os.environ.get("UNRAVEL_FORCE_PY"):
    _impl = None
else:
    try:
        from . import _kernel as _impl
    except ImportError:
        _impl = None

BACKEND = "compiled" if _impl is not None else "python"


def backend_name() -> str:
    return BACKEND


def run_steps(H, Ls, c, psi0, dt, n_steps, stride, gtro_mode, dxi, positivity_tol=1e-10):
    """Dispatch to the active backend; see _pykernel.run_steps for the
    contract."""
    H = np.ascontiguousarray(H, dtype=complex)
    Ls = np.ascontiguousarray(Ls, dtype=complex).reshape(len(c), len(psi0), len(psi0))
    c = np.ascontiguousarray(c, dtype=float)
    psi0 = np.ascontiguousarray(psi0, dtype=complex)
    dxi = np.ascontiguousarray(dxi, dtype=complex)
    if _impl is None:
        return _pykernel.run_steps(H, Ls, c, psi0, dt, n_steps, stride, gtro_mode, dxi,
                                   positivity_tol)
    return _impl.run_steps(H, Ls, c, psi0, float(dt), int(n_steps), int(stride),
                           bool(gtro_mode), dxi, float(positivity_tol))
