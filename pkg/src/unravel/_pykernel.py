"""Pure-numpy trajectory stepping loop (fallback backend).

The compiled extension `unravel._kernel` implements the same loop; this
module is the reference implementation and the backend of last resort.
Both share the contract of `run_steps`.
"""
from __future__ import annotations

import numpy as np
import scipy.linalg

from .linalg import fix_phase

BACKEND_NAME = "python"


def step_once(
    A0: np.ndarray,
    Ls: np.ndarray,
    c: np.ndarray,
    psi: np.ndarray,
    dt: float,
    dxi: np.ndarray,
    gtro_mode: bool,
    positivity_tol: float = 1e-10,
):
    """One normalized exponential-Euler step.

    Returns (psi_next, None) or (None, min_eigenvalue) when the rate
    operator is negative beyond the abort threshold (positivity violation);
    negative eigenvalues above it are clamped to zero. In GTRO mode the
    increments are consumed in descending-eigenvalue channel order; surplus
    increments are discarded.
    """
    n = len(psi)
    if len(c):
        Lpsi = Ls @ psi
        ell = np.einsum("a,ka->k", psi.conj(), Lpsi)
        A = (
            A0
            + np.einsum("k,kab->ab", c * ell.conj(), Ls)
            - 0.5 * float(c @ (np.abs(ell) ** 2)) * np.eye(n)
        )
    else:
        A = A0
    M = A * dt
    if gtro_mode and len(c):
        v = Lpsi - ell[:, None] * psi
        W = np.einsum("k,ka,kb->ab", c, v, v.conj())
        w, V = np.linalg.eigh(W)
        scale = max(1.0, float(np.linalg.norm(W)))
        if w[0] < -positivity_tol * scale:
            return None, float(w[0])
        eps = 1e-10 * scale  # numerical-zero floor for retained channels
        kth = 0
        for k in range(n - 1, -1, -1):  # descending eigenvalues
            if w[k] <= eps:
                break
            phi = fix_phase(V[:, k])
            M += (np.sqrt(w[k]) * dxi[kth]) * np.outer(phi, psi.conj())
            kth += 1
    elif len(c):
        for j in range(len(c)):
            M += (np.sqrt(c[j]) * dxi[j]) * (Ls[j] - ell[j] * np.eye(n))
    psi_next = scipy.linalg.expm(M) @ psi
    return psi_next / np.linalg.norm(psi_next), None


def run_steps(
    H: np.ndarray,
    Ls: np.ndarray,
    c: np.ndarray,
    psi0: np.ndarray,
    dt: float,
    n_steps: int,
    stride: int,
    gtro_mode: bool,
    dxi: np.ndarray,
    positivity_tol: float = 1e-10,
):
    """Iterate `step_once` over a uniform grid, sampling every `stride` steps
    (step 0 included).

    Returns (states, abort_step, abort_min_eig, abort_state); abort_step is
    -1 for a completed trajectory, otherwise the step index whose state
    produced the violation.
    """
    n = len(psi0)
    A0 = -1j * H
    for j in range(len(c)):
        A0 = A0 - 0.5 * c[j] * (Ls[j].conj().T @ Ls[j])
    n_samples = n_steps // stride + 1
    states = np.zeros((n_samples, n), dtype=complex)
    psi = psi0.astype(complex)
    for i in range(n_steps + 1):
        if i % stride == 0:
            states[i // stride] = psi
        if i == n_steps:
            break
        psi_next, bad = step_once(A0, Ls, c, psi, dt, dxi[i], gtro_mode, positivity_tol)
        if psi_next is None:
            return states[: i // stride + 1], i, bad, psi
        psi = psi_next
    return states, -1, 0.0, None
