"""Deterministic master-equation integration (validation oracle).

Fixed-step classical RK4 on the matrix ODE d(rho)/dt = G[rho], with
re-hermitization each step. Positivity of rho is reported (minimum
eigenvalue per sample) but never enforced: observing its loss is a
feature, not an error.
"""
from __future__ import annotations

import numpy as np

from .errors import DimensionMismatch
from .generators import (
    DiagonalGenerator,
    NonDiagonalGenerator,
    RedfieldTensor,
    TimeDependentGenerator,
)
from .linalg import hermitize
from .models import SIGMA_X, SIGMA_Y, SIGMA_Z


def check_density(rho: np.ndarray, tol: float = 1e-10) -> np.ndarray:
    rho = np.asarray(rho, dtype=complex)
    if abs(np.trace(rho) - 1.0) > tol:
        raise DimensionMismatch(f"trace {np.trace(rho)} != 1")
    if np.abs(rho - rho.conj().T).max() > tol * (1.0 + np.linalg.norm(rho)):
        raise DimensionMismatch("density matrix is not Hermitian")
    return rho


def _rhs(gen):
    """Return a function (t, rho) -> G_t[rho] for any generator form."""
    if isinstance(gen, TimeDependentGenerator):
        return lambda t, rho: gen.sample(t).apply(rho)
    if isinstance(gen, (DiagonalGenerator, NonDiagonalGenerator, RedfieldTensor)):
        return lambda t, rho: gen.apply(rho)
    raise DimensionMismatch(f"unsupported generator type {type(gen).__name__}")


def solve_me(
    gen,
    rho0: np.ndarray,
    dt: float,
    t_final: float,
    sample_stride: int = 1,
) -> tuple[np.ndarray, np.ndarray]:
    """RK4-integrate the master equation; returns (times, rhos) sampled every
    `sample_stride` steps (step 0 included)."""
    rho = check_density(rho0)
    n = rho.shape[0]
    rhs = _rhs(gen)
    n_steps = int(round(t_final / dt))
    n_samples = n_steps // sample_stride + 1
    rhos = np.zeros((n_samples, n, n), dtype=complex)
    for i in range(n_steps + 1):
        if i % sample_stride == 0:
            rhos[i // sample_stride] = rho
        if i == n_steps:
            break
        t = i * dt
        k1 = rhs(t, rho)
        k2 = rhs(t + dt / 2, rho + (dt / 2) * k1)
        k3 = rhs(t + dt / 2, rho + (dt / 2) * k2)
        k4 = rhs(t + dt, rho + dt * k3)
        rho = hermitize(rho + (dt / 6) * (k1 + 2 * k2 + 2 * k3 + k4))
    times = np.arange(n_samples) * (sample_stride * dt)
    return times, rhos


def qubit_closed_form(rho0: np.ndarray, t: float) -> np.ndarray:
    """Exact solution of the default qubit model: Bloch vector
    (x, y, z) -> (x, y, z e^{-4t})."""
    rho0 = check_density(rho0)
    if rho0.shape != (2, 2):
        raise DimensionMismatch("closed form is for the qubit model (n=2)")
    x = float(np.real(np.trace(SIGMA_X @ rho0)))
    y = float(np.real(np.trace(SIGMA_Y @ rho0)))
    z = float(np.real(np.trace(SIGMA_Z @ rho0)))
    return 0.5 * (
        np.eye(2) + x * SIGMA_X + y * SIGMA_Y + z * np.exp(-4.0 * t) * SIGMA_Z
    )


def min_eigenvalues(rhos: np.ndarray) -> np.ndarray:
    return np.array([np.linalg.eigvalsh(r)[0] for r in rhos])


def write_me_csv(path: str, times: np.ndarray, rhos: np.ndarray,
                 time_unit_scale: float = 1.0) -> None:
    """Columns: t, re/im of all n^2 entries (row-major, 1-based labels),
    min_eigenvalue."""
    n = rhos.shape[1]
    cols = ["t"]
    for i in range(1, n + 1):
        for j in range(1, n + 1):
            cols += [f"rho_{i}_{j}_re", f"rho_{i}_{j}_im"]
    cols.append("min_eigenvalue")
    mins = min_eigenvalues(rhos)
    with open(path, "w") as fh:
        fh.write(",".join(cols) + "\n")
        for k, t in enumerate(times):
            vals = [f"{t * time_unit_scale:.17g}"]
            for i in range(n):
                for j in range(n):
                    vals += [f"{rhos[k, i, j].real:.17g}", f"{rhos[k, i, j].imag:.17g}"]
            vals.append(f"{mins[k]:.17g}")
            fh.write(",".join(vals) + "\n")
