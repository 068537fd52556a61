"""Parallel trajectory ensembles, aggregation, and oracle comparison.

Trajectory i of an ensemble uses the derived seed mix(base_seed, i) and is
fully independent of the others, so trajectories can run on any number of
workers; aggregation happens after collection, in trajectory-index order,
making ensemble results bitwise identical for every worker count.
"""
from __future__ import annotations

import concurrent.futures
from dataclasses import dataclass

import numpy as np

from .errors import AllTrajectoriesAborted, GridMismatch, PositivityViolation
from .sde import SdeConfig, Trajectory, run_trajectory


def observable_names(n: int) -> list[str]:
    """Populations then independent coherence parts: pop_i (1-based), then
    coh_i_j_re / coh_i_j_im for i < j, row-major."""
    names = [f"pop_{i}" for i in range(1, n + 1)]
    for i in range(1, n + 1):
        for j in range(i + 1, n + 1):
            names += [f"coh_{i}_{j}_re", f"coh_{i}_{j}_im"]
    return names


def observables_from_states(states: np.ndarray) -> np.ndarray:
    """Per-time observable vector from pure states (rows normalized)."""
    k, n = states.shape
    cols = [np.abs(states[:, i]) ** 2 for i in range(n)]
    for i in range(n):
        for j in range(i + 1, n):
            rho_ij = states[:, i] * states[:, j].conj()
            cols += [rho_ij.real, rho_ij.imag]
    return np.stack(cols, axis=1)


def observables_from_rhos(rhos: np.ndarray) -> np.ndarray:
    k, n, _ = rhos.shape
    cols = [rhos[:, i, i].real for i in range(n)]
    for i in range(n):
        for j in range(i + 1, n):
            cols += [rhos[:, i, j].real, rhos[:, i, j].imag]
    return np.stack(cols, axis=1)


@dataclass(frozen=True)
class EnsembleStats:
    times: np.ndarray
    mean_rho: np.ndarray  # (k, n, n)
    mean_obs: np.ndarray  # (k, n_obs)
    stderr: np.ndarray  # (k, n_obs); NaN when n_traj == 1
    n_traj: int
    n_aborted: int

    @property
    def dim(self) -> int:
        return self.mean_rho.shape[1]


def _one_trajectory(args) -> Trajectory:
    gen, psi0, cfg, stride, index = args
    return run_trajectory(gen, psi0, cfg, sample_stride=stride, traj_index=index)


def run_ensemble(
    gen,
    psi0: np.ndarray,
    cfg: SdeConfig,
    n_traj: int,
    workers: int = 1,
    sample_stride: int = 10,
    positivity_checked: bool = False,
) -> EnsembleStats:
    """Run `n_traj` trajectories and aggregate projector statistics.

    Aborted trajectories are excluded and counted; they raise when
    `positivity_checked` is set (an abort after a verified-positive
    generator indicates a bug, not physics) or when nothing completes.
    """
    if n_traj < 1:
        raise ValueError("n_traj >= 1 required")
    tasks = [(gen, psi0, cfg, sample_stride, i) for i in range(n_traj)]
    if workers <= 1:
        results = [_one_trajectory(t) for t in tasks]
    else:
        with concurrent.futures.ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_one_trajectory, tasks, chunksize=max(1, n_traj // (4 * workers))))

    n_samples = cfg.n_steps // sample_stride + 1
    times = np.arange(n_samples) * (sample_stride * cfg.dt)
    n = len(psi0)
    n_obs = n * n
    sum_rho = np.zeros((n_samples, n, n), dtype=complex)
    sum_obs = np.zeros((n_samples, n_obs))
    sum_obs2 = np.zeros((n_samples, n_obs))
    n_aborted = 0
    n_done = 0
    first_abort: Trajectory | None = None
    for traj in results:  # fixed trajectory-index order
        if traj.aborted:
            n_aborted += 1
            if first_abort is None:
                first_abort = traj
            continue
        sum_rho += np.einsum("ta,tb->tab", traj.states, traj.states.conj())
        obs = observables_from_states(traj.states)
        sum_obs += obs
        sum_obs2 += obs * obs
        n_done += 1

    if n_done == 0:
        raise AllTrajectoriesAborted(f"all {n_traj} trajectories aborted")
    if n_aborted and positivity_checked:
        raise PositivityViolation(
            min_eigenvalue=first_abort.abort_min_eigenvalue,
            psi=first_abort.abort_state,
            time=first_abort.aborted_at,
        )

    mean_rho = sum_rho / n_done
    mean_obs = sum_obs / n_done
    if n_done > 1:
        var = (sum_obs2 - n_done * mean_obs * mean_obs) / (n_done - 1)
        stderr = np.sqrt(np.maximum(var, 0.0) / n_done)
    else:
        stderr = np.full_like(mean_obs, np.nan)
    return EnsembleStats(
        times=times,
        mean_rho=mean_rho,
        mean_obs=mean_obs,
        stderr=stderr,
        n_traj=n_traj,
        n_aborted=n_aborted,
    )


@dataclass(frozen=True)
class ComparisonReport:
    observables: list[str]
    z_scores: np.ndarray  # (k, n_obs)
    max_z: float
    frac_within_3: float

    def summary(self) -> str:
        return (
            f"max_z: {self.max_z:.6g}\n"
            f"frac_within_3: {self.frac_within_3:.6g}\n"
            f"pass_z3_99pct: {self.frac_within_3 >= 0.99}"
        )


def compare_to_oracle(
    stats: EnsembleStats,
    oracle_times: np.ndarray,
    oracle_rhos: np.ndarray,
    observables: list[int] | None = None,
) -> ComparisonReport:
    """Per-observable, per-time z-scores |mean - oracle| / stderr.

    `observables` selects observable column indices (default: all). Points
    with zero stderr score 0 when the deviation is also (numerically) zero,
    inf otherwise.
    """
    if len(oracle_times) != len(stats.times) or np.abs(
        np.asarray(oracle_times) - stats.times
    ).max() > 1e-9 * (1.0 + stats.times.max()):
        raise GridMismatch("oracle and ensemble time grids differ")
    oracle_obs = observables_from_rhos(np.asarray(oracle_rhos))
    names = observable_names(stats.dim)
    cols = list(range(len(names))) if observables is None else list(observables)
    dev = np.abs(stats.mean_obs[:, cols] - oracle_obs[:, cols])
    err = stats.stderr[:, cols]
    with np.errstate(divide="ignore", invalid="ignore"):
        z = np.where(err > 0, dev / err, np.where(dev <= 1e-12, 0.0, np.inf))
    return ComparisonReport(
        observables=[names[c] for c in cols],
        z_scores=z,
        max_z=float(z.max()),
        frac_within_3=float(np.mean(z <= 3.0)),
    )


def write_ensemble_csv(path: str, stats: EnsembleStats, time_unit_scale: float = 1.0) -> None:
    """Columns: t, then <name>_mean, <name>_stderr per observable, in
    observable_names order."""
    names = observable_names(stats.dim)
    cols = ["t"]
    for name in names:
        cols += [f"{name}_mean", f"{name}_stderr"]
    with open(path, "w") as fh:
        fh.write(",".join(cols) + "\n")
        for k, t in enumerate(stats.times):
            vals = [f"{t * time_unit_scale:.17g}"]
            for c in range(len(names)):
                vals += [f"{stats.mean_obs[k, c]:.17g}", f"{stats.stderr[k, c]:.17g}"]
            fh.write(",".join(vals) + "\n")
