"""Drift and noise operators of the diffusive unraveling, single steps, and
full stochastic trajectories.

Two modes:

* ``gtro``: noise channels from the spectral decomposition of the rate
  operator at the current state; works for every positive semigroup,
  including ones with negative rates.
* ``standard_qsd``: the textbook diffusive unraveling with one channel per
  Lindblad operator; only valid when every rate is nonnegative.

Each step evolves ``psi -> normalize(expm(A dt + sum_k B_k dxi_k) psi)``
(the Hamiltonian enters exactly once, inside the drift A).
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _backend
from ._pykernel import step_once
from .errors import DimensionMismatch, NegativeRate, PositivityViolation, UnnormalizedState
from .generators import DiagonalGenerator, TimeDependentGenerator
from .positivity import build_gtro, decompose_gtro

MODES = ("gtro", "standard_qsd")


@dataclass(frozen=True)
class SdeConfig:
    dt: float
    t_final: float
    mode: str = "gtro"
    seed: int = 0
    positivity_tol: float = 1e-10

    def __post_init__(self):
        if self.dt <= 0 or self.t_final <= 0 or self.dt > self.t_final:
            raise DimensionMismatch(f"need 0 < dt <= t_final, got dt={self.dt}, t_final={self.t_final}")
        if self.mode not in MODES:
            raise DimensionMismatch(f"mode must be one of {MODES}, got {self.mode!r}")

    @property
    def n_steps(self) -> int:
        return int(round(self.t_final / self.dt))


@dataclass(frozen=True)
class WienerIncrementBlock:
    """Complex Ito increments for one step: dxi = sqrt(dt/2)(g1 + i g2) with
    independent standard normals, so E[dxi_j dxi_k*] = delta_jk dt and
    E[dxi_j dxi_k] = 0."""

    dt: float
    increments: np.ndarray


@dataclass(frozen=True)
class Trajectory:
    times: np.ndarray
    states: np.ndarray  # (n_samples, n), each row normalized
    rng_seed: int
    aborted_at: float | None = None
    abort_min_eigenvalue: float | None = None
    abort_state: np.ndarray | None = None

    @property
    def aborted(self) -> bool:
        return self.aborted_at is not None


def mix_seed(base_seed: int, traj_index: int) -> int:
    """Deterministic 64-bit per-trajectory seed."""
    ss = np.random.SeedSequence((int(base_seed), int(traj_index)))
    return int(ss.generate_state(1, np.uint64)[0])


def wiener_increments(
    rng: np.random.Generator, dt: float, m: int, n_steps: int = 1
) -> np.ndarray:
    """(n_steps, m) complex Ito increments."""
    g = rng.standard_normal((n_steps, m, 2))
    return np.sqrt(dt / 2) * (g[..., 0] + 1j * g[..., 1])


def _require_normalized(psi: np.ndarray) -> np.ndarray:
    psi = np.asarray(psi, dtype=complex)
    if abs(np.linalg.norm(psi) - 1.0) > 1e-10:
        raise UnnormalizedState("state is not normalized")
    return psi


def drift_operator(gen: DiagonalGenerator, psi: np.ndarray) -> np.ndarray:
    """A_psi = -iH - (1/2) sum_j c_j (L_j^dag L_j - 2 l_j^* L_j + |l_j|^2),
    satisfying A P + P A^dag = G[P] - W_psi."""
    psi = _require_normalized(psi)
    if psi.shape != (gen.dim,):
        raise DimensionMismatch(f"state shape {psi.shape} != ({gen.dim},)")
    n = gen.dim
    A = -1j * gen.hamiltonian.astype(complex)
    for c, L in zip(gen.rates, gen.lindblad_ops):
        ell = psi.conj() @ (L @ psi)
        A -= 0.5 * c * (L.conj().T @ L - 2 * np.conj(ell) * L + abs(ell) ** 2 * np.eye(n))
    return A


def noise_operators_gtro(
    gen: DiagonalGenerator, psi: np.ndarray, positivity_tol: float = 1e-10
) -> np.ndarray:
    """B_k = sqrt(lambda_k) |phi_k><psi| from the rate-operator spectrum;
    satisfies sum_k B_k P B_k^dag = W_psi and <psi|B_k|psi> = 0."""
    psi = _require_normalized(psi)
    W = build_gtro(gen, psi)
    dec = decompose_gtro(W, psi, positivity_tol)
    return np.sqrt(dec.eigenvalues)[:, None, None] * dec.jump_maps()


def noise_operators_standard(gen: DiagonalGenerator, psi: np.ndarray) -> np.ndarray:
    """B_j = sqrt(c_j)(L_j - l_j); requires every rate nonnegative (with a
    negative rate this family unravels the wrong master equation)."""
    if len(gen.rates) and gen.rates.min() < 0:
        raise NegativeRate(
            f"standard unraveling needs c_j >= 0; min rate = {gen.rates.min():g}"
        )
    psi = _require_normalized(psi)
    n = gen.dim
    out = np.zeros((len(gen.rates), n, n), dtype=complex)
    for j, (c, L) in enumerate(zip(gen.rates, gen.lindblad_ops)):
        ell = psi.conj() @ (L @ psi)
        out[j] = np.sqrt(c) * (L - ell * np.eye(n))
    return out


def sde_step(
    gen: DiagonalGenerator,
    psi: np.ndarray,
    dt: float,
    noise: WienerIncrementBlock,
    mode: str = "gtro",
    positivity_tol: float = 1e-10,
) -> np.ndarray:
    """One step of the unraveling; returns the next normalized state."""
    psi = _require_normalized(psi)
    if mode not in MODES:
        raise DimensionMismatch(f"mode must be one of {MODES}")
    gtro_mode = mode == "gtro"
    if not gtro_mode and len(gen.rates) and gen.rates.min() < 0:
        raise NegativeRate("standard unraveling needs c_j >= 0")
    m_need = (gen.dim - 1) if gtro_mode else gen.n_channels
    if len(noise.increments) < m_need:
        raise DimensionMismatch(
            f"{len(noise.increments)} increments < {m_need} required channels"
        )
    A0 = -1j * gen.hamiltonian.astype(complex)
    for j in range(gen.n_channels):
        A0 = A0 - 0.5 * gen.rates[j] * (gen.lindblad_ops[j].conj().T @ gen.lindblad_ops[j])
    psi_next, bad = step_once(
        A0, gen.lindblad_ops, gen.rates, psi, dt, np.asarray(noise.increments),
        gtro_mode, positivity_tol,
    )
    if psi_next is None:
        raise PositivityViolation(min_eigenvalue=bad, psi=psi)
    return psi_next


def _noise_width(gen, mode: str, n: int) -> int:
    if mode == "gtro":
        return max(n - 1, 1)
    return max(gen.n_channels, 1)


def run_trajectory(
    gen: DiagonalGenerator | TimeDependentGenerator,
    psi0: np.ndarray,
    cfg: SdeConfig,
    sample_stride: int = 1,
    traj_index: int = 0,
) -> Trajectory:
    """Integrate one trajectory on the uniform grid fixed by `cfg`.

    Deterministic given (cfg.seed, traj_index). Time-dependent generators
    are sampled at the left endpoint of each step. On a positivity
    violation the trajectory stops and records the abort.
    """
    psi0 = _require_normalized(psi0)
    n = len(psi0)
    n_steps = cfg.n_steps
    gtro_mode = cfg.mode == "gtro"
    seed = mix_seed(cfg.seed, traj_index)
    rng = np.random.default_rng(seed)

    time_dependent = isinstance(gen, TimeDependentGenerator)
    if not time_dependent and psi0.shape != (gen.dim,):
        raise DimensionMismatch(f"state dim {len(psi0)} != generator dim {gen.dim}")
    if not time_dependent and not gtro_mode and len(gen.rates) and gen.rates.min() < 0:
        raise NegativeRate("standard unraveling needs c_j >= 0")

    if time_dependent:
        m_noise = _noise_width(gen.sample(0.0), cfg.mode, n)
    else:
        m_noise = _noise_width(gen, cfg.mode, n)
    dxi = wiener_increments(rng, cfg.dt, m_noise, n_steps)

    if time_dependent:
        states, abort_step, abort_min, abort_state = _run_steps_td(
            gen, psi0, cfg.dt, n_steps, sample_stride, gtro_mode, dxi, cfg.positivity_tol
        )
    else:
        states, abort_step, abort_min, abort_state = _backend.run_steps(
            gen.hamiltonian,
            gen.lindblad_ops,
            gen.rates,
            psi0,
            cfg.dt,
            n_steps,
            sample_stride,
            gtro_mode,
            dxi,
            cfg.positivity_tol,
        )
    times = np.arange(len(states)) * (sample_stride * cfg.dt)
    if abort_step < 0:
        return Trajectory(times=times, states=states, rng_seed=seed)
    return Trajectory(
        times=times,
        states=states,
        rng_seed=seed,
        aborted_at=abort_step * cfg.dt,
        abort_min_eigenvalue=abort_min,
        abort_state=abort_state,
    )


def _run_steps_td(gen, psi0, dt, n_steps, stride, gtro_mode, dxi, positivity_tol=1e-10):
    """Generic loop for time-dependent generators (left-endpoint sampling)."""
    n = len(psi0)
    n_samples = n_steps // stride + 1
    states = np.zeros((n_samples, n), dtype=complex)
    psi = psi0
    eye = np.eye(n)
    for i in range(n_steps + 1):
        if i % stride == 0:
            states[i // stride] = psi
        if i == n_steps:
            break
        g = gen.sample(i * dt)
        if g.dim != n:
            raise DimensionMismatch("time-dependent generator changed dimension")
        if not gtro_mode and len(g.rates) and g.rates.min() < 0:
            raise NegativeRate(f"negative rate at t={i * dt:g} in standard mode")
        A0 = -1j * g.hamiltonian.astype(complex)
        for j in range(g.n_channels):
            A0 = A0 - 0.5 * g.rates[j] * (g.lindblad_ops[j].conj().T @ g.lindblad_ops[j])
        psi_next, bad = step_once(A0, g.lindblad_ops, g.rates, psi, dt, dxi[i],
                                  gtro_mode, positivity_tol)
        if psi_next is None:
            return states[: i // stride + 1], i, bad, psi
        psi = psi_next
    return states, -1, 0.0, None
