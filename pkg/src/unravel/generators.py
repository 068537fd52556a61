"""Master-equation generators in Redfield-tensor, non-diagonal and diagonal
Lindblad form, with conversions between them.

All coefficients are carried in cm^-1; time is in 1/cm^-1.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import (
    ConfigError,
    DimensionMismatch,
    NonHermiticityPreserving,
    NonTracePreserving,
)
from .linalg import (
    OperatorBasis,
    build_generalized_gellmann_basis,
    fix_phase,
    frobenius,
    hermitian_eigendecomposition,
    hermitize,
    is_hermitian,
)

TENSOR_TOL = 1e-10
ZERO_RATE_FACTOR = 1e-10


@dataclass(frozen=True)
class RedfieldTensor:
    """Coefficients R[i,j,k,l] of d(rho_ij)/dt = sum_kl R[i,j,k,l] rho_kl."""

    dim: int
    coefficients: np.ndarray  # shape (n, n, n, n), complex

    def __post_init__(self):
        R = np.asarray(self.coefficients, dtype=complex)
        n = self.dim
        if R.shape != (n, n, n, n):
            raise DimensionMismatch(f"tensor shape {R.shape} != {(n,) * 4}")
        scale = 1.0 + float(np.abs(R).max())
        herm = np.abs(R - np.conj(np.transpose(R, (1, 0, 3, 2)))).max()
        if herm > TENSOR_TOL * scale:
            raise NonHermiticityPreserving(f"R_ij;kl != conj(R_ji;lk), deviation {herm:.3g}")
        tr = np.abs(np.einsum("iikl->kl", R)).max()
        if tr > TENSOR_TOL * scale:
            raise NonTracePreserving(f"sum_i R_ii;kl != 0, deviation {tr:.3g}")
        object.__setattr__(self, "coefficients", R)

    def apply(self, rho: np.ndarray) -> np.ndarray:
        return np.einsum("ijkl,kl->ij", self.coefficients, rho)


@dataclass(frozen=True)
class DiagonalGenerator:
    """GKSL-form generator -i[H, .] + sum_j c_j (L_j . L_j^dag - {L_j^dag L_j, .}/2).

    Rates may be negative (positive-but-not-CP semigroups). `canonical` flags
    whether every L_j is traceless and Hilbert-Schmidt normalized; inputs
    that are not are accepted as-is.
    """

    dim: int
    hamiltonian: np.ndarray
    rates: np.ndarray  # shape (m,), real
    lindblad_ops: np.ndarray  # shape (m, n, n)
    canonical: bool = field(init=False)

    def __post_init__(self):
        n = self.dim
        H = np.asarray(self.hamiltonian, dtype=complex)
        c = np.asarray(self.rates, dtype=float)
        Ls = np.asarray(self.lindblad_ops, dtype=complex)
        if Ls.size == 0:
            Ls = Ls.reshape(0, n, n)
        if H.shape != (n, n):
            raise DimensionMismatch(f"hamiltonian shape {H.shape} != {(n, n)}")
        if Ls.shape != (len(c), n, n):
            raise DimensionMismatch(f"{len(c)} rates but lindblad_ops shape {Ls.shape}")
        if len(c) > n * n - 1:
            raise DimensionMismatch(f"{len(c)} channels exceeds n^2-1 = {n * n - 1}")
        if not is_hermitian(H):
            raise NonHermiticityPreserving("hamiltonian is not Hermitian")
        canonical = all(
            abs(np.trace(L)) <= 1e-10 and abs(np.linalg.norm(L) - 1.0) <= 1e-10 for L in Ls
        )
        object.__setattr__(self, "hamiltonian", H)
        object.__setattr__(self, "rates", c)
        object.__setattr__(self, "lindblad_ops", Ls)
        object.__setattr__(self, "canonical", canonical)

    @property
    def n_channels(self) -> int:
        return len(self.rates)

    def apply(self, rho: np.ndarray) -> np.ndarray:
        return apply_generator(self, rho)


@dataclass(frozen=True)
class NonDiagonalGenerator:
    """-i[H, .] + sum_ij d_ij (tau_i . tau_j - {tau_j tau_i, .}/2) over the
    traceless part of an orthonormal Hermitian basis."""

    dim: int
    hamiltonian: np.ndarray
    kossakowski_matrix: np.ndarray  # shape (n^2-1, n^2-1), Hermitian
    basis: OperatorBasis

    def __post_init__(self):
        n = self.dim
        d = np.asarray(self.kossakowski_matrix, dtype=complex)
        if d.shape != (n * n - 1, n * n - 1):
            raise DimensionMismatch(f"d matrix shape {d.shape} != {(n * n - 1,) * 2}")
        if np.abs(d - d.conj().T).max() > 1e-10 * (1.0 + frobenius(d)):
            raise NonHermiticityPreserving("Kossakowski matrix is not Hermitian")
        object.__setattr__(self, "kossakowski_matrix", d)
        object.__setattr__(self, "hamiltonian", np.asarray(self.hamiltonian, dtype=complex))

    def apply(self, rho: np.ndarray) -> np.ndarray:
        H, d = self.hamiltonian, self.kossakowski_matrix
        taus = self.basis.elements[1:]
        out = -1j * (H @ rho - rho @ H)
        out += np.einsum("ij,iab,bc,jcd->ad", d, taus, rho, taus)
        K = np.einsum("ij,jab,ibc->ac", d, taus, taus)  # sum_ij d_ij tau_j tau_i
        out -= 0.5 * (K @ rho + rho @ K)
        return out


@dataclass(frozen=True)
class TimeDependentGenerator:
    """Generator with time-dependent coefficients, given by a sampling
    function t -> DiagonalGenerator valid on [0, t_max]."""

    sample: Callable[[float], DiagonalGenerator]
    t_max: float

    def __call__(self, t: float) -> DiagonalGenerator:
        return self.sample(t)


def apply_generator(gen: DiagonalGenerator, rho: np.ndarray) -> np.ndarray:
    """-i[H, rho] + sum_j c_j (L_j rho L_j^dag - {L_j^dag L_j, rho}/2)."""
    rho = np.asarray(rho, dtype=complex)
    if rho.shape != (gen.dim, gen.dim):
        raise DimensionMismatch(f"state shape {rho.shape} != {(gen.dim, gen.dim)}")
    H = gen.hamiltonian
    out = -1j * (H @ rho - rho @ H)
    for c, L in zip(gen.rates, gen.lindblad_ops):
        Ld = L.conj().T
        LdL = Ld @ L
        out += c * (L @ rho @ Ld - 0.5 * (LdL @ rho + rho @ LdL))
    return out


def generator_to_redfield(apply_fn, n: int) -> RedfieldTensor:
    """Tabulate R[i,j,k,l] = <i| G[|k><l|] |j> for any linear generator."""
    R = np.zeros((n, n, n, n), dtype=complex)
    for k in range(n):
        for l in range(n):
            E = np.zeros((n, n), dtype=complex)
            E[k, l] = 1.0
            R[:, :, k, l] = apply_fn(E)
    return RedfieldTensor(dim=n, coefficients=R)


def redfield_to_nondiagonal(R: RedfieldTensor) -> NonDiagonalGenerator:
    """Extract H and the Kossakowski matrix from a Redfield tensor.

    d_ij = sum_k Tr{tau_j tau_k tau_i G[tau_k]} over the full basis k, and
    H = (T^dag - T)/(2i) with T = (1/n) sum_{i>=1,k} Tr{tau_k tau_i G[tau_k]} tau_i.
    Exact for trace- and Hermiticity-preserving generators (the tensor
    invariants), so applying the result reproduces R.
    """
    n = R.dim
    basis = build_generalized_gellmann_basis(n)
    taus = basis.elements
    Gtau = np.einsum("ijkl,akl->aij", R.coefficients, taus)  # G[tau_k] for all k

    # d_ij = sum_k Tr[tau_j (tau_k tau_i G[tau_k])]
    inner = np.einsum("kab,ibc,kcd->iad", taus, taus, Gtau)  # sum_k tau_k tau_i G[tau_k]
    d = np.einsum("jba,iab->ij", taus[1:], inner[1:])
    d = hermitize(d)

    # T = (1/n) sum_{i>=1} (sum_k Tr[tau_k tau_i G[tau_k]]) tau_i
    tcoef = np.einsum("kab,ibc,kca->i", taus, taus[1:], Gtau)
    T = np.einsum("i,iab->ab", tcoef, taus[1:]) / n
    H = hermitize((T.conj().T - T) / 2j)
    return NonDiagonalGenerator(dim=n, hamiltonian=H, kossakowski_matrix=d, basis=basis)


def nondiagonal_to_diagonal(gen: NonDiagonalGenerator) -> DiagonalGenerator:
    """Diagonalize the Kossakowski matrix: rates are its eigenvalues in
    descending order, Lindblad operators come from the eigenvector columns
    (channel phase fixed: largest eigenvector entry real positive).
    Channels with |rate| <= 1e-10 * max|rate| are dropped."""
    d = hermitize(gen.kossakowski_matrix)
    w, U = hermitian_eigendecomposition(d)
    taus = gen.basis.elements[1:]
    keep = np.abs(w) > ZERO_RATE_FACTOR * max(1e-300, np.abs(w).max())
    rates = w[keep]
    cols = [fix_phase(U[:, k]) for k in np.nonzero(keep)[0]]
    if cols:
        Ls = np.einsum("ji,jab->iab", np.array(cols).T, taus)
    else:
        Ls = np.zeros((0, gen.dim, gen.dim), dtype=complex)
    return DiagonalGenerator(
        dim=gen.dim, hamiltonian=gen.hamiltonian, rates=rates, lindblad_ops=Ls
    )


def redfield_to_diagonal(R: RedfieldTensor) -> DiagonalGenerator:
    return nondiagonal_to_diagonal(redfield_to_nondiagonal(R))


def canonicalize(gen: DiagonalGenerator) -> DiagonalGenerator:
    """Rewrite channels with traceless, Hilbert-Schmidt-normalized Lindblad
    operators; trace parts fold into the Hamiltonian, norms into the rates.
    The generator action is unchanged."""
    n = gen.dim
    H = gen.hamiltonian.astype(complex).copy()
    rates, ops = [], []
    for c, L in zip(gen.rates, gen.lindblad_ops):
        alpha = np.trace(L) / n
        Lp = L - alpha * np.eye(n)
        H += c * (1j / 2) * (np.conj(alpha) * Lp - alpha * Lp.conj().T)
        s = np.linalg.norm(Lp)
        if s <= 1e-14:
            continue
        rates.append(c * s * s)
        ops.append(Lp / s)
    return DiagonalGenerator(
        dim=n,
        hamiltonian=hermitize(H),
        rates=np.array(rates),
        lindblad_ops=np.array(ops) if ops else np.zeros((0, n, n), dtype=complex),
    )


def hamiltonian_coefficients(H: np.ndarray, basis: OperatorBasis) -> np.ndarray:
    """Real expansion coefficients of a (traceless part of a) Hamiltonian on
    the traceless basis elements tau_1..tau_{n^2-1}."""
    return np.array([np.trace(t @ H) for t in basis.elements[1:]]).real


# ---------------------------------------------------------------------------
# Generator config files (JSON; complex numbers as [re, im] pairs).
# Schema: docs/generator.schema.json
# ---------------------------------------------------------------------------


def _pairs_to_complex(obj, shape, what):
    try:
        arr = np.asarray(obj, dtype=float)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{what}: expected nested [re, im] pairs") from exc
    if arr.shape != shape + (2,):
        raise ConfigError(f"{what}: shape {arr.shape[:-1]} != {shape}")
    return arr[..., 0] + 1j * arr[..., 1]


def _complex_to_pairs(arr: np.ndarray):
    out = np.stack([arr.real, arr.imag], axis=-1)
    return out.tolist()


def load_generator_file(path: str):
    """Load a generator from a JSON config file.

    Returns a RedfieldTensor, NonDiagonalGenerator or DiagonalGenerator
    depending on which form the file carries.
    """
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except FileNotFoundError:
        raise ConfigError(f"generator file not found: {path}")
    except json.JSONDecodeError as exc:
        raise ConfigError(f"generator file {path} is not valid JSON: {exc}")
    return generator_from_dict(doc)


def generator_from_dict(doc: dict):
    if not isinstance(doc, dict) or "dim" not in doc:
        raise ConfigError("generator config must be an object with a 'dim' field")
    n = doc["dim"]
    if not isinstance(n, int) or n < 2:
        raise ConfigError(f"'dim' must be an integer >= 2, got {n!r}")
    forms = [k for k in ("redfield_tensor", "nondiagonal", "diagonal") if k in doc]
    if len(forms) != 1:
        raise ConfigError(
            "config must carry exactly one of 'redfield_tensor', 'nondiagonal', 'diagonal'"
        )
    form = forms[0]
    if form == "redfield_tensor":
        flat = _pairs_to_complex(doc[form], (n ** 4,), "redfield_tensor")
        return RedfieldTensor(dim=n, coefficients=flat.reshape(n, n, n, n))
    if form == "nondiagonal":
        sub = doc[form]
        H = _pairs_to_complex(sub.get("hamiltonian"), (n, n), "hamiltonian")
        m = n * n - 1
        d = _pairs_to_complex(sub.get("d_matrix"), (m, m), "d_matrix")
        return NonDiagonalGenerator(
            dim=n, hamiltonian=H, kossakowski_matrix=d,
            basis=build_generalized_gellmann_basis(n),
        )
    sub = doc[form]
    H = _pairs_to_complex(sub.get("hamiltonian"), (n, n), "hamiltonian")
    rates = np.asarray(sub.get("rates", []), dtype=float)
    m = len(rates)
    Ls = _pairs_to_complex(sub.get("lindblad_ops"), (m, n, n), "lindblad_ops")
    return DiagonalGenerator(dim=n, hamiltonian=H, rates=rates, lindblad_ops=Ls)


def generator_to_dict(gen) -> dict:
    if isinstance(gen, RedfieldTensor):
        return {
            "dim": gen.dim,
            "redfield_tensor": _complex_to_pairs(gen.coefficients.reshape(-1)),
        }
    if isinstance(gen, NonDiagonalGenerator):
        return {
            "dim": gen.dim,
            "nondiagonal": {
                "hamiltonian": _complex_to_pairs(gen.hamiltonian),
                "d_matrix": _complex_to_pairs(gen.kossakowski_matrix),
            },
        }
    if isinstance(gen, DiagonalGenerator):
        return {
            "dim": gen.dim,
            "diagonal": {
                "hamiltonian": _complex_to_pairs(gen.hamiltonian),
                "rates": gen.rates.tolist(),
                "lindblad_ops": _complex_to_pairs(gen.lindblad_ops),
            },
        }
    raise ConfigError(f"cannot serialize generator of type {type(gen).__name__}")


def save_generator_file(gen, path: str) -> None:
    with open(path, "w") as fh:
        json.dump(generator_to_dict(gen), fh, indent=1)
        fh.write("\n")


def as_diagonal(gen) -> DiagonalGenerator:
    """Coerce any static generator form to diagonal form."""
    if isinstance(gen, DiagonalGenerator):
        return gen
    if isinstance(gen, NonDiagonalGenerator):
        return nondiagonal_to_diagonal(gen)
    if isinstance(gen, RedfieldTensor):
        return redfield_to_diagonal(gen)
    raise ConfigError(f"not a static generator: {type(gen).__name__}")
