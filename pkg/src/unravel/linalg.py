"""Dense complex linear algebra on small matrices.

Everything here targets dimensions of a few (n <= 128 documented cap; the
physics modules use n <= ~16). Matrices are plain complex numpy arrays,
states are 1-D complex arrays.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import InvalidDimension, NonHermitianInput

HERMITICITY_RTOL = 1e-12


def frobenius(M: np.ndarray) -> float:
    return float(np.linalg.norm(M))


def dagger(M: np.ndarray) -> np.ndarray:
    return M.conj().T


def is_hermitian(M: np.ndarray, rtol: float = HERMITICITY_RTOL) -> bool:
    """max |M_ij - conj(M_ji)| <= rtol * (1 + ||M||_F)."""
    return float(np.abs(M - M.conj().T).max()) <= rtol * (1.0 + frobenius(M))


def hermitize(M: np.ndarray) -> np.ndarray:
    return (M + M.conj().T) / 2


def normalize(psi: np.ndarray) -> np.ndarray:
    return psi / np.linalg.norm(psi)


def hermitian_eigendecomposition(M: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Eigenvalues (real, descending) and matching orthonormal eigenvectors.

    Returns (w, V) with V[:, k] the eigenvector for w[k], so that
    M = V @ diag(w) @ V^dagger.
    """
    M = np.asarray(M, dtype=complex)
    if not is_hermitian(M):
        raise NonHermitianInput(
            f"matrix is not Hermitian within {HERMITICITY_RTOL:g}*(1+||M||_F)"
        )
    w, V = np.linalg.eigh(M)
    return w[::-1].copy(), V[:, ::-1].copy()


def matrix_exponential(M: np.ndarray) -> np.ndarray:
    """exp(M) for any square complex M (Pade scaling-and-squaring)."""
    return scipy.linalg.expm(np.asarray(M, dtype=complex))


@dataclass(frozen=True)
class OperatorBasis:
    """Hilbert-Schmidt orthonormal Hermitian operator basis.

    elements[0] = identity/sqrt(n); elements[1:] are traceless. For n=2 the
    traceless elements are the Pauli matrices over sqrt(2); for n=3 they are
    the Gell-Mann matrices over sqrt(2), in the standard Gell-Mann order.
    """

    dim: int
    elements: np.ndarray  # shape (n*n, n, n)

    def coefficients(self, M: np.ndarray) -> np.ndarray:
        """Expansion coefficients Tr(tau_i^dag M) of M in this basis."""
        return np.einsum("aji,ij->a", self.elements.conj(), M)

    def reconstruct(self, coeffs: np.ndarray) -> np.ndarray:
        return np.einsum("a,aij->ij", coeffs, self.elements)


def build_generalized_gellmann_basis(n: int) -> OperatorBasis:
    """Normalized generalized Gell-Mann basis (plus identity/sqrt(n) first).

    Ordering: for each level d = 2..n, the symmetric then antisymmetric
    off-diagonal pair (k, d) for k = 1..d-1, followed by the diagonal
    element of rank d-1. This reduces to sigma_x, sigma_y, sigma_z over
    sqrt(2) at n=2 and the standard Gell-Mann sequence over sqrt(2) at n=3.
    """
    if n < 2:
        raise InvalidDimension(f"basis needs n >= 2, got {n}")
    elems = np.zeros((n * n, n, n), dtype=complex)
    elems[0] = np.eye(n) / np.sqrt(n)
    idx = 1
    for d in range(2, n + 1):
        for k in range(1, d):
            elems[idx, k - 1, d - 1] = 1 / np.sqrt(2)
            elems[idx, d - 1, k - 1] = 1 / np.sqrt(2)
            idx += 1
            elems[idx, k - 1, d - 1] = -1j / np.sqrt(2)
            elems[idx, d - 1, k - 1] = 1j / np.sqrt(2)
            idx += 1
        norm = np.sqrt(d * (d - 1))
        for i in range(d - 1):
            elems[idx, i, i] = 1 / norm
        elems[idx, d - 1, d - 1] = -(d - 1) / norm
        idx += 1
    return OperatorBasis(dim=n, elements=elems)


def haar_state(n: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-random normalized state on C^n."""
    v = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    return v / np.linalg.norm(v)


def haar_orthonormal_pair(n: int, rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
    """Haar-uniform orthonormal pair (u, v), via QR of a Gaussian matrix."""
    g = rng.standard_normal((n, 2)) + 1j * rng.standard_normal((n, 2))
    q, _ = np.linalg.qr(g)
    return q[:, 0].copy(), q[:, 1].copy()


def fix_phase(v: np.ndarray) -> np.ndarray:
    """Rotate a vector's global phase so its largest-magnitude entry is real
    positive (deterministic channel convention)."""
    i = int(np.argmax(np.abs(v)))
    a = v[i]
    if a == 0:
        return v
    return v * (np.conj(a) / np.abs(a))
