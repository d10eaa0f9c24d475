"""Dense complex matrix kernels: decompositions, norms, partial traces, reshapes.

All functions are pure, take and return plain numpy arrays, and never mutate
their inputs. Tensor-product indices follow the first-factor-slow convention:
a kl x kl matrix on C^k (x) C^l has row index r = r1*l + r2 with r1 indexing
the first factor.
"""

from __future__ import annotations

from typing import NamedTuple

import numpy as np

from .errors import DimMismatch, NonFinite, NotHermitian, NotPSD

HERMITIAN_RTOL = 1e-10
PSD_CLAMP_RTOL = 1e-10


def as_complex_matrix(A) -> np.ndarray:
    """Coerce to a finite complex128 2-D array."""
    A = np.asarray(A, dtype=np.complex128)
    if A.ndim != 2:
        raise DimMismatch(f"expected a 2-D matrix, got ndim={A.ndim}")
    if not (np.all(np.isfinite(A.real)) and np.all(np.isfinite(A.imag))):
        raise NonFinite("matrix contains NaN or Inf entries")
    return A


def dagger(A: np.ndarray) -> np.ndarray:
    return A.conj().T


def hermitian_part(A: np.ndarray) -> np.ndarray:
    return (A + A.conj().T) / 2.0


class HermitianEig(NamedTuple):
    eigenvalues: np.ndarray   # real, ascending
    eigenvectors: np.ndarray  # unitary; column i pairs with eigenvalues[i]


class MatrixNorms(NamedTuple):
    frobenius: float
    operator: float
    trace: float


def hermitian_eig(H) -> HermitianEig:
    """Eigendecomposition of a Hermitian matrix, eigenvalues ascending.

    Raises NotHermitian if ||H - H^dag||_F exceeds 1e-10 * (1 + ||H||_F).
    Satisfies V diag(w) V^dag = H to machine precision.
    """
    H = as_complex_matrix(H)
    if H.shape[0] != H.shape[1]:
        raise DimMismatch(f"expected a square matrix, got {H.shape}")
    scale = 1.0 + float(np.linalg.norm(H))
    asym = float(np.linalg.norm(H - H.conj().T))
    if asym > HERMITIAN_RTOL * scale:
        raise NotHermitian(f"symmetry residual {asym:.3e} exceeds {HERMITIAN_RTOL * scale:.3e}")
    w, V = np.linalg.eigh(H)
    return HermitianEig(w, V)


def matrix_sqrt_psd(A) -> np.ndarray:
    """Unique PSD square root B of a PSD Hermitian matrix, B @ B = A.

    Eigenvalues in [-1e-10 * max(1, lam_max), 0) are clamped to zero;
    anything below that floor raises NotPSD.
    """
    w, V = hermitian_eig(A)
    lam_max = float(w[-1])
    floor = -PSD_CLAMP_RTOL * max(1.0, lam_max)
    if float(w[0]) < floor:
        raise NotPSD(f"minimum eigenvalue {w[0]:.3e} below clamp floor {floor:.3e}")
    w = np.clip(w, 0.0, None)
    return (V * np.sqrt(w)) @ V.conj().T


def partial_trace_second(M, dims: tuple[int, int]) -> np.ndarray:
    """Tr_2 of a kl x kl matrix on C^k (x) C^l, returning k x k."""
    k, l = dims
    M = as_complex_matrix(M)
    if M.shape != (k * l, k * l):
        raise DimMismatch(f"expected {(k * l, k * l)}, got {M.shape}")
    return np.einsum("irjr->ij", M.reshape(k, l, k, l))


def partial_trace_first(M, dims: tuple[int, int]) -> np.ndarray:
    """Tr_1 of a kl x kl matrix on C^k (x) C^l, returning l x l."""
    k, l = dims
    M = as_complex_matrix(M)
    if M.shape != (k * l, k * l):
        raise DimMismatch(f"expected {(k * l, k * l)}, got {M.shape}")
    return np.einsum("aras->rs", M.reshape(k, l, k, l))


def kron(A, B) -> np.ndarray:
    """Kronecker product with block (i, j) equal to A[i, j] * B."""
    A = as_complex_matrix(A)
    B = as_complex_matrix(B)
    return np.kron(A, B)


def reshape_vec_to_kraus(v, dims: tuple[int, int]) -> np.ndarray:
    """Reshape a length-nm vector to an m x n matrix, output index fastest.

    Column j of the result is v[j*m : (j+1)*m]; inverse of reshape_kraus_to_vec.
    """
    n, m = dims
    v = np.asarray(v, dtype=np.complex128).reshape(-1)
    if v.size != n * m:
        raise DimMismatch(f"expected a vector of length {n * m}, got {v.size}")
    return v.reshape(n, m).T.copy()


def reshape_kraus_to_vec(K) -> np.ndarray:
    """Column-stack an m x n matrix into a length-nm vector."""
    K = as_complex_matrix(K)
    return K.T.reshape(-1).copy()


def matrix_norms(A) -> MatrixNorms:
    """Frobenius, operator (largest singular value) and trace (nuclear) norms."""
    A = as_complex_matrix(A)
    s = np.linalg.svd(A, compute_uv=False)
    return MatrixNorms(
        frobenius=float(np.sqrt(np.sum(s * s))),
        operator=float(s[0]) if s.size else 0.0,
        trace=float(np.sum(s)),
    )


def trace_norm(A) -> float:
    """Nuclear norm, the sum of singular values."""
    A = as_complex_matrix(A)
    return float(np.sum(np.linalg.svd(A, compute_uv=False)))
