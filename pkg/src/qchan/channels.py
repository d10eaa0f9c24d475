"""Quantum-channel representations and conversions.

A channel from n-dimensional to m-dimensional systems is carried in one of
three interchangeable forms:

* ChoiMatrix   -- the nm x nm block matrix with block (i, j) = Phi(E_ij);
                  CPTP iff the matrix is PSD and its second partial trace
                  equals I_n.
* KrausSet     -- operators K_l (m x n) with Phi(A) = sum_l K_l A K_l^dag and
                  sum_l K_l^dag K_l = I_n.
* StiefelPoint -- the nm^2 x n vertical stack K of nm Kraus operators; the
                  trace-preservation condition is exactly K^dag K = I_n, so K
                  lives on the complex Stiefel manifold V_n(C^{nm^2}).

Vectorization is column-stacking throughout (output index fastest): the
nm x nm factor X whose columns are the vectorized Kraus operators satisfies
X X^dag = C, and every Kraus decomposition of C is X = sqrt(C) V for some
unitary V.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import (
    BadParameter,
    DimMismatch,
    NotCPTP,
    NotTracePreserving,
)
from .linalg import (
    as_complex_matrix,
    hermitian_eig,
    hermitian_part,
    matrix_sqrt_psd,
    partial_trace_second,
    reshape_kraus_to_vec,
    reshape_vec_to_kraus,
)

CPTP_TOL = 1e-9
TP_INGEST_TOL = 1e-6
DEFAULT_RANK_TOL = 1e-10


@dataclass(frozen=True)
class ChannelDims:
    """Input and output dimensions (n, m) of a channel from M_n to M_m."""

    n: int
    m: int

    def __post_init__(self):
        if not (isinstance(self.n, int) and isinstance(self.m, int)):
            raise BadParameter("dimensions must be integers")
        if self.n < 1 or self.m < 1:
            raise BadParameter(f"dimensions must be >= 1, got ({self.n}, {self.m})")

    @property
    def nm(self) -> int:
        return self.n * self.m

    @property
    def stiefel_rows(self) -> int:
        return self.n * self.m * self.m


@dataclass(frozen=True)
class ChoiMatrix:
    """nm x nm channel matrix; only shape and finiteness are enforced here.

    CPTP-ness is a property to be checked (see validate), not a construction
    invariant, so that violating matrices can be built and reported on.
    """

    dims: ChannelDims
    matrix: np.ndarray

    def __post_init__(self):
        M = as_complex_matrix(self.matrix)
        nm = self.dims.nm
        if M.shape != (nm, nm):
            raise DimMismatch(f"Choi matrix must be {(nm, nm)}, got {M.shape}")
        object.__setattr__(self, "matrix", M)


@dataclass(frozen=True)
class KrausSet:
    """Ordered operators K_l, each m x n; at most nm of them."""

    dims: ChannelDims
    operators: tuple

    def __post_init__(self):
        ops = tuple(as_complex_matrix(K) for K in self.operators)
        if not 1 <= len(ops) <= self.dims.nm:
            raise DimMismatch(
                f"need between 1 and {self.dims.nm} Kraus operators, got {len(ops)}"
            )
        shape = (self.dims.m, self.dims.n)
        for K in ops:
            if K.shape != shape:
                raise DimMismatch(f"Kraus operators must be {shape}, got {K.shape}")
        object.__setattr__(self, "operators", ops)

    def tp_residual(self) -> float:
        """||sum_l K_l^dag K_l - I_n||_F."""
        acc = sum(K.conj().T @ K for K in self.operators)
        return float(np.linalg.norm(acc - np.eye(self.dims.n)))


@dataclass(frozen=True)
class StiefelPoint:
    """Vertical stack of nm Kraus blocks, an nm^2 x n matrix."""

    dims: ChannelDims
    matrix: np.ndarray

    def __post_init__(self):
        M = as_complex_matrix(self.matrix)
        if M.shape != (self.dims.stiefel_rows, self.dims.n):
            raise DimMismatch(
                f"Stiefel point must be {(self.dims.stiefel_rows, self.dims.n)}, got {M.shape}"
            )
        object.__setattr__(self, "matrix", M)

    def blocks(self) -> np.ndarray:
        """View of shape (nm, m, n): block l is the l-th Kraus operator."""
        return self.matrix.reshape(self.dims.nm, self.dims.m, self.dims.n)

    def manifold_residual(self) -> float:
        """||K^dag K - I_n||_F."""
        K = self.matrix
        return float(np.linalg.norm(K.conj().T @ K - np.eye(self.dims.n)))


@dataclass(frozen=True)
class ValidationReport:
    min_eigenvalue: float
    tp_residual: float
    entry_bound_violation: float
    is_cptp: bool


# ---------------------------------------------------------------------------
# Choi factor: the nm x nm matrix X with columns vec(K_l) and X X^dag = C
# ---------------------------------------------------------------------------

def stiefel_to_choi_factor(S: StiefelPoint) -> np.ndarray:
    """Repack a Stiefel point into the nm x nm factor X (same entries)."""
    n, m = S.dims.n, S.dims.m
    # blocks axis order (l, r, i) -> X[i*m + r, l]
    return S.blocks().transpose(2, 1, 0).reshape(S.dims.nm, S.dims.nm).copy()


def choi_factor_to_stiefel(X: np.ndarray, dims: ChannelDims) -> StiefelPoint:
    """Inverse of stiefel_to_choi_factor."""
    X = as_complex_matrix(X)
    if X.shape != (dims.nm, dims.nm):
        raise DimMismatch(f"factor must be {(dims.nm, dims.nm)}, got {X.shape}")
    blocks = X.reshape(dims.n, dims.m, dims.nm).transpose(2, 1, 0)
    return StiefelPoint(dims, blocks.reshape(dims.stiefel_rows, dims.n))


def _factor_from_kraus(K: KrausSet) -> np.ndarray:
    X = np.zeros((K.dims.nm, K.dims.nm), dtype=np.complex128)
    for l, op in enumerate(K.operators):
        X[:, l] = reshape_kraus_to_vec(op)
    return X


# ---------------------------------------------------------------------------
# Conversions
# ---------------------------------------------------------------------------

def kraus_to_choi(K: KrausSet) -> ChoiMatrix:
    """Build C = sum_l vec(K_l) vec(K_l)^dag; equals sum_ij E_ij (x) Phi(E_ij).

    Gates on trace preservation: residual above 1e-6 raises
    NotTracePreserving, as non-TP operator sets do not describe a channel.
    """
    res = K.tp_residual()
    if res > TP_INGEST_TOL:
        raise NotTracePreserving(f"trace-preservation residual {res:.3e} exceeds {TP_INGEST_TOL}")
    X = _factor_from_kraus(K)
    return ChoiMatrix(K.dims, hermitian_part(X @ X.conj().T))


def choi_to_minimal_kraus(C: ChoiMatrix, rank_tol: float = DEFAULT_RANK_TOL) -> KrausSet:
    """Minimal Kraus set from the eigendecomposition of the Choi matrix.

    Keeps eigenvalues above rank_tol * lam_max * nm, orders operators by
    descending eigenvalue, and fixes each eigenvector's phase by making its
    largest-magnitude entry real positive (first such entry on ties).
    """
    rep = validate(C)
    if not rep.is_cptp:
        raise NotCPTP(
            f"not CPTP: min eigenvalue {rep.min_eigenvalue:.3e}, TP residual {rep.tp_residual:.3e}"
        )
    w, V = hermitian_eig(hermitian_part(C.matrix))
    lam_max = float(w[-1])
    cut = rank_tol * lam_max * C.dims.nm
    order = np.argsort(-w, kind="stable")
    ops = []
    for idx in order:
        lam = float(w[idx])
        if lam <= cut:
            break
        u = V[:, idx]
        j = int(np.argmax(np.abs(u)))
        phase = u[j] / abs(u[j])
        v = np.sqrt(lam) * (u * phase.conjugate())
        ops.append(reshape_vec_to_kraus(v, (C.dims.n, C.dims.m)))
    return KrausSet(C.dims, tuple(ops))


def kraus_rank(C: ChoiMatrix, rank_tol: float = DEFAULT_RANK_TOL) -> int:
    """Number of eigenvalues above rank_tol * lam_max * nm; the Kraus rank."""
    rep = validate(C)
    if not rep.is_cptp:
        raise NotCPTP(
            f"not CPTP: min eigenvalue {rep.min_eigenvalue:.3e}, TP residual {rep.tp_residual:.3e}"
        )
    w, _ = hermitian_eig(hermitian_part(C.matrix))
    cut = rank_tol * float(w[-1]) * C.dims.nm
    return int(np.sum(w > cut))


def kraus_to_stiefel(K: KrausSet) -> StiefelPoint:
    """Stack the operators vertically, zero-padding at the end to nm blocks."""
    dims = K.dims
    ops = list(K.operators)
    ops += [np.zeros((dims.m, dims.n), dtype=np.complex128)] * (dims.nm - len(ops))
    return StiefelPoint(dims, np.vstack(ops))


def stiefel_to_kraus(S: StiefelPoint) -> KrausSet:
    """Split the stack into its nm blocks (padding retained)."""
    return KrausSet(S.dims, tuple(np.array(b) for b in S.blocks()))


def choi_to_stiefel_sqrt(C: ChoiMatrix) -> StiefelPoint:
    """Canonical continuous section: the Stiefel point assembled from sqrt(C).

    Because sqrt is 1/2-Hoelder on PSD matrices, this section is continuous
    in C, which is what makes the channel/Stiefel-quotient correspondence a
    homeomorphism rather than a mere bijection.
    """
    rep = validate(C)
    if not rep.is_cptp:
        raise NotCPTP(
            f"not CPTP: min eigenvalue {rep.min_eigenvalue:.3e}, TP residual {rep.tp_residual:.3e}"
        )
    X = matrix_sqrt_psd(C.matrix)
    return choi_factor_to_stiefel(X, C.dims)


def validate(channel: ChoiMatrix | KrausSet) -> ValidationReport:
    """Report CPTP diagnostics; never raises on CPTP failure.

    is_cptp requires min eigenvalue >= -1e-9 and ||Tr_2 C - I_n||_F <= 1e-9.
    The entry bound max |c_ij| <= 1 is implied by those two conditions and is
    reported as a separate diagnostic.
    """
    if isinstance(channel, KrausSet):
        X = _factor_from_kraus(channel)
        C = hermitian_part(X @ X.conj().T)
        dims = channel.dims
    elif isinstance(channel, ChoiMatrix):
        C = hermitian_part(channel.matrix)
        dims = channel.dims
    else:
        raise DimMismatch(f"expected ChoiMatrix or KrausSet, got {type(channel).__name__}")
    w = np.linalg.eigvalsh(C)
    tp = float(np.linalg.norm(partial_trace_second(C, (dims.n, dims.m)) - np.eye(dims.n)))
    entry = max(0.0, float(np.max(np.abs(C))) - 1.0)
    return ValidationReport(
        min_eigenvalue=float(w[0]),
        tp_residual=tp,
        entry_bound_violation=entry,
        is_cptp=bool(w[0] >= -CPTP_TOL and tp <= CPTP_TOL),
    )


# ---------------------------------------------------------------------------
# Channel action
# ---------------------------------------------------------------------------

def apply_kraus(K: KrausSet, A) -> np.ndarray:
    """Phi(A) = sum_l K_l A K_l^dag."""
    A = as_complex_matrix(A)
    n = K.dims.n
    if A.shape != (n, n):
        raise DimMismatch(f"input must be {(n, n)}, got {A.shape}")
    ops = np.stack(K.operators)
    return np.einsum("lab,bc,ldc->ad", ops, A, ops.conj())


def apply_choi(C: ChoiMatrix, A) -> np.ndarray:
    """Phi(A) = Tr_1[(A^T (x) I_m) C], the contraction dual to the Choi blocks."""
    A = as_complex_matrix(A)
    n, m = C.dims.n, C.dims.m
    if A.shape != (n, n):
        raise DimMismatch(f"input must be {(n, n)}, got {A.shape}")
    C4 = C.matrix.reshape(n, m, n, m)
    return np.einsum("ij,ipjq->pq", A, C4)


def superoperator_matrix(C: ChoiMatrix) -> np.ndarray:
    """m^2 x n^2 matrix of Phi on column-stacked inputs.

    S @ vec(A) = vec(Phi(A)) with vec the column-stacking map. The entries of
    S are a fixed permutation (reshuffle) of the entries of C, so Frobenius
    distances between superoperators and between Choi matrices coincide.
    """
    n, m = C.dims.n, C.dims.m
    C4 = C.matrix.reshape(n, m, n, m)
    return C4.transpose(3, 1, 2, 0).reshape(m * m, n * n).copy()


# ---------------------------------------------------------------------------
# Example channels
# ---------------------------------------------------------------------------

def identity_channel(n: int) -> KrausSet:
    """Phi(A) = A on M_n."""
    dims = ChannelDims(n, n)
    return KrausSet(dims, (np.eye(n, dtype=np.complex128),))


def unitary_channel(W) -> KrausSet:
    """Phi(A) = W A W^dag for a unitary W."""
    W = as_complex_matrix(W)
    if W.shape[0] != W.shape[1]:
        raise BadParameter(f"gate must be square, got {W.shape}")
    n = W.shape[0]
    if float(np.linalg.norm(W.conj().T @ W - np.eye(n))) > 1e-8:
        raise BadParameter("gate is not unitary within 1e-8")
    return KrausSet(ChannelDims(n, n), (W,))


def depolarize_to_state(n: int, sigma, p: float) -> KrausSet:
    """Phi(rho) = (1 - p) rho + p Tr(rho) sigma.

    Built through the Choi matrix (1-p) vec(I) vec(I)^dag + p I_n (x) sigma
    so the returned set is minimal (at most nm operators).
    """
    if not 0.0 <= p <= 1.0:
        raise BadParameter(f"p must be in [0, 1], got {p}")
    sigma = as_complex_matrix(sigma)
    if sigma.shape != (n, n):
        raise BadParameter(f"sigma must be {(n, n)}, got {sigma.shape}")
    if float(np.linalg.norm(sigma - sigma.conj().T)) > 1e-10 * (1 + np.linalg.norm(sigma)):
        raise BadParameter("sigma must be Hermitian")
    w = np.linalg.eigvalsh(hermitian_part(sigma))
    if w[0] < -1e-10 * max(1.0, float(w[-1])) or abs(np.trace(sigma).real - 1.0) > 1e-10:
        raise BadParameter("sigma must be a density matrix (PSD, trace 1)")
    dims = ChannelDims(n, n)
    v = reshape_kraus_to_vec(np.eye(n, dtype=np.complex128))
    C = (1.0 - p) * np.outer(v, v.conj()) + p * np.kron(np.eye(n), sigma)
    return choi_to_minimal_kraus(ChoiMatrix(dims, C))


def erasing_channel(eps: float) -> KrausSet:
    """Single-qubit erasing channel in Chan(2, 3).

    Phi(rho) = (1 - eps) rho (+) 0 + eps Tr(rho) |e><e| with |e> the flag
    state orthogonal to the qubit subspace.
    """
    if not 0.0 <= eps <= 1.0:
        raise BadParameter(f"eps must be in [0, 1], got {eps}")
    dims = ChannelDims(2, 3)
    embed = np.zeros((3, 2), dtype=np.complex128)
    embed[0, 0] = embed[1, 1] = 1.0
    k1 = np.sqrt(1.0 - eps) * embed
    k2 = np.zeros((3, 2), dtype=np.complex128)
    k2[2, 0] = np.sqrt(eps)
    k3 = np.zeros((3, 2), dtype=np.complex128)
    k3[2, 1] = np.sqrt(eps)
    return KrausSet(dims, (k1, k2, k3))


def phase_erasing_channel(eps: float) -> KrausSet:
    """Single-qubit phase-erasing channel in Chan(2, 4).

    Phi(rho) = (1 - eps) rho (x) |0><0| + eps (rho + Z rho Z)/2 (x) |1><1|,
    the second output qubit flagging whether the phase was randomized.
    """
    if not 0.0 <= eps <= 1.0:
        raise BadParameter(f"eps must be in [0, 1], got {eps}")
    dims = ChannelDims(2, 4)
    e0 = np.array([[1.0], [0.0]], dtype=np.complex128)
    e1 = np.array([[0.0], [1.0]], dtype=np.complex128)
    eye = np.eye(2, dtype=np.complex128)
    sz = np.diag([1.0, -1.0]).astype(np.complex128)
    k1 = np.sqrt(1.0 - eps) * np.kron(eye, e0)
    k2 = np.sqrt(eps / 2.0) * np.kron(eye, e1)
    k3 = np.sqrt(eps / 2.0) * np.kron(sz, e1)
    return KrausSet(dims, (k1, k2, k3))


def partial_trace_channel(k: int, l: int, which_factor: str = "second") -> KrausSet:
    """Tr_2 (or Tr_1) on C^k (x) C^l as a channel from M_{kl}.

    which_factor="second" gives Chan(kl, k) with Kraus operators I_k (x) <r|,
    r = 1..l; which_factor="first" gives Chan(kl, l) with <r| (x) I_l.
    """
    if k < 1 or l < 1:
        raise BadParameter(f"factor dimensions must be >= 1, got ({k}, {l})")
    if which_factor == "second":
        dims = ChannelDims(k * l, k)
        eye = np.eye(k, dtype=np.complex128)
        ops = tuple(np.kron(eye, np.eye(l, dtype=np.complex128)[r : r + 1, :]) for r in range(l))
    elif which_factor == "first":
        dims = ChannelDims(k * l, l)
        eye = np.eye(l, dtype=np.complex128)
        ops = tuple(np.kron(np.eye(k, dtype=np.complex128)[r : r + 1, :], eye) for r in range(k))
    else:
        raise BadParameter(f"which_factor must be 'first' or 'second', got {which_factor!r}")
    return KrausSet(dims, ops)
