"""Manifold structure of the Stiefel parametrization V_n(C^{nm^2}).

Tangent projection and retractions use the embedded (Euclidean) metric
<D1, D2> = Re Tr(D1^dag D2). The unitary group U(nm) acts by mixing Kraus
blocks; orbits of that action are exactly the fibers over channels, and the
chordal (Frobenius) distance minimized over an orbit has the closed form

    D(C1, C2) = sqrt(Tr C1 + Tr C2 - 2 ||sqrt(C1) sqrt(C2)||_tr),

realized by an orthogonal-Procrustes alignment of the Choi factors.
"""

from __future__ import annotations

import numpy as np

from .channels import (
    ChannelDims,
    ChoiMatrix,
    KrausSet,
    StiefelPoint,
    choi_factor_to_stiefel,
    choi_to_minimal_kraus,
    kraus_rank,
    kraus_to_choi,
    stiefel_to_choi_factor,
    stiefel_to_kraus,
    validate,
)
from .errors import DimMismatch, NotCPTP, NotIsometry, NotUnitary, RankMismatch
from .linalg import (
    as_complex_matrix,
    matrix_sqrt_psd,
    reshape_kraus_to_vec,
    trace_norm,
)

UNITARY_TOL = 1e-8
ISOMETRY_TOL = 1e-9


def project_tangent(S: StiefelPoint, G) -> np.ndarray:
    """Orthogonal projection of an ambient matrix onto the tangent space at S.

    Delta = G - K herm(K^dag G); the result satisfies
    K^dag Delta + Delta^dag K = 0 and projecting twice is a no-op.
    """
    G = as_complex_matrix(G)
    K = S.matrix
    if G.shape != K.shape:
        raise DimMismatch(f"gradient must be {K.shape}, got {G.shape}")
    A = K.conj().T @ G
    return G - K @ ((A + A.conj().T) / 2.0)


def tangency_residual(S: StiefelPoint, delta) -> float:
    """||K^dag Delta + Delta^dag K||_F, zero for tangent vectors."""
    delta = as_complex_matrix(delta)
    A = S.matrix.conj().T @ delta
    return float(np.linalg.norm(A + A.conj().T))


def retract_polar(S: StiefelPoint, delta) -> StiefelPoint:
    """Polar retraction (K + Delta)(I + Delta^dag Delta)^(-1/2).

    First-order: retract(K, t Delta) = K + t Delta + O(t^2) for tangent Delta.
    The output is on the manifold by construction.
    """
    delta = as_complex_matrix(delta)
    K = S.matrix
    if delta.shape != K.shape:
        raise DimMismatch(f"step must be {K.shape}, got {delta.shape}")
    w, V = np.linalg.eigh(delta.conj().T @ delta)
    w = np.clip(w, 0.0, None)
    inv_half = (V / np.sqrt(1.0 + w)) @ V.conj().T
    return StiefelPoint(S.dims, (K + delta) @ inv_half)


def retract_qr(S: StiefelPoint, delta) -> StiefelPoint:
    """QR retraction with the R-diagonal phase normalized to real positive."""
    delta = as_complex_matrix(delta)
    K = S.matrix
    if delta.shape != K.shape:
        raise DimMismatch(f"step must be {K.shape}, got {delta.shape}")
    Q, R = np.linalg.qr(K + delta)
    d = np.diag(R).copy()
    d[d == 0] = 1.0
    phase = d / np.abs(d)
    return StiefelPoint(S.dims, Q * phase.conj())


def unitary_act(U, S: StiefelPoint) -> StiefelPoint:
    """Mix the Kraus blocks: block i of the result is sum_j U[i, j] K_j.

    This is the stacked form (U (x) I_m) K and leaves the channel unchanged.
    """
    U = as_complex_matrix(U)
    nm = S.dims.nm
    if U.shape != (nm, nm):
        raise DimMismatch(f"mixing unitary must be {(nm, nm)}, got {U.shape}")
    if float(np.linalg.norm(U.conj().T @ U - np.eye(nm))) > UNITARY_TOL:
        raise NotUnitary("mixing matrix is not unitary within 1e-8")
    mixed = np.einsum("ij,jab->iab", U, S.blocks())
    return StiefelPoint(S.dims, mixed.reshape(S.dims.stiefel_rows, S.dims.n))


def same_orbit(S1: StiefelPoint, S2: StiefelPoint, tol: float = 1e-8) -> bool:
    """True iff both points represent the same channel (equal Choi matrices)."""
    if S1.dims != S2.dims:
        raise DimMismatch(f"dims differ: {S1.dims} vs {S2.dims}")
    C1 = kraus_to_choi(stiefel_to_kraus(S1)).matrix
    C2 = kraus_to_choi(stiefel_to_kraus(S2)).matrix
    return bool(np.linalg.norm(C1 - C2) <= tol)


def orbit_align(S1: StiefelPoint, S2: StiefelPoint) -> tuple[np.ndarray, float]:
    """Best unitary aligning the orbit of S2 to S1, and the aligned distance.

    With X_i the Choi factors, returns U maximizing Re Tr(U^dag X2^dag X1)
    (orthogonal Procrustes) and ||X1 - X2 U||_F, which is the minimum
    Frobenius distance between the two orbits.
    """
    if S1.dims != S2.dims:
        raise DimMismatch(f"dims differ: {S1.dims} vs {S2.dims}")
    X1 = stiefel_to_choi_factor(S1)
    X2 = stiefel_to_choi_factor(S2)
    P, _, Qh = np.linalg.svd(X2.conj().T @ X1)
    U = P @ Qh
    return U, float(np.linalg.norm(X1 - X2 @ U))


def _require_cptp_pair(C1: ChoiMatrix, C2: ChoiMatrix) -> None:
    if C1.dims != C2.dims:
        raise DimMismatch(f"dims differ: {C1.dims} vs {C2.dims}")
    for C in (C1, C2):
        rep = validate(C)
        if not rep.is_cptp:
            raise NotCPTP(
                f"not CPTP: min eigenvalue {rep.min_eigenvalue:.3e}, TP residual {rep.tp_residual:.3e}"
            )


def channel_distance(C1: ChoiMatrix, C2: ChoiMatrix) -> float:
    """Quotient (orbit-minimized chordal) distance between two channels.

    Computed by Procrustes alignment of the sqrt-section representatives,
    which measures the residual directly and therefore stays exact when the
    channels coincide; agrees with channel_distance_closed_form to the
    cancellation level of the latter (1e-9 on well-separated pairs).
    """
    _require_cptp_pair(C1, C2)
    X1 = matrix_sqrt_psd(C1.matrix)
    X2 = matrix_sqrt_psd(C2.matrix)
    P, _, Qh = np.linalg.svd(X2.conj().T @ X1)
    return float(np.linalg.norm(X1 - X2 @ (P @ Qh)))


def channel_distance_closed_form(C1: ChoiMatrix, C2: ChoiMatrix) -> float:
    """sqrt(Tr C1 + Tr C2 - 2 ||sqrt(C1) sqrt(C2)||_tr), the Bures-style form.

    The radicand is a difference of nearly equal quantities for nearby
    channels, so this form loses up to half the working precision near zero;
    it serves as the independent cross-check of channel_distance.
    """
    _require_cptp_pair(C1, C2)
    cross = trace_norm(matrix_sqrt_psd(C1.matrix) @ matrix_sqrt_psd(C2.matrix))
    gap = float(np.trace(C1.matrix).real + np.trace(C2.matrix).real) - 2.0 * cross
    return float(np.sqrt(max(gap, 0.0)))


def orbit_parametrize(C: ChoiMatrix, M, rank_tol: float = 1e-10) -> StiefelPoint:
    """Point of the orbit of C selected by an isometry M (nm x k, M^dag M = I_k).

    The canonical scaled eigenvectors v_i of C (the minimal Kraus vectors) are
    recombined as w_l = sum_i M[l, i] v_i; every choice of M yields the same
    channel and distinct M yield distinct points, which is exactly the
    statement that the orbit is a copy of V_k(C^{nm}).
    """
    M = as_complex_matrix(M)
    k = kraus_rank(C, rank_tol)
    if M.shape != (C.dims.nm, k):
        raise RankMismatch(f"orbit parameter must be {(C.dims.nm, k)}, got {M.shape}")
    if float(np.linalg.norm(M.conj().T @ M - np.eye(k))) > ISOMETRY_TOL:
        raise NotIsometry("orbit parameter columns are not orthonormal within 1e-9")
    minimal = choi_to_minimal_kraus(C, rank_tol)
    Vmat = np.column_stack([reshape_kraus_to_vec(op) for op in minimal.operators])
    X = Vmat @ M.T
    return choi_factor_to_stiefel(X, C.dims)


# ---------------------------------------------------------------------------
# Haar sampling
# ---------------------------------------------------------------------------

def _rng(seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def random_isometry(rows: int, cols: int, seed) -> np.ndarray:
    """Haar-distributed rows x cols isometry via QR of a complex Ginibre matrix.

    The R diagonal phases are normalized to real positive, which is what makes
    the QR output Haar-uniform rather than merely orthonormal.
    """
    if cols > rows:
        raise DimMismatch(f"need rows >= cols, got ({rows}, {cols})")
    rng = _rng(seed)
    Z = rng.standard_normal((rows, cols)) + 1j * rng.standard_normal((rows, cols))
    Q, R = np.linalg.qr(Z / np.sqrt(2.0))
    d = np.diag(R)
    phase = d / np.abs(d)
    return Q * phase.conj()


def random_unitary(size: int, seed) -> np.ndarray:
    """Haar-distributed unitary of the given size."""
    return random_isometry(size, size, seed)


def random_stiefel(dims: ChannelDims, seed) -> StiefelPoint:
    """Haar-distributed point of V_n(C^{nm^2}); always an exactly valid channel."""
    return StiefelPoint(dims, random_isometry(dims.stiefel_rows, dims.n, seed))


def random_choi(dims: ChannelDims, seed, rank: int | None = None) -> ChoiMatrix:
    """Random CPTP Choi matrix drawn through the Stiefel parametrization.

    With rank=k, the channel is built from k Haar-random Kraus operators
    (an isometry in V_n(C^{km})), giving Kraus rank k generically.
    """
    if rank is None:
        return kraus_to_choi(stiefel_to_kraus(random_stiefel(dims, seed)))
    if not 1 <= rank <= dims.nm:
        raise RankMismatch(f"rank must be in [1, {dims.nm}], got {rank}")
    iso = random_isometry(rank * dims.m, dims.n, seed)
    ops = tuple(iso[i * dims.m : (i + 1) * dims.m, :] for i in range(rank))
    return kraus_to_choi(KrausSet(dims, ops))
