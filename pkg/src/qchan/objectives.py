"""Kinematic objective functionals evaluated on the Stiefel parametrization.

Five objective kinds are supported, each a function of the channel only (so
constant on unitary-mixing orbits):

* expectation  -- Tr(O Phi(rho0)), affine in the channel.
* free_energy  -- -Tr(O Phi(rho0)) + S(Phi(rho0)) / beta with S the von
                  Neumann entropy (natural log); concave.
* channel_gen  -- ||C(K) - C0||_F^2, squared Frobenius distance of Choi
                  matrices (equal to the superoperator distance); strictly
                  convex in the channel.
* gate_gen     -- channel_gen against the Choi matrix of a unitary gate.
* grk          -- (1/6) sum_i ||Phi(rho_i) - W rho_i W^dag||_F^2 over the
                  three-state gate certificate (full-rank state with distinct
                  eigenvalues, a rank-1 projector overlapping all its
                  eigenvectors, and the maximally mixed state); convex, and
                  zero exactly on the gate channel.

Gradient convention: the Euclidean gradient G pairs with ambient directions
as dF = 2 Re Tr(G^dag Delta). The Riemannian gradient under the embedded
metric Re Tr(D1^dag D2) is the tangent projection of 2 G.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .channels import (
    ChannelDims,
    ChoiMatrix,
    KrausSet,
    StiefelPoint,
    kraus_to_choi,
    stiefel_to_choi_factor,
    choi_factor_to_stiefel,
    choi_to_minimal_kraus,
    kraus_to_stiefel,
    validate,
)
from .errors import BadParameter, DimMismatch, ManifoldViolation, NotCPTP, SpectrumTooSingular
from .geometry import project_tangent
from .linalg import as_complex_matrix, hermitian_part

EPS_LOG = 1e-12
EPS_SINGULAR = 1e-9
MANIFOLD_TOL = 1e-6

KINDS = ("expectation", "free_energy", "channel_gen", "gate_gen", "grk")


def check_observable(O, m: int) -> np.ndarray:
    O = as_complex_matrix(O)
    if O.shape != (m, m):
        raise BadParameter(f"observable must be {(m, m)}, got {O.shape}")
    if float(np.linalg.norm(O - O.conj().T)) > 1e-10 * (1.0 + float(np.linalg.norm(O))):
        raise BadParameter("observable must be Hermitian within 1e-10")
    return hermitian_part(O)


def check_density_matrix(rho, n: int) -> np.ndarray:
    rho = as_complex_matrix(rho)
    if rho.shape != (n, n):
        raise BadParameter(f"state must be {(n, n)}, got {rho.shape}")
    if float(np.linalg.norm(rho - rho.conj().T)) > 1e-10 * (1.0 + float(np.linalg.norm(rho))):
        raise BadParameter("state must be Hermitian within 1e-10")
    w = np.linalg.eigvalsh(hermitian_part(rho))
    if float(w[0]) < -1e-10 * max(1.0, float(w[-1])):
        raise BadParameter("state must be positive semidefinite")
    if abs(float(np.trace(rho).real) - 1.0) > 1e-10:
        raise BadParameter("state must have unit trace")
    return hermitian_part(rho)


def check_unitary(W, n: int | None = None) -> np.ndarray:
    W = as_complex_matrix(W)
    if W.shape[0] != W.shape[1] or (n is not None and W.shape != (n, n)):
        raise BadParameter(f"gate has wrong shape {W.shape}")
    if float(np.linalg.norm(W.conj().T @ W - np.eye(W.shape[0]))) > 1e-8:
        raise BadParameter("gate is not unitary within 1e-8")
    return W


@dataclass(frozen=True)
class Objective:
    """One objective functional with its parameters; build via the factories."""

    kind: str
    dims: ChannelDims
    direction: str = "min"
    observable: np.ndarray | None = None
    rho0: np.ndarray | None = None
    beta: float | None = None
    target_choi: ChoiMatrix | None = None
    gate: np.ndarray | None = None
    grk_states: tuple | None = None
    grk_targets: tuple | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise BadParameter(f"unknown objective kind {self.kind!r}")
        if self.direction not in ("min", "max"):
            raise BadParameter(f"direction must be 'min' or 'max', got {self.direction!r}")


def expectation(O, rho0, direction: str = "max") -> Objective:
    """Tr(O Phi(rho0)) for an observable O (m x m) and initial state rho0 (n x n)."""
    rho0 = np.asarray(rho0)
    O = np.asarray(O)
    dims = ChannelDims(int(rho0.shape[0]), int(O.shape[0]))
    return Objective(
        kind="expectation",
        dims=dims,
        direction=direction,
        observable=check_observable(O, dims.m),
        rho0=check_density_matrix(rho0, dims.n),
    )


def free_energy(O, rho0, beta: float, direction: str = "max") -> Objective:
    """-Tr(O Phi(rho0)) + S(Phi(rho0)) / beta; beta > 0, natural-log entropy."""
    if not beta > 0:
        raise BadParameter(f"beta must be > 0, got {beta}")
    rho0 = np.asarray(rho0)
    O = np.asarray(O)
    dims = ChannelDims(int(rho0.shape[0]), int(O.shape[0]))
    return Objective(
        kind="free_energy",
        dims=dims,
        direction=direction,
        observable=check_observable(O, dims.m),
        rho0=check_density_matrix(rho0, dims.n),
        beta=float(beta),
    )


def channel_generation(target: ChoiMatrix | KrausSet, direction: str = "min") -> Objective:
    """||C(K) - C_target||_F^2 against a CPTP target."""
    if isinstance(target, KrausSet):
        target = kraus_to_choi(target)
    if not isinstance(target, ChoiMatrix):
        raise BadParameter(f"target must be a ChoiMatrix or KrausSet, got {type(target).__name__}")
    rep = validate(target)
    if not rep.is_cptp:
        raise NotCPTP("target channel is not CPTP")
    return Objective(kind="channel_gen", dims=target.dims, direction=direction, target_choi=target)


def gate_generation(W, direction: str = "min") -> Objective:
    """||C(K) - C(Phi_W)||_F^2 for a unitary gate W."""
    W = check_unitary(W)
    n = W.shape[0]
    target = kraus_to_choi(KrausSet(ChannelDims(n, n), (W,)))
    return Objective(
        kind="gate_gen", dims=target.dims, direction=direction, gate=W, target_choi=target
    )


def grk_default_states(n: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Canonical three-state certificate for gate generation on M_n.

    rho1 = diag(lam) with lam_k = 2 (n + 1 - k) / (n (n + 1)): distinct,
    positive, summing to one. rho2 = |+><+| for the uniform superposition,
    which overlaps every computational eigenvector with weight 1/n.
    rho3 = I_n / n.
    """
    if n < 1:
        raise BadParameter(f"n must be >= 1, got {n}")
    lam = 2.0 * (n - np.arange(n)) / (n * (n + 1))
    rho1 = np.diag(lam).astype(np.complex128)
    plus = np.full((n, 1), 1.0 / np.sqrt(n), dtype=np.complex128)
    rho2 = plus @ plus.conj().T
    rho3 = np.eye(n, dtype=np.complex128) / n
    return rho1, rho2, rho3


def grk_gate_generation(W, states=None, direction: str = "min") -> Objective:
    """(1/6) sum_i ||Phi(rho_i) - W rho_i W^dag||_F^2 over a three-state certificate.

    The states must satisfy the certificate conditions: rho1 full rank with
    distinct eigenvalues, rho2 a rank-1 projector not orthogonal to any
    eigenvector of rho1, rho3 maximally mixed. Vanishing of the functional
    then forces the channel to be the gate channel itself.
    """
    W = check_unitary(W)
    n = W.shape[0]
    if states is None:
        states = grk_default_states(n)
    rho1, rho2, rho3 = (check_density_matrix(r, n) for r in states)

    w1, V1 = np.linalg.eigh(rho1)
    if float(np.min(w1)) <= 1e-10:
        raise BadParameter("rho1 must have nonzero eigenvalues")
    if n > 1 and float(np.min(np.diff(w1))) <= 1e-8:
        raise BadParameter("rho1 must have distinct eigenvalues (gaps > 1e-8)")
    if float(np.linalg.norm(rho2 @ rho2 - rho2)) > 1e-9 or abs(np.trace(rho2).real - 1.0) > 1e-9:
        raise BadParameter("rho2 must be a rank-1 orthogonal projector")
    overlaps = np.einsum("ik,ij,jk->k", V1.conj(), rho2, V1).real
    if float(np.min(overlaps)) <= 1e-10:
        raise BadParameter("rho2 must overlap every eigenvector of rho1")
    if float(np.linalg.norm(rho3 - np.eye(n) / n)) > 1e-12:
        raise BadParameter("rho3 must be the maximally mixed state")

    states = (rho1, rho2, rho3)
    targets = tuple(W @ r @ W.conj().T for r in states)
    return Objective(
        kind="grk",
        dims=ChannelDims(n, n),
        direction=direction,
        gate=W,
        grk_states=states,
        grk_targets=targets,
    )


# ---------------------------------------------------------------------------
# Evaluation
# ---------------------------------------------------------------------------

def _check_point(obj: Objective, S: StiefelPoint) -> np.ndarray:
    if S.dims != obj.dims:
        raise DimMismatch(f"objective dims {obj.dims} but point dims {S.dims}")
    if S.manifold_residual() > MANIFOLD_TOL:
        raise ManifoldViolation(f"||K^dag K - I|| = {S.manifold_residual():.3e} exceeds {MANIFOLD_TOL}")
    return S.blocks()


def _apply_blocks(blocks: np.ndarray, rho: np.ndarray) -> np.ndarray:
    """sum_l K_l rho K_l^dag from the (nm, m, n) block stack."""
    return np.einsum("lab,bc,ldc->ad", blocks, rho, blocks.conj())


def _entropy(rho: np.ndarray) -> float:
    w = np.linalg.eigvalsh(hermitian_part(rho))
    w = w[w > EPS_LOG]
    return float(-np.sum(w * np.log(w)))


def value(obj: Objective, S: StiefelPoint) -> float:
    """Objective value at a Stiefel point; constant along mixing orbits."""
    blocks = _check_point(obj, S)
    if obj.kind == "expectation":
        out = _apply_blocks(blocks, obj.rho0)
        return float(np.einsum("ab,ba->", obj.observable, out).real)
    if obj.kind == "free_energy":
        out = _apply_blocks(blocks, obj.rho0)
        energy = float(np.einsum("ab,ba->", obj.observable, out).real)
        return -energy + _entropy(out) / obj.beta
    if obj.kind in ("channel_gen", "gate_gen"):
        X = stiefel_to_choi_factor(S)
        diff = X @ X.conj().T - obj.target_choi.matrix
        return float(np.linalg.norm(diff) ** 2)
    # grk
    acc = 0.0
    for rho, target in zip(obj.grk_states, obj.grk_targets):
        diff = _apply_blocks(blocks, rho) - target
        acc += float(np.linalg.norm(diff) ** 2)
    return acc / 6.0


def euclidean_gradient(obj: Objective, S: StiefelPoint) -> np.ndarray:
    """Ambient gradient G with dF = 2 Re Tr(G^dag Delta)."""
    blocks = _check_point(obj, S)
    if obj.kind == "expectation":
        G = np.einsum("ab,lbc,cd->lad", obj.observable, blocks, obj.rho0)
        return G.reshape(S.matrix.shape)
    if obj.kind == "free_energy":
        out = _apply_blocks(blocks, obj.rho0)
        w, V = np.linalg.eigh(hermitian_part(out))
        if float(w[0]) < EPS_SINGULAR:
            raise SpectrumTooSingular(
                f"output state eigenvalue {w[0]:.3e} below {EPS_SINGULAR}; entropy gradient undefined"
            )
        log_out = (V * np.log(np.clip(w, EPS_LOG, None))) @ V.conj().T
        A = -obj.observable - (log_out + np.eye(obj.dims.m)) / obj.beta
        G = np.einsum("ab,lbc,cd->lad", A, blocks, obj.rho0)
        return G.reshape(S.matrix.shape)
    if obj.kind in ("channel_gen", "gate_gen"):
        X = stiefel_to_choi_factor(S)
        GX = 2.0 * (X @ X.conj().T - obj.target_choi.matrix) @ X
        return choi_factor_to_stiefel(GX, S.dims).matrix
    # grk
    G = np.zeros_like(blocks)
    for rho, target in zip(obj.grk_states, obj.grk_targets):
        diff = _apply_blocks(blocks, rho) - target
        G += np.einsum("ab,lbc,cd->lad", diff, blocks, rho)
    return (G / 3.0).reshape(S.matrix.shape)


def riemannian_gradient(obj: Objective, S: StiefelPoint) -> np.ndarray:
    """Tangent gradient under the embedded metric: project_tangent(K, 2 G)."""
    return project_tangent(S, 2.0 * euclidean_gradient(obj, S))


# ---------------------------------------------------------------------------
# Convexity probing along Choi chords
# ---------------------------------------------------------------------------

CLAIMED_SHAPE = {
    "expectation": "affine",
    "free_energy": "concave",
    "channel_gen": "convex",
    "gate_gen": "convex",
    "grk": "convex",
}


@dataclass(frozen=True)
class ConvexityReport:
    claimed: str
    max_violation: float
    lambdas: np.ndarray
    values: np.ndarray


def convexity_probe(
    obj: Objective, C_a: ChoiMatrix, C_b: ChoiMatrix, samples: int = 11
) -> ConvexityReport:
    """Evaluate the objective along the chord lam C_a + (1 - lam) C_b.

    Reports the worst violation of the claimed inequality for the objective's
    kind (affinity deviation for expectation). Both endpoints and all interior
    points are evaluated through the same Choi -> minimal-Kraus -> Stiefel
    pipeline, so the comparison is exact up to roundoff.
    """
    if C_a.dims != obj.dims or C_b.dims != obj.dims:
        raise DimMismatch("chord endpoints must match the objective dims")
    for C in (C_a, C_b):
        if not validate(C).is_cptp:
            raise NotCPTP("chord endpoints must be CPTP")
    lams = np.linspace(0.0, 1.0, samples)
    vals = np.empty(samples)
    for i, lam in enumerate(lams):
        mix = ChoiMatrix(obj.dims, lam * C_a.matrix + (1.0 - lam) * C_b.matrix)
        point = kraus_to_stiefel(choi_to_minimal_kraus(mix))
        vals[i] = value(obj, point)
    interp = lams * vals[-1] + (1.0 - lams) * vals[0]
    claimed = CLAIMED_SHAPE[obj.kind]
    if claimed == "affine":
        viol = float(np.max(np.abs(vals - interp)))
    elif claimed == "convex":
        viol = float(np.max(vals - interp))
    else:
        viol = float(np.max(interp - vals))
    return ConvexityReport(claimed=claimed, max_violation=viol, lambdas=lams, values=vals)
