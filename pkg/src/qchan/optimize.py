"""Riemannian gradient descent on the Stiefel parametrization.

Plain steepest descent with polar retraction and Armijo backtracking. The
convex/concave structure of the supported objectives means every local
optimum over the parametrization is global, so a multi-start driver plus a
closed-form oracle for the global value certify trap-freeness empirically:
a converged run whose value misses the oracle would be a trap suspect.

Runs are deterministic: the starting point of run i is drawn from a fresh
generator seeded with (seed, i), and aggregation is a fold in run order.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np

from .channels import (
    StiefelPoint,
    choi_to_minimal_kraus,
    kraus_to_choi,
    kraus_to_stiefel,
    stiefel_to_kraus,
)
from .errors import BadParameter, DimMismatch, SpectrumTooSingular
from .geometry import project_tangent, random_stiefel, retract_polar
from .objectives import Objective, euclidean_gradient, value

SEED_MASK = (1 << 63) - 1
MIN_STEP = 1e-16


@dataclass(frozen=True)
class OptimizerConfig:
    max_iters: int = 5000
    grad_tol: float = 1e-8
    initial_step: float = 1.0
    armijo_shrink: float = 0.5
    armijo_slope: float = 1e-4
    seed: int = 0

    def __post_init__(self):
        if not 0.0 < self.armijo_shrink < 1.0:
            raise BadParameter(f"armijo_shrink must be in (0, 1), got {self.armijo_shrink}")
        if not 0.0 < self.armijo_slope < 1.0:
            raise BadParameter(f"armijo_slope must be in (0, 1), got {self.armijo_slope}")
        if self.initial_step <= 0 or self.grad_tol <= 0 or self.max_iters < 0:
            raise BadParameter("step, tolerance and iteration budget must be positive")


@dataclass
class RunResult:
    final_point: StiefelPoint
    final_value: float
    final_grad_norm: float
    iterations: int
    converged: bool
    value_trace: list[float] = field(default_factory=list)
    grad_norm_trace: list[float] = field(default_factory=list)
    step_trace: list[float] = field(default_factory=list)
    failure: str | None = None


@dataclass
class LandscapeReport:
    runs: list[RunResult]
    best_value: float
    worst_converged_value: float
    spread: float
    global_oracle: float | None
    trap_suspects: list[int]
    trap_tol: float


def riemannian_gd(obj: Objective, start: StiefelPoint, cfg: OptimizerConfig) -> RunResult:
    """Armijo-backtracked steepest descent from a starting point.

    Minimizes (or maximizes, per obj.direction) with iterates
    K_{t+1} = retract_polar(K_t, -alpha_t grad). Each backtracking search is
    seeded with a Barzilai-Borwein estimate from the previous step (doubled
    previous step when the BB curvature is unusable), then shrunk until the
    Armijo criterion holds, so accepted steps always achieve the sufficient
    decrease and the value trace is monotone. Stops when the Riemannian
    gradient norm drops to cfg.grad_tol.
    """
    if start.dims != obj.dims:
        raise DimMismatch(f"objective dims {obj.dims} but start dims {start.dims}")
    sign = 1.0 if obj.direction == "min" else -1.0

    point = start
    val = value(obj, point)
    phi = sign * val
    result = RunResult(
        final_point=point,
        final_value=val,
        final_grad_norm=np.inf,
        iterations=0,
        converged=False,
        value_trace=[val],
    )

    trial = cfg.initial_step
    prev_matrix: np.ndarray | None = None
    prev_grad: np.ndarray | None = None
    for it in range(cfg.max_iters):
        try:
            grad = project_tangent(point, 2.0 * sign * euclidean_gradient(obj, point))
        except SpectrumTooSingular as exc:
            result.failure = f"spectrum_too_singular: {exc}"
            result.grad_norm_trace.append(np.nan)
            break
        gnorm = float(np.linalg.norm(grad))
        result.grad_norm_trace.append(gnorm)
        result.final_grad_norm = gnorm
        if gnorm <= cfg.grad_tol:
            result.converged = True
            break

        if prev_matrix is not None:
            s = point.matrix - prev_matrix
            y = grad - prev_grad
            curvature = float(np.vdot(s, y).real)
            if curvature > 1e-18:
                trial = float(np.clip(float(np.vdot(s, s).real) / curvature, 1e-10, 1e10))

        accepted = False
        gnorm2 = gnorm * gnorm
        while trial >= MIN_STEP:
            candidate = retract_polar(point, -trial * grad)
            cand_val = value(obj, candidate)
            if sign * cand_val <= phi - cfg.armijo_slope * trial * gnorm2:
                accepted = True
                break
            trial *= cfg.armijo_shrink
        if not accepted:
            result.failure = "line_search_stall"
            break

        prev_matrix, prev_grad = point.matrix, grad
        point, val, phi = candidate, cand_val, sign * cand_val
        result.iterations = it + 1
        result.value_trace.append(val)
        result.step_trace.append(trial)
        trial *= 2.0
    else:
        # budget exhausted: record the gradient norm at the final iterate
        try:
            grad = project_tangent(point, 2.0 * sign * euclidean_gradient(obj, point))
            gnorm = float(np.linalg.norm(grad))
            result.grad_norm_trace.append(gnorm)
            result.final_grad_norm = gnorm
            result.converged = bool(gnorm <= cfg.grad_tol)
        except SpectrumTooSingular as exc:
            result.failure = f"spectrum_too_singular: {exc}"
            result.grad_norm_trace.append(np.nan)

    result.final_point = point
    result.final_value = val
    return result


def known_global_value(obj: Objective) -> float | None:
    """Closed-form global optimum when one is known, else None.

    expectation: extremal eigenvalue of the observable (every output state is
    reachable, e.g. by a replace-with-state channel). free_energy max: the
    Gibbs variational value log(Tr exp(-beta O)) / beta. The generation
    functionals vanish exactly at their targets.
    """
    if obj.kind == "expectation":
        w = np.linalg.eigvalsh(obj.observable)
        return float(w[-1]) if obj.direction == "max" else float(w[0])
    if obj.kind == "free_energy" and obj.direction == "max":
        w = np.linalg.eigvalsh(obj.observable)
        shift = float(np.max(-obj.beta * w))
        return (shift + float(np.log(np.sum(np.exp(-obj.beta * w - shift))))) / obj.beta
    if obj.kind in ("channel_gen", "gate_gen", "grk") and obj.direction == "min":
        return 0.0
    return None


def multi_start(obj: Objective, n_starts: int, cfg: OptimizerConfig) -> LandscapeReport:
    """Independent descent runs from Haar-random starts, folded into a report.

    Per-run failures (line-search stall, singular entropy spectrum) are
    recorded on the run and excluded from the converged statistics; they never
    abort the batch. Trap suspects are converged runs whose value misses the
    oracle (or the best converged value when no oracle exists) by more than
    trap_tol.
    """
    if n_starts < 1:
        raise BadParameter(f"n_starts must be >= 1, got {n_starts}")
    base = int(cfg.seed) & SEED_MASK
    runs = [
        riemannian_gd(obj, random_stiefel(obj.dims, np.random.default_rng([base, i])), cfg)
        for i in range(n_starts)
    ]
    return summarize_runs(obj, runs)


def summarize_runs(
    obj: Objective, runs: list[RunResult], trap_tol: float = 1e-6
) -> LandscapeReport:
    oracle = known_global_value(obj)
    better = min if obj.direction == "min" else max
    worse = max if obj.direction == "min" else min
    converged_vals = [r.final_value for r in runs if r.converged]
    pool = converged_vals if converged_vals else [r.final_value for r in runs]
    best = float(better(pool))
    worst_conv = float(worse(converged_vals)) if converged_vals else float("nan")
    spread = abs(worst_conv - best) if converged_vals else float("nan")
    reference = oracle if oracle is not None else best
    suspects = [
        i
        for i, r in enumerate(runs)
        if r.converged and abs(r.final_value - reference) > trap_tol
    ]
    return LandscapeReport(
        runs=runs,
        best_value=best,
        worst_converged_value=worst_conv,
        spread=spread,
        global_oracle=oracle,
        trap_suspects=suspects,
        trap_tol=trap_tol,
    )


@dataclass(frozen=True)
class NeighborhoodReport:
    """Sampled neighborhood extrema around a candidate optimum.

    manifold_* are objective values at retracted tangent perturbations;
    choi_* re-evaluate the same perturbed points after projecting through
    their Choi matrices (minimal Kraus), checking that extremality on the
    manifold and extremality over channels agree. improvement_* is how much a
    sampled neighbor beat the center in the optimization direction.
    """

    center_value: float
    manifold_min: float
    manifold_max: float
    choi_min: float
    choi_max: float
    improvement_manifold: float
    improvement_choi: float


def extrema_correspondence_check(
    obj: Objective,
    point: StiefelPoint,
    radius: float,
    samples: int,
    seed: int = 0,
) -> NeighborhoodReport:
    """Sample tangent perturbations of norm <= radius around a candidate optimum."""
    if point.dims != obj.dims:
        raise DimMismatch(f"objective dims {obj.dims} but point dims {point.dims}")
    rng = np.random.default_rng(int(seed) & SEED_MASK)
    center = value(obj, point)
    shape = point.matrix.shape
    manifold_vals = np.empty(samples)
    choi_vals = np.empty(samples)
    for s in range(samples):
        raw = rng.standard_normal(shape) + 1j * rng.standard_normal(shape)
        delta = project_tangent(point, raw)
        norm = float(np.linalg.norm(delta))
        if norm > 0:
            delta *= radius * rng.uniform(0.0, 1.0) / norm
        neighbor = retract_polar(point, delta)
        manifold_vals[s] = value(obj, neighbor)
        choi = kraus_to_choi(stiefel_to_kraus(neighbor))
        choi_vals[s] = value(obj, kraus_to_stiefel(choi_to_minimal_kraus(choi)))
    if obj.direction == "min":
        imp_manifold = max(0.0, center - float(manifold_vals.min()))
        imp_choi = max(0.0, center - float(choi_vals.min()))
    else:
        imp_manifold = max(0.0, float(manifold_vals.max()) - center)
        imp_choi = max(0.0, float(choi_vals.max()) - center)
    return NeighborhoodReport(
        center_value=center,
        manifold_min=float(manifold_vals.min()),
        manifold_max=float(manifold_vals.max()),
        choi_min=float(choi_vals.min()),
        choi_max=float(choi_vals.max()),
        improvement_manifold=imp_manifold,
        improvement_choi=imp_choi,
    )


def write_traces_csv(report: LandscapeReport, path) -> None:
    """Per-iteration traces as CSV with columns run, iter, value, grad_norm, step."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["run", "iter", "value", "grad_norm", "step"])
        for run_idx, run in enumerate(report.runs):
            for it, val in enumerate(run.value_trace):
                gnorm = run.grad_norm_trace[it] if it < len(run.grad_norm_trace) else ""
                step = run.step_trace[it] if it < len(run.step_trace) else ""
                writer.writerow([run_idx, it, repr(val), repr(gnorm) if gnorm != "" else "", repr(step) if step != "" else ""])
