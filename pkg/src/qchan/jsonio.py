"""JSON wire formats shared by the library and the CLI.

Complex scalars are two-element arrays [re, im]; matrices are row-major
nested arrays of those pairs; a Kraus set is an array of matrices. Channel
documents look like

    {"n": 2, "m": 2, "repr": "choi" | "kraus", "data": ..., "label": "..."}

and objective documents like

    {"kind": "gate_gen", "direction": "min", "gate": [[...]], ...}.

Floats pass through Python's repr, which round-trips doubles exactly.
"""

from __future__ import annotations

import numpy as np

from .channels import ChannelDims, ChoiMatrix, KrausSet
from .errors import BadParameter
from .objectives import (
    Objective,
    channel_generation,
    expectation,
    free_energy,
    gate_generation,
    grk_gate_generation,
)

OBJECTIVE_KINDS = ("expectation", "free_energy", "channel_gen", "gate_gen", "grk")


def matrix_to_data(A: np.ndarray) -> list:
    A = np.asarray(A, dtype=np.complex128)
    return [[[float(z.real), float(z.imag)] for z in row] for row in A]


def data_to_matrix(data) -> np.ndarray:
    if not isinstance(data, list) or not data:
        raise BadParameter("matrix data must be a non-empty nested list")
    rows = len(data)
    if not isinstance(data[0], list) or not data[0]:
        raise BadParameter("matrix rows must be non-empty lists")
    cols = len(data[0])
    out = np.empty((rows, cols), dtype=np.complex128)
    for i, row in enumerate(data):
        if not isinstance(row, list) or len(row) != cols:
            raise BadParameter("matrix rows must all have the same length")
        for j, entry in enumerate(row):
            if not (isinstance(entry, list) and len(entry) == 2):
                raise BadParameter("complex entries must be [re, im] pairs")
            out[i, j] = complex(float(entry[0]), float(entry[1]))
    return out


def channel_to_dict(channel: ChoiMatrix | KrausSet, label: str | None = None) -> dict:
    doc: dict = {"n": channel.dims.n, "m": channel.dims.m}
    if isinstance(channel, ChoiMatrix):
        doc["repr"] = "choi"
        doc["data"] = matrix_to_data(channel.matrix)
    elif isinstance(channel, KrausSet):
        doc["repr"] = "kraus"
        doc["data"] = [matrix_to_data(K) for K in channel.operators]
    else:
        raise BadParameter(f"cannot serialize {type(channel).__name__}")
    if label is not None:
        doc["label"] = label
    return doc


def channel_from_dict(doc) -> ChoiMatrix | KrausSet:
    if not isinstance(doc, dict):
        raise BadParameter("channel document must be a JSON object")
    try:
        dims = ChannelDims(int(doc["n"]), int(doc["m"]))
        repr_kind = doc["repr"]
        data = doc["data"]
    except (KeyError, TypeError, ValueError) as exc:
        raise BadParameter(f"channel document missing or malformed field: {exc}") from exc
    if repr_kind == "choi":
        return ChoiMatrix(dims, data_to_matrix(data))
    if repr_kind == "kraus":
        if not isinstance(data, list) or not data:
            raise BadParameter("kraus data must be a non-empty array of matrices")
        return KrausSet(dims, tuple(data_to_matrix(K) for K in data))
    raise BadParameter(f"unknown channel repr {repr_kind!r}")


def state_to_dict(rho: np.ndarray) -> dict:
    rho = np.asarray(rho, dtype=np.complex128)
    return {"n": int(rho.shape[0]), "matrix": matrix_to_data(rho)}


def state_from_dict(doc) -> np.ndarray:
    if not isinstance(doc, dict) or "matrix" not in doc:
        raise BadParameter("state document must be an object with a 'matrix' field")
    rho = data_to_matrix(doc["matrix"])
    if "n" in doc and rho.shape != (int(doc["n"]), int(doc["n"])):
        raise BadParameter("state dimension field disagrees with the matrix shape")
    return rho


def objective_to_dict(obj: Objective) -> dict:
    doc: dict = {"kind": obj.kind, "direction": obj.direction}
    if obj.kind in ("expectation", "free_energy"):
        doc["observable"] = matrix_to_data(obj.observable)
        doc["rho0"] = matrix_to_data(obj.rho0)
        if obj.kind == "free_energy":
            doc["beta"] = obj.beta
    elif obj.kind == "channel_gen":
        doc["target"] = channel_to_dict(obj.target_choi)
    elif obj.kind in ("gate_gen", "grk"):
        doc["gate"] = matrix_to_data(obj.gate)
        if obj.kind == "grk":
            doc["states"] = [matrix_to_data(r) for r in obj.grk_states]
    return doc


def objective_from_dict(doc) -> Objective:
    if not isinstance(doc, dict):
        raise BadParameter("objective document must be a JSON object")
    kind = doc.get("kind")
    if kind not in OBJECTIVE_KINDS:
        raise BadParameter(f"unknown objective kind {kind!r}")
    direction = doc.get("direction", "max" if kind in ("expectation", "free_energy") else "min")
    try:
        if kind == "expectation":
            return expectation(
                data_to_matrix(doc["observable"]), data_to_matrix(doc["rho0"]), direction
            )
        if kind == "free_energy":
            return free_energy(
                data_to_matrix(doc["observable"]),
                data_to_matrix(doc["rho0"]),
                float(doc["beta"]),
                direction,
            )
        if kind == "channel_gen":
            return channel_generation(channel_from_dict(doc["target"]), direction)
        if kind == "gate_gen":
            return gate_generation(data_to_matrix(doc["gate"]), direction)
        states = doc.get("states")
        if states is not None:
            states = tuple(data_to_matrix(r) for r in states)
        return grk_gate_generation(data_to_matrix(doc["gate"]), states, direction)
    except KeyError as exc:
        raise BadParameter(f"objective document missing field {exc}") from exc


def landscape_report_to_dict(report) -> dict:
    """Summary document for a LandscapeReport; per-iteration traces go to CSV."""
    oracle = report.global_oracle
    return {
        "best_value": report.best_value,
        "worst_converged_value": _nan_to_none(report.worst_converged_value),
        "spread": _nan_to_none(report.spread),
        "global_oracle": oracle,
        "trap_tol": report.trap_tol,
        "trap_suspects": list(report.trap_suspects),
        "n_runs": len(report.runs),
        "n_converged": sum(1 for r in report.runs if r.converged),
        "search_space": "entire Stiefel parametrization; dynamical reachability constraints are not modeled",
        "runs": [
            {
                "final_value": r.final_value,
                "final_grad_norm": _nan_to_none(r.final_grad_norm),
                "iterations": r.iterations,
                "converged": r.converged,
                "failure": r.failure,
            }
            for r in report.runs
        ],
    }


def _nan_to_none(x: float):
    if x is None:
        return None
    x = float(x)
    if np.isnan(x) or np.isinf(x):
        return None
    return x
