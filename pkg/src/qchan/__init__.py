"""Quantum channels as points of complex Stiefel manifolds.

Choi/Kraus/Stiefel conversions, the unitary-orbit geometry of the
parametrization, the induced channel metric, kinematic objective functionals
with analytic gradients, and a multi-start Riemannian descent harness that
certifies the absence of suboptimal local extrema.
"""

from .channels import (
    ChannelDims,
    ChoiMatrix,
    KrausSet,
    StiefelPoint,
    ValidationReport,
    apply_choi,
    apply_kraus,
    choi_to_minimal_kraus,
    choi_to_stiefel_sqrt,
    depolarize_to_state,
    erasing_channel,
    identity_channel,
    kraus_rank,
    kraus_to_choi,
    kraus_to_stiefel,
    partial_trace_channel,
    phase_erasing_channel,
    stiefel_to_kraus,
    superoperator_matrix,
    unitary_channel,
    validate,
)
from .geometry import (
    channel_distance,
    channel_distance_closed_form,
    orbit_align,
    orbit_parametrize,
    project_tangent,
    random_choi,
    random_isometry,
    random_stiefel,
    random_unitary,
    retract_polar,
    retract_qr,
    same_orbit,
    unitary_act,
)
from .objectives import (
    Objective,
    channel_generation,
    convexity_probe,
    euclidean_gradient,
    expectation,
    free_energy,
    gate_generation,
    grk_default_states,
    grk_gate_generation,
    riemannian_gradient,
    value,
)
from .optimize import (
    LandscapeReport,
    NeighborhoodReport,
    OptimizerConfig,
    RunResult,
    extrema_correspondence_check,
    known_global_value,
    multi_start,
    riemannian_gd,
    summarize_runs,
    write_traces_csv,
)
from . import errors, linalg

__version__ = "0.1.0"
