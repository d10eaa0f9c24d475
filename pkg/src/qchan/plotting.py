"""Render optimization reports as figures written to files.

Used by `qchan optimize --plot`; figures land next to the CSV traces so a
batch run leaves both machine-readable and eyeball-readable artifacts.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .optimize import LandscapeReport


def save_landscape_figure(report: LandscapeReport, path) -> None:
    """Two panels: raw value traces, and log-scale gap to the oracle/best."""
    reference = report.global_oracle
    if reference is None:
        reference = report.best_value
    fig, (ax_val, ax_gap) = plt.subplots(1, 2, figsize=(10, 4), constrained_layout=True)
    for idx, run in enumerate(report.runs):
        trace = np.asarray(run.value_trace, dtype=float)
        iters = np.arange(trace.size)
        style = "-" if run.converged else ":"
        ax_val.plot(iters, trace, style, lw=0.9, alpha=0.8)
        gap = np.abs(trace - reference)
        ax_gap.semilogy(iters, np.maximum(gap, 1e-18), style, lw=0.9, alpha=0.8)
    if report.global_oracle is not None:
        ax_val.axhline(report.global_oracle, color="k", lw=0.8, ls="--", label="global oracle")
        ax_val.legend(loc="best", fontsize=8)
    ax_val.set_xlabel("iteration")
    ax_val.set_ylabel("objective value")
    ax_val.set_title(f"{len(report.runs)} runs, {len(report.trap_suspects)} trap suspects")
    ax_gap.set_xlabel("iteration")
    ax_gap.set_ylabel("|value - reference|")
    ax_gap.set_title("gap to oracle" if report.global_oracle is not None else "gap to best run")
    fig.savefig(path, dpi=150)
    plt.close(fig)
