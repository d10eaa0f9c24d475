"""Command-line front end.

    qchan validate <channel.json>
    qchan convert  <channel.json> --to choi|kraus-min|kraus-sqrt [--out FILE]
    qchan apply    <channel.json> <state.json>
    qchan distance <a.json> <b.json> [--kind stiefel|bures-choi|frobenius-choi]
    qchan optimize <objective.json> [--starts N] [--seed S] [--trace FILE.csv]
                   [--plot FILE.png] [--max-iters N] [--grad-tol X]
    qchan examples --name identity|unitary|erasing|phase-erasing|partial-trace|depolarize
                   [params...] [--out FILE]

stdout carries exactly one JSON document (one scalar for distance);
diagnostics go to stderr. Exit codes: 0 success, 1 invalid input, 2 not CPTP,
3 no optimization run converged, 4 internal numerical failure. QCHAN_SEED is
the fallback seed when --seed is not given.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from .channels import (
    ChoiMatrix,
    KrausSet,
    apply_kraus,
    choi_to_minimal_kraus,
    choi_to_stiefel_sqrt,
    depolarize_to_state,
    erasing_channel,
    identity_channel,
    kraus_to_choi,
    partial_trace_channel,
    phase_erasing_channel,
    stiefel_to_kraus,
    unitary_channel,
    validate,
)
from .errors import NotCPTP, QChanError
from .geometry import channel_distance_closed_form, orbit_align
from .jsonio import (
    channel_from_dict,
    channel_to_dict,
    data_to_matrix,
    landscape_report_to_dict,
    objective_from_dict,
    state_from_dict,
    state_to_dict,
)
from .optimize import OptimizerConfig, multi_start, write_traces_csv

EXIT_OK = 0
EXIT_INVALID_INPUT = 1
EXIT_NOT_CPTP = 2
EXIT_NOT_CONVERGED = 3
EXIT_NUMERICAL = 4


class _Parser(argparse.ArgumentParser):
    """Argument errors are invalid input (exit 1), not argparse's default 2."""

    def error(self, message):
        self.print_usage(sys.stderr)
        raise SystemExit(EXIT_INVALID_INPUT)


def _load_json(path: str):
    with open(path, "r", encoding="utf-8") as fh:
        return json.load(fh)


def _print_json(doc) -> None:
    sys.stdout.write(json.dumps(doc, indent=2) + "\n")


def _as_choi(channel) -> ChoiMatrix:
    if isinstance(channel, KrausSet):
        return kraus_to_choi(channel)
    return channel


def _require_cptp(channel) -> ChoiMatrix:
    rep = validate(channel)
    if not rep.is_cptp:
        sys.stderr.write(
            f"not CPTP: min eigenvalue {rep.min_eigenvalue:.3e}, "
            f"tp residual {rep.tp_residual:.3e}\n"
        )
        raise SystemExit(EXIT_NOT_CPTP)
    return _as_choi(channel)


def _cmd_validate(args) -> int:
    channel = channel_from_dict(_load_json(args.channel))
    rep = validate(channel)
    _print_json(
        {
            "min_eigenvalue": rep.min_eigenvalue,
            "tp_residual": rep.tp_residual,
            "entry_bound_violation": rep.entry_bound_violation,
            "is_cptp": rep.is_cptp,
        }
    )
    return EXIT_OK if rep.is_cptp else EXIT_NOT_CPTP


def _cmd_convert(args) -> int:
    channel = channel_from_dict(_load_json(args.channel))
    choi = _require_cptp(channel)
    if args.to == "choi":
        out = choi
    elif args.to == "kraus-min":
        out = choi_to_minimal_kraus(choi)
    else:  # kraus-sqrt
        out = stiefel_to_kraus(choi_to_stiefel_sqrt(choi))
    doc = channel_to_dict(out)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            json.dump(doc, fh, indent=2)
            fh.write("\n")
    _print_json(doc)
    return EXIT_OK


def _cmd_apply(args) -> int:
    from .objectives import check_density_matrix

    channel = channel_from_dict(_load_json(args.channel))
    rho = state_from_dict(_load_json(args.state))
    rho = check_density_matrix(rho, rho.shape[0])
    choi = _require_cptp(channel)
    kraus = choi_to_minimal_kraus(choi)
    out = apply_kraus(kraus, rho)
    _print_json(state_to_dict(out))
    return EXIT_OK


def _cmd_distance(args) -> int:
    a = channel_from_dict(_load_json(args.a))
    b = channel_from_dict(_load_json(args.b))
    choi_a = _require_cptp(a)
    choi_b = _require_cptp(b)
    if choi_a.dims != choi_b.dims:
        sys.stderr.write(f"dimension mismatch: {choi_a.dims} vs {choi_b.dims}\n")
        return EXIT_INVALID_INPUT
    if args.kind == "frobenius-choi":
        dist = float(np.linalg.norm(choi_a.matrix - choi_b.matrix))
    elif args.kind == "bures-choi":
        dist = channel_distance_closed_form(choi_a, choi_b)
    else:  # stiefel: Procrustes alignment of canonical sections
        _, dist = orbit_align(choi_to_stiefel_sqrt(choi_a), choi_to_stiefel_sqrt(choi_b))
    sys.stdout.write(repr(dist) + "\n")
    return EXIT_OK


def _cmd_optimize(args) -> int:
    obj = objective_from_dict(_load_json(args.objective))
    seed = args.seed
    if seed is None:
        seed = int(os.environ.get("QCHAN_SEED", "0"))
    cfg = OptimizerConfig(
        max_iters=args.max_iters,
        grad_tol=args.grad_tol,
        initial_step=args.initial_step,
        seed=seed,
    )
    report = multi_start(obj, args.starts, cfg)
    if args.trace:
        write_traces_csv(report, args.trace)
    if args.plot:
        from .plotting import save_landscape_figure

        save_landscape_figure(report, args.plot)
    _print_json(landscape_report_to_dict(report))
    if not any(r.converged for r in report.runs):
        return EXIT_NOT_CONVERGED
    return EXIT_OK


def _cmd_examples(args) -> int:
    name = args.name
    if name == "identity":
        channel = identity_channel(args.n)
    elif name == "unitary":
        if not args.w:
            sys.stderr.write("unitary example needs --w FILE with a matrix\n")
            return EXIT_INVALID_INPUT
        channel = unitary_channel(data_to_matrix(_load_json(args.w)))
    elif name == "erasing":
        channel = erasing_channel(args.epsilon)
    elif name == "phase-erasing":
        channel = phase_erasing_channel(args.epsilon)
    elif name == "partial-trace":
        channel = partial_trace_channel(args.k, args.l, args.which)
    else:  # depolarize
        sigma = data_to_matrix(_load_json(args.sigma)) if args.sigma else np.eye(args.n) / args.n
        channel = depolarize_to_state(args.n, sigma, args.p)
    doc = channel_to_dict(channel, label=name)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            json.dump(doc, fh, indent=2)
            fh.write("\n")
    _print_json(doc)
    return EXIT_OK


def _build_parser() -> _Parser:
    parser = _Parser(prog="qchan", description="Quantum channels on Stiefel manifolds")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="CPTP diagnostics for a channel file")
    p.add_argument("channel")
    p.set_defaults(func=_cmd_validate)

    p = sub.add_parser("convert", help="convert between channel representations")
    p.add_argument("channel")
    p.add_argument("--to", required=True, choices=["choi", "kraus-min", "kraus-sqrt"])
    p.add_argument("--out", default=None)
    p.set_defaults(func=_cmd_convert)

    p = sub.add_parser("apply", help="apply a channel to a state")
    p.add_argument("channel")
    p.add_argument("state")
    p.set_defaults(func=_cmd_apply)

    p = sub.add_parser("distance", help="distance between two channels")
    p.add_argument("a")
    p.add_argument("b")
    p.add_argument(
        "--kind",
        default="stiefel",
        choices=["stiefel", "bures-choi", "frobenius-choi"],
    )
    p.set_defaults(func=_cmd_distance)

    p = sub.add_parser("optimize", help="multi-start Riemannian descent on an objective")
    p.add_argument("objective")
    p.add_argument("--starts", type=int, default=20)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--trace", default=None, help="write per-run traces as CSV")
    p.add_argument("--plot", default=None, help="render convergence figure to this file")
    p.add_argument("--max-iters", type=int, default=5000)
    p.add_argument("--grad-tol", type=float, default=1e-8)
    p.add_argument("--initial-step", type=float, default=1.0)
    p.set_defaults(func=_cmd_optimize)

    p = sub.add_parser("examples", help="emit one of the stock example channels")
    p.add_argument(
        "--name",
        required=True,
        choices=["identity", "unitary", "erasing", "phase-erasing", "partial-trace", "depolarize"],
    )
    p.add_argument("--n", type=int, default=2)
    p.add_argument("--epsilon", type=float, default=0.5)
    p.add_argument("--k", type=int, default=2)
    p.add_argument("--l", type=int, default=2)
    p.add_argument("--which", default="second", choices=["first", "second"])
    p.add_argument("--p", type=float, default=0.5)
    p.add_argument("--w", default=None, help="JSON file with the gate matrix")
    p.add_argument("--sigma", default=None, help="JSON file with the target state matrix")
    p.add_argument("--out", default=None)
    p.set_defaults(func=_cmd_examples)
    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except SystemExit as exc:
        return int(exc.code or 0)
    except NotCPTP as exc:
        sys.stderr.write(f"{exc}\n")
        return EXIT_NOT_CPTP
    except (OSError, json.JSONDecodeError, QChanError, KeyError, TypeError) as exc:
        sys.stderr.write(f"invalid input: {exc}\n")
        return EXIT_INVALID_INPUT
    except (np.linalg.LinAlgError, FloatingPointError, ArithmeticError) as exc:
        sys.stderr.write(f"numerical failure: {exc}\n")
        return EXIT_NUMERICAL


def entry() -> None:
    sys.exit(main())
