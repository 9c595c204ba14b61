"""Command-line interface: ``consensus-kit <command> ...``.

Exit status: 0 success (warnings go into the report), 1 malformed input,
2 invariant violated during the run, 3 budget exhausted.
"""
import argparse
import json
import os
import sys

import numpy as np

from . import __version__
from .convergence import check_theorem
from .errors import BudgetExhausted, ConsensusKitError, MonotonicityViolation
from .gantmacher import gantmacher_form
from .growth import GeneratorSpec, designed_pattern, generate_sequence, growth_experiment, series_partial_sums
from .io import (
    load_json,
    matrix_from_json,
    sequence_from_json,
    sequence_to_json,
    write_csv,
    write_json,
)
from .schedule import detect_schedule, window_accumulations
from .sources import check_dimension
from .spectral import jsr_bounds, transformed_set
from .stochastic import EPS_C, EPS_ROW, EPS_Z
from . import kernels

EXIT_INPUT = 1
EXIT_INVARIANT = 2
EXIT_BUDGET = 3


def _tolerances(args):
    return {"eps_z": args.eps_z, "eps_row": args.eps_row, "eps_c": args.eps_c}


def _out(args, name):
    if args.out_dir is None:
        return None
    os.makedirs(args.out_dir, exist_ok=True)
    return os.path.join(args.out_dir, name)


def _emit(args, name, report):
    report.setdefault("tolerances", _tolerances(args))
    report.setdefault("warnings", [])
    write_json(None, report)
    path = _out(args, name)
    if path:
        write_json(path, report)


def _load_sequence(args):
    return sequence_from_json(load_json(args.input), eps_row=args.eps_row, renormalize=args.renormalize)


def _load_x0(spec):
    if os.path.exists(spec):
        obj = load_json(spec)
        return np.asarray(obj["values"] if isinstance(obj, dict) else obj, dtype=np.float64)
    return np.asarray([float(v) for v in spec.split(",")], dtype=np.float64)


def cmd_gantmacher(args):
    obj = load_json(args.input)
    if "rows" in obj:
        a = matrix_from_json(obj, args.eps_row, args.renormalize)
    else:
        a = sequence_from_json(obj, args.eps_row, args.renormalize).factor(args.index)
    report = gantmacher_form(a, args.eps_z).to_dict()
    _emit(args, "gantmacher.json", report)


def cmd_schedule(args):
    seq = _load_sequence(args)
    sched = detect_schedule(seq, horizon=args.horizon, eps_z=args.eps_z,
                            confirm=args.confirm, direction=args.direction)
    _emit(args, "schedule.json", sched.to_dict())


def cmd_check(args):
    seq = _load_sequence(args)
    sched = detect_schedule(seq, eps_z=args.eps_z, confirm=args.confirm)
    x0 = _load_x0(args.x0) if args.x0 else None
    if x0 is not None:
        check_dimension(seq, x0.shape[0])
    rep = check_theorem(seq, sched, x0=x0, horizon=args.horizon, eps_c=args.eps_c,
                        eps_z=args.eps_z, delta=args.delta)
    out = rep.to_dict()
    out["schedule"] = sched.to_dict(gantmacher=True)
    out["warnings"] = list(sched.warnings) + out["warnings"]
    out["tolerances"] = dict(_tolerances(args), delta_override=args.delta)
    _emit(args, "check.json", out)
    csv_path = args.csv or _out(args, "check_trajectory.csv")
    if csv_path:
        header, rows = rep.trajectory_rows()
        write_csv(csv_path, header, rows)


def cmd_jsr(args):
    seq = _load_sequence(args)
    warnings = []
    if args.project:
        sched = detect_schedule(seq, eps_z=args.eps_z)
        if sched.common_pattern is None:
            raise ConsensusKitError("no stabilized windows to project")
        from .gantmacher import gantmacher_form_of_pattern

        form = gantmacher_form_of_pattern(sched.common_pattern)
        wins = window_accumulations(seq, sched, limit=args.windows)
        mats = transformed_set(wins, form)
        warnings += list(sched.warnings)
    else:
        mats = list(seq.stack(0, len(seq)))
    b = jsr_bounds(mats, args.max_len, budget=args.budget)
    if b.truncated:
        warnings.append(f"Explosion: stopped at length {b.max_length} within budget {args.budget}")
    out = b.to_dict()
    out["set_size"] = len(mats)
    out["warnings"] = warnings
    _emit(args, "jsr.json", out)


def _spec_from_args(args):
    if getattr(args, "spec", None):
        obj = load_json(args.spec)
        return GeneratorSpec.from_dict(obj.get("generator", obj))
    pattern = None
    if args.classes:
        pattern = tuple(map(tuple, designed_pattern(args.n, args.classes, args.seed)))
    return GeneratorSpec(n=args.n, steps=args.steps, delta=args.delta, gap_mode=args.mode,
                         gap_param=args.a, seed=args.seed, pattern=pattern,
                         activation=args.activation)


def cmd_growth(args):
    spec = _spec_from_args(args)
    out = {"experiment": growth_experiment(spec, eps_c=args.eps_c)}
    if spec.gap_mode in ("log", "loglog"):
        series = series_partial_sums(spec.gap_mode, spec.delta, spec.gap_param, args.terms)
        out["series"] = series.to_dict()
        if args.out:
            write_csv(args.out, ["n", "term", "partial_sum"], series.samples)
    out["warnings"] = []
    if out["experiment"]["hypothesis_fails"]:
        out["warnings"].append("designed sum of delta**gap converges: divergence of sum delta_i "
                               "is not guaranteed")
    _emit(args, "growth.json", out)


def cmd_gen(args):
    seq = generate_sequence(_spec_from_args(args))
    obj = sequence_to_json(seq)
    path = args.out or _out(args, "sequence.json")
    write_json(path, obj)


def cmd_simulate(args):
    seq = _load_sequence(args)
    x0 = _load_x0(args.x0)
    check_dimension(seq, x0.shape[0])
    steps = len(seq) if args.steps is None else min(args.steps, len(seq))
    traj = kernels.propagate(seq.stack(0, steps), x0)
    header = ["t"] + [f"x_{i}" for i in range(seq.n)] + ["min", "max"]
    rows = [[t] + row.tolist() + [float(row.min()), float(row.max())] for t, row in enumerate(traj)]
    write_csv(args.out or _out(args, "trajectory.csv"), header, rows)


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--eps-z", type=float, default=EPS_Z, help="positivity threshold")
    common.add_argument("--eps-row", type=float, default=EPS_ROW, help="row-sum tolerance")
    common.add_argument("--eps-c", type=float, default=EPS_C, help="consensus tolerance")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--out-dir", default=None)
    common.add_argument("--renormalize", action="store_true", help="rescale input rows to sum 1")

    p = argparse.ArgumentParser(prog="consensus-kit", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("gantmacher", parents=[common], help="Gantmacher form of one matrix")
    s.add_argument("input")
    s.add_argument("--index", type=int, default=0, help="factor to use from a sequence file")
    s.set_defaults(func=cmd_gantmacher)

    s = sub.add_parser("schedule", parents=[common], help="detect stabilization times")
    s.add_argument("input")
    s.add_argument("--horizon", type=int, default=None)
    s.add_argument("--confirm", type=int, default=None)
    s.add_argument("--direction", choices=["backward", "forward"], default="backward")
    s.set_defaults(func=cmd_schedule)

    s = sub.add_parser("check", parents=[common], help="convergence check along the schedule")
    s.add_argument("input")
    s.add_argument("--horizon", type=int, default=None, help="maximum number of windows")
    s.add_argument("--confirm", type=int, default=None)
    s.add_argument("--x0", default=None, help="JSON file or comma-separated opinions")
    s.add_argument("--delta", type=float, default=None, help="uniform delta override")
    s.add_argument("--csv", default=None, help="trajectory CSV path")
    s.set_defaults(func=cmd_check)

    s = sub.add_parser("jsr", parents=[common], help="joint spectral radius bounds")
    s.add_argument("input")
    s.add_argument("--max-len", type=int, default=4)
    s.add_argument("--budget", type=int, default=10**6)
    s.add_argument("--project", action="store_true",
                   help="use the projected window matrices instead of the raw factors")
    s.add_argument("--windows", type=int, default=8, help="windows to project with --project")
    s.set_defaults(func=cmd_jsr)

    def gen_flags(s):
        s.add_argument("--spec", default=None, help="generator spec JSON (overrides flags)")
        s.add_argument("--mode", choices=["bounded", "log", "loglog"], default="bounded")
        s.add_argument("--delta", type=float, default=0.1)
        s.add_argument("--a", type=float, default=1.0, help="N for bounded, a for log/loglog")
        s.add_argument("--n", type=int, default=3)
        s.add_argument("--steps", type=int, default=10**4)
        s.add_argument("--classes", type=int, default=0,
                       help="essential classes of a designed pattern (0: all positive)")
        s.add_argument("--activation", choices=["full", "random"], default="full")

    s = sub.add_parser("growth", parents=[common], help="interval-growth experiment and series")
    gen_flags(s)
    s.add_argument("--terms", type=int, default=10**6)
    s.add_argument("--out", default=None, help="series CSV (n, term, partial_sum)")
    s.set_defaults(func=cmd_growth)

    s = sub.add_parser("gen", parents=[common], help="materialise a generated sequence")
    gen_flags(s)
    s.add_argument("--out", default=None)
    s.set_defaults(func=cmd_gen)

    s = sub.add_parser("simulate", parents=[common], help="opinion trajectory x(t) = A(t,0) x0")
    s.add_argument("input")
    s.add_argument("--x0", required=True)
    s.add_argument("--steps", type=int, default=None)
    s.add_argument("--out", default=None)
    s.set_defaults(func=cmd_simulate)
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        args.func(args)
    except MonotonicityViolation as exc:
        write_json(None, {"error": "MonotonicityViolation", "message": str(exc),
                          "witness": {"window": exc.window, "column": exc.column,
                                      "kind": exc.kind, "before": exc.before,
                                      "after": exc.after}})
        return EXIT_INVARIANT
    except BudgetExhausted as exc:
        print(f"consensus-kit: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    except (ConsensusKitError, ValueError, KeyError, TypeError, OSError,
            json.JSONDecodeError) as exc:
        print(f"consensus-kit: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INPUT
    return 0


if __name__ == "__main__":
    sys.exit(main())
