"""Command-line interface.

Subcommands:
    jump-table    run scheme/ratio sweeps on the jump problem, emit rate tables
    smooth-verify measure orders against the exact smooth solution
    similarity    profile / diff / ratio oracles as CSV or scalars
    run           one integration, snapshot dumped as CSV

Exit status: 0 on success, 1 on configuration or usage errors, 2 on numerical
failures (instability, precision loss, truncated quadrature).
"""

from __future__ import annotations

import argparse
import sys
from fractions import Fraction
from pathlib import Path

import numpy as np

from .grid import Grid1D, JumpIC, make_jump_function, write_grid_function_csv
from .harness import (
    ExperimentConfig,
    config_from_mapping,
    jump_rows_csv,
    jump_rows_table,
    load_config_file,
    run_jump_table,
    run_smooth_table,
    smooth_rows_csv,
)
from .richardson import IndeterminateRateError, NoValidRateError
from .schemes import SchemeSpec, StabilityError, integrate_to
from .similarity import (
    PrecisionLossError,
    TailTruncationError,
    erf_profile,
    godunov2_similarity_profile,
    scaled_frame_difference,
    scaled_ratio_quadrature,
    write_samples_csv,
)

NUMERICAL_ERRORS = (
    StabilityError,
    PrecisionLossError,
    TailTruncationError,
    NoValidRateError,
    IndeterminateRateError,
)


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="jumprates",
        description="Convergence-rate estimation workbench for advection with jumps",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p: argparse.ArgumentParser) -> None:
        p.add_argument("--config", type=Path, help="flat key=value config file")
        p.add_argument("--scheme", help="comma-separated scheme kinds")
        p.add_argument("--lambda", dest="lam", type=float, help="CFL number")
        p.add_argument("--a", type=float, help="advection speed")
        p.add_argument("--t-final", type=float, help="final time")
        p.add_argument("--out", type=Path, help="output directory")

    p_jump = sub.add_parser("jump-table", help="reproduce the jump rate tables")
    add_common(p_jump)
    p_jump.add_argument("--base-n", type=int, help="base resolution point count")
    p_jump.add_argument("--ratio", help="comma-separated refinement ratios, e.g. 1/2,2/5")
    p_jump.add_argument("--jobs", type=int, default=1, help="parallel integration workers")

    p_smooth = sub.add_parser("smooth-verify", help="measure smooth-solution orders")
    add_common(p_smooth)
    p_smooth.add_argument(
        "--n", default="201,401,801", help="comma-separated resolutions"
    )

    p_sim = sub.add_parser("similarity", help="similarity-profile oracles")
    sim_sub = p_sim.add_subparsers(dest="sim_command", required=True)

    p_prof = sim_sub.add_parser("profile", help="tabulate S(xi)")
    p_prof.add_argument("--order", type=int, choices=(1, 2), required=True)
    p_prof.add_argument("--xi-max", type=float, default=10.0)
    p_prof.add_argument("--samples", type=int, default=801)
    p_prof.add_argument("--out", type=Path)

    p_diff = sim_sub.add_parser("diff", help="tabulate scaled-frame differences")
    p_diff.add_argument("--order", type=int, choices=(1, 2), required=True)
    p_diff.add_argument("--h-a", type=float, required=True)
    p_diff.add_argument("--h-b", type=float, required=True)
    p_diff.add_argument("--samples", type=int, default=1201)
    p_diff.add_argument("--out", type=Path)

    p_ratio = sim_sub.add_parser("ratio", help="ratio of scaled-difference integrals")
    p_ratio.add_argument("--order", type=int, choices=(1, 2), required=True)
    p_ratio.add_argument("--stretch-num", type=float, required=True)
    p_ratio.add_argument("--stretch-den", type=float, required=True)

    p_run = sub.add_parser("run", help="single integration, snapshot CSV")
    add_common(p_run)
    p_run.add_argument("--n", type=int, required=True, help="grid point count")
    p_run.add_argument(
        "--ratio-step",
        default="none",
        choices=("none",),
        help="refinement stepping; only 'none' (single run) is supported",
    )
    p_run.add_argument("--u-left", type=float, default=-1.0)
    p_run.add_argument("--u-right", type=float, default=1.0)
    p_run.add_argument("--x-left", type=float, default=-np.pi)
    p_run.add_argument("--x-right", type=float, default=np.pi)
    return parser


def _gather_config(args: argparse.Namespace) -> ExperimentConfig:
    values: dict[str, str] = {}
    if getattr(args, "config", None):
        values.update(load_config_file(args.config))
    overrides = {
        "scheme": getattr(args, "scheme", None),
        "base_n": getattr(args, "base_n", None),
        "ratios": getattr(args, "ratio", None),
        "lambda": getattr(args, "lam", None),
        "a": getattr(args, "a", None),
        "t_final": getattr(args, "t_final", None),
    }
    for key, value in overrides.items():
        if value is not None:
            values[key] = str(value)
    return config_from_mapping(values)


def _profile_for_order(order: int):
    if order == 1:
        return erf_profile(nu=1.0, t_f=1.0, ic=JumpIC(-1.0, 1.0))
    return godunov2_similarity_profile()


def _cmd_jump_table(args: argparse.Namespace) -> int:
    config = _gather_config(args)
    rows = run_jump_table(config, jobs=args.jobs)
    jump_rows_csv(rows, sys.stdout)
    sys.stdout.write("\n")
    sys.stdout.write(jump_rows_table(rows))
    out_dir = args.out or config.output_dir
    if out_dir:
        out_dir.mkdir(parents=True, exist_ok=True)
        with open(out_dir / "jump_rates.csv", "w") as f:
            jump_rows_csv(rows, f)
        (out_dir / "jump_table.txt").write_text(jump_rows_table(rows))
    return 0


def _cmd_smooth_verify(args: argparse.Namespace) -> int:
    config = _gather_config(args)
    resolutions = tuple(int(part) for part in args.n.split(","))
    rows = run_smooth_table(config, resolutions)
    smooth_rows_csv(rows, sys.stdout)
    if args.out:
        args.out.mkdir(parents=True, exist_ok=True)
        with open(args.out / "smooth_orders.csv", "w") as f:
            smooth_rows_csv(rows, f)
    return 0


def _write_or_stdout(write, out: Path | None, name: str) -> None:
    if out is None:
        write(sys.stdout)
    else:
        out.mkdir(parents=True, exist_ok=True)
        with open(out / name, "w") as f:
            write(f)


def _cmd_similarity(args: argparse.Namespace) -> int:
    profile = _profile_for_order(args.order)
    if args.sim_command == "profile":
        xi = np.linspace(-args.xi_max, args.xi_max, args.samples)
        values = np.array([profile.s_of_xi(x) for x in xi])
        _write_or_stdout(
            lambda f: write_samples_csv(xi, values, f, x_name="xi"),
            args.out,
            f"profile_p{args.order}.csv",
        )
    elif args.sim_command == "diff":
        frame, values = scaled_frame_difference(
            profile, args.h_a, args.h_b, n_samples=args.samples
        )
        _write_or_stdout(
            lambda f: write_samples_csv(frame.chi, values, f, x_name="chi"),
            args.out,
            f"diff_p{args.order}.csv",
        )
    else:
        result = scaled_ratio_quadrature(profile, args.stretch_num, args.stretch_den)
        sys.stdout.write(f"ratio,{result.value:.17g}\n")
        sys.stdout.write(f"error_bound,{result.error_bound:.17g}\n")
    return 0


def _cmd_run(args: argparse.Namespace) -> int:
    kind = (args.scheme or "upwind1").strip().lower()
    spec = SchemeSpec(
        kind,
        args.lam if args.lam is not None else 0.6,
        args.a if args.a is not None else 1.0,
    )
    grid = Grid1D(args.x_left, args.x_right, args.n)
    ic = JumpIC(args.u_left, args.u_right)
    u0 = make_jump_function(grid, ic)
    t_final = args.t_final if args.t_final is not None else 2.0
    snapshot = integrate_to(u0, spec, t_final)
    if args.out:
        args.out.parent.mkdir(parents=True, exist_ok=True)
        with open(args.out, "w") as f:
            write_grid_function_csv(snapshot, f)
    else:
        write_grid_function_csv(snapshot, sys.stdout)
    return 0


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code in (0, None) else 1
    try:
        if args.command == "jump-table":
            return _cmd_jump_table(args)
        if args.command == "smooth-verify":
            return _cmd_smooth_verify(args)
        if args.command == "similarity":
            return _cmd_similarity(args)
        if args.command == "run":
            return _cmd_run(args)
        parser.print_usage(sys.stderr)
        return 1
    except NUMERICAL_ERRORS as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 2
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


cli_main = main


if __name__ == "__main__":
    sys.exit(main())
