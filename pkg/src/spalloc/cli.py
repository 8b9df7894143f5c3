"""Command-line front end.

Exit codes: 0 success, 2 unreadable or malformed input, 3 infeasible
instance, 4 internal error. Every report echoes the seed actually used,
so any run can be reproduced exactly.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from pathlib import Path

from . import experiments, io
from .annealer import RunResult, Schedule, anneal
from .errors import InfeasibleError, InputError, SpallocError
from .model import LINEAR, OPINION, Dataset, WeightScheme
from .oracle import DEFAULT_CANDIDATE_CAP, exact_minimum

EXIT_OK = 0
EXIT_PARSE = 2
EXIT_INFEASIBLE = 3
EXIT_INTERNAL = 4


def parse_weights(spec: str) -> WeightScheme:
    """'linear', 'opinion', or a comma-separated decreasing list."""
    name = spec.strip().lower()
    if name == "linear":
        return LINEAR
    if name == "opinion":
        return OPINION
    try:
        values = tuple(float(x) for x in spec.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(
            f"weights must be 'linear', 'opinion' or a comma-separated list, got {spec!r}"
        ) from None
    try:
        return WeightScheme(values)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _ratio_list(spec: str) -> list[float]:
    try:
        return [float(x) for x in spec.split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad ratio list {spec!r}") from None


def _fraction_list(spec: str) -> tuple[float, ...]:
    try:
        return tuple(float(x) for x in spec.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad fraction list {spec!r}") from None


def _add_input_args(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--prefs", required=True, help="preferences CSV (projects x students)")
    parser.add_argument(
        "--supervisors", required=True, help="supervisor workload CSV (projects x supervisors)"
    )


def _add_solver_args(parser: argparse.ArgumentParser) -> None:
    parser.add_argument(
        "--weights",
        type=parse_weights,
        default=LINEAR,
        help="'linear' (default), 'opinion', or e.g. '4,3,2,1'",
    )
    parser.add_argument("--t-start", type=float, default=5.0, help="initial temperature")
    parser.add_argument("--t-end", type=float, default=0.0, help="final temperature")
    parser.add_argument("--t-step", type=float, default=0.001, help="temperature decrement")
    parser.add_argument(
        "--attempted-factor", type=int, default=1000,
        help="attempted moves per temperature = this x N",
    )
    parser.add_argument(
        "--success-factor", type=int, default=100,
        help="successful moves per temperature = this x N",
    )
    parser.add_argument(
        "--hard-cap-factor", type=int, default=10_000,
        help="absolute per-temperature attempt cap = this x N",
    )
    parser.add_argument(
        "--seed", type=int, default=None,
        help="RNG seed; defaults to a time-based value, echoed in the report",
    )
    parser.add_argument("--out-dir", type=Path, default=Path("."), help="output directory")


def _schedule_from(args: argparse.Namespace) -> Schedule:
    return Schedule(
        t_start=args.t_start,
        t_end=args.t_end,
        t_step=args.t_step,
        attempted_budget_factor=args.attempted_factor,
        success_budget_factor=args.success_factor,
        hard_cap_factor=args.hard_cap_factor,
    )


def _resolve_seed(args: argparse.Namespace) -> int:
    if args.seed is not None:
        return args.seed
    seed = time.time_ns() % 2**32
    print(f"seed not given; using time-based seed {seed}", file=sys.stderr)
    return seed


def _load_dataset(args: argparse.Namespace) -> Dataset:
    prefs_text = Path(args.prefs).read_text(encoding="utf-8")
    sups_text = Path(args.supervisors).read_text(encoding="utf-8")
    return io.load_dataset(prefs_text, sups_text)


def _decade_progress(t_start: float):
    """Report the running energy each time the temperature drops a decade."""
    boundary = t_start / 10.0

    def report(temperature: float, energy: float) -> None:
        nonlocal boundary
        if temperature <= boundary or temperature <= 0.0:
            print(f"T={temperature:g} energy={energy:.4f}", file=sys.stderr)
            while boundary > 0 and temperature <= boundary:
                boundary /= 10.0
            if temperature <= 0.0:
                boundary = -1.0

    return report


def _counters_dict(result: RunResult) -> dict[str, int]:
    c = result.counters
    return {
        "attempted": c.attempted,
        "accepted": c.accepted,
        "rejected_conflict": c.rejected_conflict,
        "rejected_overload": c.rejected_overload,
        "rejected_metropolis": c.rejected_metropolis,
        "rejected_no_alternative": c.rejected_no_alternative,
    }


def _run_report(
    dataset: Dataset, result: RunResult, schedule: Schedule, weights: WeightScheme
) -> dict:
    return {
        "seed": result.seed,
        "n_students": dataset.n_students,
        "n_projects": dataset.n_projects,
        "n_supervisors": dataset.n_supervisors,
        "weights": list(weights.weights),
        "schedule": {
            "t_start": schedule.t_start,
            "t_end": schedule.t_end,
            "t_step": schedule.t_step,
            "attempted_budget_factor": schedule.attempted_budget_factor,
            "success_budget_factor": schedule.success_budget_factor,
            "hard_cap_factor": schedule.hard_cap_factor,
        },
        "histogram": list(result.histogram.counts),
        "energy_raw": result.energy.raw,
        "energy_normalized": result.energy.normalized,
        "counters": _counters_dict(result),
    }


def _write_json(path: Path, payload: dict) -> None:
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def cmd_solve(args: argparse.Namespace) -> int:
    dataset = _load_dataset(args)
    schedule = _schedule_from(args)
    seed = _resolve_seed(args)
    result = anneal(
        dataset, args.weights, schedule, seed, progress=_decade_progress(schedule.t_start)
    )
    out = args.out_dir
    out.mkdir(parents=True, exist_ok=True)
    (out / "allocation.csv").write_text(
        io.write_allocation(dataset, result.allocation), encoding="utf-8"
    )
    (out / "timeseries.csv").write_text(io.write_time_series(list(result.series)), encoding="utf-8")
    _write_json(out / "report.json", _run_report(dataset, result, schedule, args.weights))
    print(
        f"solved: N={dataset.n_students} histogram={result.histogram.counts} "
        f"energy={result.energy.normalized:.4f} (raw {result.energy.raw:g}) seed={seed}"
    )
    return EXIT_OK


def cmd_batch(args: argparse.Namespace) -> int:
    dataset = _load_dataset(args)
    schedule = _schedule_from(args)
    seed = _resolve_seed(args)
    stats, results = experiments.batch_run(
        dataset, args.weights, schedule, args.runs, seed, jobs=args.jobs
    )
    out = args.out_dir
    out.mkdir(parents=True, exist_ok=True)
    (out / "stats.csv").write_text(experiments.stats_csv(stats), encoding="utf-8")
    if results:
        profiles = experiments.profile_report(results)
        (out / "profiles.csv").write_text(
            experiments.profiles_csv(profiles, dataset), encoding="utf-8"
        )
    print(
        f"batch: {stats.n_runs} runs ({stats.n_failed} failed) "
        f"min={stats.minimum:.4f} mean={stats.mean:.4f} std={stats.std:.4f} seed={seed}"
    )
    return EXIT_OK


def cmd_oracle(args: argparse.Namespace) -> int:
    dataset = _load_dataset(args)
    result = exact_minimum(dataset, args.weights, cap=args.cap)
    normalized = 100.0 * result.minimum_raw / (dataset.n_students * args.weights.weights[0])
    print(
        f"oracle: minimum_raw={result.minimum_raw:g} normalized={normalized:.4f} "
        f"optima={len(result.minima)} feasible={result.feasible_count}"
    )
    if args.out_dir is not None:
        args.out_dir.mkdir(parents=True, exist_ok=True)
        _write_json(
            args.out_dir / "oracle.json",
            {
                "minimum_raw": result.minimum_raw,
                "degenerate_count": len(result.minima),
                "feasible_count": result.feasible_count,
                "minima": [list(a.assignment) for a in result.minima],
            },
        )
    return EXIT_OK


def cmd_truncate(args: argparse.Namespace) -> int:
    dataset = _load_dataset(args)
    truncated = experiments.truncate_choices(dataset, args.keep)
    out = args.out_dir
    out.mkdir(parents=True, exist_ok=True)
    (out / "prefs.csv").write_text(io.write_preferences(truncated), encoding="utf-8")
    (out / "supervisors.csv").write_text(io.write_supervisors(truncated), encoding="utf-8")
    print(f"truncated to {args.keep} choices; files written to {out}")
    return EXIT_OK


def cmd_ratio_sweep(args: argparse.Namespace) -> int:
    dataset = _load_dataset(args)
    schedule = _schedule_from(args)
    seed = _resolve_seed(args)
    points = experiments.sweep_ratio(
        dataset, args.weights, schedule, args.ratios, args.runs, seed, jobs=args.jobs
    )
    out = args.out_dir
    out.mkdir(parents=True, exist_ok=True)
    (out / "sweep.csv").write_text(experiments.sweep_csv(points), encoding="utf-8")
    for p in points:
        print(
            f"ratio={p.target_ratio:g} students={p.n_students} failed={p.n_failed} "
            f"mean={p.mean:.4f} std={p.std:.4f} fourth_choices={p.fourth_choice_count}"
        )
    return EXIT_OK


def cmd_generate(args: argparse.Namespace) -> int:
    seed = _resolve_seed(args)
    config = experiments.GeneratorConfig(
        n_students=args.n,
        n_projects=args.m,
        n_supervisors=args.s,
        n_choices=args.r,
        skew=args.skew,
        workload_fractions=args.fractions,
        seed=seed,
    )
    dataset = experiments.generate_dataset(config)
    out = args.out_dir
    out.mkdir(parents=True, exist_ok=True)
    (out / "prefs.csv").write_text(io.write_preferences(dataset), encoding="utf-8")
    (out / "supervisors.csv").write_text(io.write_supervisors(dataset), encoding="utf-8")
    print(
        f"generated N={args.n} M={args.m} S={args.s} R={args.r} seed={seed}; "
        f"files written to {out}"
    )
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="spalloc",
        description="Simulated-annealing solver for student-project allocation",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    solve = sub.add_parser("solve", help="solve one instance")
    _add_input_args(solve)
    _add_solver_args(solve)
    solve.set_defaults(func=cmd_solve)

    batch = sub.add_parser("batch", help="independent runs with statistics")
    _add_input_args(batch)
    _add_solver_args(batch)
    batch.add_argument("--runs", type=int, default=20, help="number of independent runs")
    batch.add_argument("--jobs", type=int, default=1, help="parallel worker processes")
    batch.set_defaults(func=cmd_batch)

    oracle = sub.add_parser("oracle", help="exhaustive optimum for small instances")
    _add_input_args(oracle)
    oracle.add_argument("--weights", type=parse_weights, default=LINEAR)
    oracle.add_argument("--cap", type=int, default=DEFAULT_CANDIDATE_CAP)
    oracle.add_argument("--out-dir", type=Path, default=None)
    oracle.set_defaults(func=cmd_oracle)

    truncate = sub.add_parser("truncate", help="drop low-ranked choices")
    _add_input_args(truncate)
    truncate.add_argument("--keep", type=int, required=True, help="ranks to keep")
    truncate.add_argument("--out-dir", type=Path, default=Path("."))
    truncate.set_defaults(func=cmd_truncate)

    sweep = sub.add_parser("ratio-sweep", help="batch runs across project/student ratios")
    _add_input_args(sweep)
    _add_solver_args(sweep)
    sweep.add_argument(
        "--ratios", type=_ratio_list, default=[1.5, 2.0, 2.5, 3.0, 3.5, 4.0],
        help="comma-separated target ratios",
    )
    sweep.add_argument("--runs", type=int, default=10, help="runs per ratio")
    sweep.add_argument("--jobs", type=int, default=1)
    sweep.set_defaults(func=cmd_ratio_sweep)

    generate = sub.add_parser("generate", help="write a synthetic instance")
    generate.add_argument("--n", type=int, required=True, help="students")
    generate.add_argument("--m", type=int, required=True, help="projects")
    generate.add_argument("--s", type=int, required=True, help="supervisors")
    generate.add_argument("--r", type=int, default=4, help="choices per student")
    generate.add_argument("--skew", type=float, default=0.0, help="popularity exponent")
    generate.add_argument(
        "--fractions", type=_fraction_list, default=(0.5,),
        help="workload fraction pool, e.g. '0.5' or '0.25,0.5,1.0'",
    )
    generate.add_argument("--seed", type=int, default=None)
    generate.add_argument("--out-dir", type=Path, default=Path("."))
    generate.set_defaults(func=cmd_generate)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (InputError, OSError) as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except InfeasibleError as exc:
        print(f"infeasible: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except SpallocError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL
    except Exception as exc:  # pragma: no cover - safety net
        print(f"internal error: {exc!r}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
