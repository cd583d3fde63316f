"""Command-line front end.

Subcommands
-----------
``run``
    Run the requested experiments and write traces and a summary.
``compare``
    Same as ``run`` but prints a ranking of the variants per objective and
    dimension.
``paper-repro``
    The full comparison grid: five variants on Griewank, Rastrigin and
    Rosenbrock in 30, 60 and 90 dimensions, 20 runs each.

Outputs are ``trace.csv`` (mean best-so-far fitness per iteration) and
``summary.json`` or ``summary.csv`` in ``--out-dir``.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
from dataclasses import dataclass, fields
from itertools import groupby
from pathlib import Path
from typing import Optional, Sequence

from .benchmarks import OBJECTIVES
from .core import Bounds, ConfigError, SwarmConfig
from .experiments import (
    AggregateResult,
    ComparisonRow,
    ExperimentSpec,
    comparison_table,
    run_experiments,
)
from .variants import MPSO_MUTATION_RULE, TPME_ETA_MODES, VARIANT_NAMES, VariantSpec

SUBCOMMANDS = ("run", "compare", "paper-repro")
GRID_OBJECTIVES = ("griewank", "rastrigin", "rosenbrock")
GRID_DIMS = (30, 60, 90)
TRACE_HEADER = ("objective", "dims", "variant", "iteration", "mean_best_fitness")
SEED_ENV = "SWARMLAB_SEED"


@dataclass(frozen=True)
class CliConfig:
    subcommand: str
    objectives: tuple[str, ...]
    dims: tuple[int, ...]
    variants: tuple[str, ...]
    particles: int = 40
    iterations: int = 2000
    repetitions: int = 20
    seed: int = 0
    out_dir: str = "results"
    format: str = "json"
    jobs: int = 1
    snapshots: tuple[int, ...] = (10, 2000)
    epsilon: Optional[float] = None
    mu: float = 0.05
    p: float = 0.02
    ne: int = 3
    a: float = 0.5
    tpme_eta: str = "particle"
    wmax: float = 0.9
    wmin: float = 0.1
    c1: float = 1.4962
    c2: float = 1.4962
    lower: float = -100.0
    upper: float = 100.0
    boundary: str = "none"

    def swarm_config(self, dims: int) -> SwarmConfig:
        return SwarmConfig(
            n_particles=self.particles,
            n_dims=dims,
            it_max=self.iterations,
            w_max=self.wmax,
            w_min=self.wmin,
            c1=self.c1,
            c2=self.c2,
            bounds=Bounds(self.lower, self.upper),
            boundary_policy=self.boundary,
        )

    def variant_spec(self, name: str) -> VariantSpec:
        return VariantSpec(
            kind=name,
            mpso_mu=self.mu,
            tpme_p=self.p,
            tpme_ne=self.ne,
            tpme_a=self.a,
            tpme_eta=self.tpme_eta,
        )

    def experiment_specs(self) -> list[ExperimentSpec]:
        """Cartesian product objective x dims x variant, in that nesting order."""
        return [
            ExperimentSpec(
                objective_name=obj,
                variant=self.variant_spec(v),
                swarm=self.swarm_config(d),
                repetitions=self.repetitions,
                base_seed=self.seed,
                snapshot_iterations=self.snapshots,
                epsilon=self.epsilon,
            )
            for obj in self.objectives
            for d in self.dims
            for v in self.variants
        ]

    def to_argv(self) -> list[str]:
        """Flags that parse back to this configuration."""
        argv = [self.subcommand]
        for f in fields(self):
            if f.name == "subcommand":
                continue
            value = getattr(self, f.name)
            if value is None:
                continue
            if isinstance(value, tuple):
                value = ",".join(str(v) for v in value)
            flag = "--" + _FLAG_NAMES.get(f.name, f.name.replace("_", "-"))
            argv += [flag, str(value)]
        return argv

    def to_dict(self) -> dict:
        out = {}
        for f in fields(self):
            value = getattr(self, f.name)
            out[f.name] = list(value) if isinstance(value, tuple) else value
        return out


_FLAG_NAMES = {"objectives": "objective"}


class _UsageError(Exception):
    pass


def _positive_int(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text!r}")
    if value < 1:
        raise argparse.ArgumentTypeError(f"must be a positive integer, got {value}")
    return value


def _nonnegative_int(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}")
    if value < 0:
        raise argparse.ArgumentTypeError(f"must be >= 0, got {value}")
    return value


def _positive_float(text: str) -> float:
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a number, got {text!r}")
    if not value > 0:
        raise argparse.ArgumentTypeError(f"must be > 0, got {text}")
    return value


def _finite_float(text: str) -> float:
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a number, got {text!r}")
    if value != value or value in (float("inf"), float("-inf")):
        raise argparse.ArgumentTypeError(f"must be finite, got {text}")
    return value


def _int_list(item_type):
    def parse(text: str) -> tuple[int, ...]:
        items = [t.strip() for t in text.split(",") if t.strip()]
        if not items:
            raise argparse.ArgumentTypeError("empty list")
        return tuple(item_type(t) for t in items)

    return parse


def _choice_list(choices: Sequence[str]):
    def parse(text: str) -> tuple[str, ...]:
        items = [t.strip() for t in text.split(",") if t.strip()]
        if not items:
            raise argparse.ArgumentTypeError("empty list")
        for t in items:
            if t not in choices:
                raise argparse.ArgumentTypeError(
                    f"unknown name {t!r}; valid names: {', '.join(choices)}"
                )
        if len(set(items)) != len(items):
            raise argparse.ArgumentTypeError("duplicate names")
        return tuple(items)

    return parse


def _default_seed() -> int:
    text = os.environ.get(SEED_ENV)
    if text is None or text.strip() == "":
        return 0
    try:
        return int(text)
    except ValueError:
        raise _UsageError(f"environment variable {SEED_ENV} is not an integer: {text!r}")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--objective", dest="objectives", type=_choice_list(sorted(OBJECTIVES)),
                        help="comma-separated objective names")
    common.add_argument("--dims", type=_int_list(_positive_int),
                        help="comma-separated dimensions")
    common.add_argument("--variants", type=_choice_list(VARIANT_NAMES),
                        help=f"comma-separated subset of {','.join(VARIANT_NAMES)}")
    common.add_argument("--particles", type=_positive_int, default=40)
    common.add_argument("--iterations", type=_positive_int, default=2000)
    common.add_argument("--repetitions", type=_positive_int, default=20)
    common.add_argument("--seed", type=int, default=None,
                        help=f"base seed; run r uses seed+r (default ${SEED_ENV} or 0)")
    common.add_argument("--out-dir", default="results")
    common.add_argument("--format", choices=("csv", "json"), default="json",
                        help="summary file format")
    common.add_argument("--jobs", type=_positive_int, default=1)
    common.add_argument("--snapshots", type=_int_list(_nonnegative_int), default=None,
                        help="iterations to report (default 10 and the last iteration)")
    common.add_argument("--epsilon", type=_positive_float, default=None,
                        help="threshold for iterations-to-epsilon (default per objective)")
    common.add_argument("--mu", type=_positive_float, default=0.05)
    common.add_argument("--p", type=_positive_float, default=0.02)
    common.add_argument("--ne", type=_positive_int, default=3)
    common.add_argument("--a", type=_positive_float, default=0.5)
    common.add_argument("--tpme-eta", choices=TPME_ETA_MODES, default="particle")
    common.add_argument("--wmax", type=_finite_float, default=0.9)
    common.add_argument("--wmin", type=_finite_float, default=0.1)
    common.add_argument("--c1", type=_finite_float, default=1.4962)
    common.add_argument("--c2", type=_finite_float, default=1.4962)
    common.add_argument("--lower", type=_finite_float, default=-100.0)
    common.add_argument("--upper", type=_finite_float, default=100.0)
    common.add_argument("--boundary", choices=("none", "clamp"), default="none")

    parser = argparse.ArgumentParser(prog="swarmlab", description=__doc__.split("\n")[0])
    sub = parser.add_subparsers(dest="subcommand", required=True)
    sub.add_parser("run", parents=[common], help="run experiments")
    sub.add_parser("compare", parents=[common], help="run and rank variants")
    sub.add_parser("paper-repro", parents=[common], help="full 5x3x3 comparison grid")
    return parser


def parse_cli(argv: Optional[Sequence[str]] = None) -> CliConfig:
    """Parse arguments into a :class:`CliConfig`; exits with status 2 on bad input."""
    parser = build_parser()
    ns = parser.parse_args(argv)
    cmd = ns.subcommand
    full_grid = cmd == "paper-repro"

    objectives = ns.objectives or (GRID_OBJECTIVES if full_grid else ("griewank",))
    dims = ns.dims or (GRID_DIMS if full_grid else (30,))
    variants = ns.variants or (("tpme",) if cmd == "run" else VARIANT_NAMES)

    if ns.snapshots is None:
        snapshots = tuple(sorted({min(10, ns.iterations), ns.iterations}))
    else:
        snapshots = tuple(sorted(set(ns.snapshots)))
        too_big = [s for s in snapshots if s > ns.iterations]
        if too_big:
            parser.error(f"argument --snapshots: {too_big[0]} exceeds --iterations {ns.iterations}")
    if ns.lower > ns.upper:
        parser.error("argument --lower: must not exceed --upper")
    if ns.wmin > ns.wmax:
        parser.error("argument --wmin: must not exceed --wmax")
    if ns.a > 1:
        parser.error("argument --a: must lie in (0, 1]")
    for obj in objectives:
        min_dims = OBJECTIVES[obj][1]
        if min(dims) < min_dims:
            parser.error(f"argument --dims: {obj} needs at least {min_dims} dimensions")
    if "mpso" in variants and ns.iterations < 2:
        parser.error("argument --iterations: mpso needs at least 2 iterations")

    if ns.seed is None:
        try:
            seed = _default_seed()
        except _UsageError as exc:
            parser.error(str(exc))
    else:
        seed = ns.seed

    return CliConfig(
        subcommand=cmd,
        objectives=tuple(objectives),
        dims=tuple(dims),
        variants=tuple(variants),
        particles=ns.particles,
        iterations=ns.iterations,
        repetitions=ns.repetitions,
        seed=seed,
        out_dir=ns.out_dir,
        format=ns.format,
        jobs=ns.jobs,
        snapshots=snapshots,
        epsilon=ns.epsilon,
        mu=ns.mu,
        p=ns.p,
        ne=ns.ne,
        a=ns.a,
        tpme_eta=ns.tpme_eta,
        wmax=ns.wmax,
        wmin=ns.wmin,
        c1=ns.c1,
        c2=ns.c2,
        lower=ns.lower,
        upper=ns.upper,
        boundary=ns.boundary,
    )


def _num(x) -> str:
    return repr(float(x))


def emit_trace(results: Sequence[AggregateResult], destination) -> Path:
    """Write the long-format mean trace CSV, one row per iteration."""
    path = Path(destination)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(TRACE_HEADER)
        for r in results:
            spec = r.spec
            for k, value in enumerate(r.mean_trace):
                writer.writerow(
                    (spec.objective_name, spec.n_dims, spec.variant.name, k, _num(value))
                )
    return path


def _group_rows(results: Sequence[AggregateResult]) -> list[ComparisonRow]:
    """Comparison rows grouped by (objective, dims), ranked within each group."""
    rows = []
    keyfunc = lambda r: (r.spec.objective_name, r.spec.n_dims)  # noqa: E731
    for _, group in groupby(results, key=keyfunc):
        rows.extend(comparison_table(list(group)))
    return rows


def _parameters(spec: ExperimentSpec) -> dict:
    sw, v = spec.swarm, spec.variant
    return {
        "particles": sw.n_particles,
        "iterations": sw.it_max,
        "w_max": sw.w_max,
        "w_min": sw.w_min,
        "c1": sw.c1,
        "c2": sw.c2,
        "lower": sw.bounds.lower,
        "upper": sw.bounds.upper,
        "boundary": sw.boundary_policy.value,
        "mu": v.mpso_mu,
        "p": v.tpme_p,
        "ne": v.tpme_ne,
        "a": v.tpme_a,
        "tpme_eta": v.tpme_eta,
        "mpso_mutation_rule": MPSO_MUTATION_RULE,
    }


def _result_record(row: ComparisonRow) -> dict:
    r = row.result
    spec = r.spec
    return {
        "objective": row.objective,
        "dims": row.dims,
        "variant": row.variant,
        "snapshots": {str(k): v for k, v in row.snapshot_means.items()},
        "snapshot_stats": {
            str(k): {"mean": s.mean, "std": s.std, "min": s.min, "max": s.max}
            for k, s in r.snapshots.items()
        },
        "iters_to_epsilon_mean": row.iters_to_threshold_mean,
        "iters_to_epsilon": r.iters_to_threshold,
        "n_reached": row.n_reached,
        "epsilon": spec.epsilon,
        "repetitions": spec.repetitions,
        "base_seed": spec.base_seed,
        "seeds": spec.seeds(),
        "parameters": _parameters(spec),
    }


def emit_summary(rows: Sequence[ComparisonRow], destination, format: str, config: dict) -> Path:
    """Write the per-experiment summary as JSON or CSV."""
    if format not in ("json", "csv"):
        raise ValueError(f"unknown summary format {format!r}")
    if not rows:
        raise ValueError("empty comparison table")
    path = Path(destination)
    records = [_result_record(r) for r in rows]
    if format == "json":
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            json.dump({"config": config, "results": records}, fh, indent=2)
            fh.write("\n")
        return path

    snap_keys = list(records[0]["snapshots"])
    param_keys = list(records[0]["parameters"])
    header = (
        ["objective", "dims", "variant"]
        + [f"snapshot_{k}" for k in snap_keys]
        + ["iters_to_epsilon_mean", "n_reached", "epsilon", "repetitions", "base_seed"]
        + param_keys
    )
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for rec in records:
            mean = rec["iters_to_epsilon_mean"]
            writer.writerow(
                [rec["objective"], rec["dims"], rec["variant"]]
                + [_num(rec["snapshots"][k]) for k in snap_keys]
                + ["" if mean is None else _num(mean), rec["n_reached"], _num(rec["epsilon"]),
                   rec["repetitions"], rec["base_seed"]]
                + [rec["parameters"][k] for k in param_keys]
            )
    return path


def format_table(rows: Sequence[ComparisonRow]) -> str:
    if not rows:
        return ""
    snaps = list(rows[0].snapshot_means)
    head = f"{'objective':<12}{'dims':>5}  {'rank':>4}  {'variant':<7}" + "".join(
        f"{'it ' + str(s):>14}" for s in snaps
    ) + f"{'iters<=eps':>12}"
    lines = [head]
    for (obj, dims), group in groupby(rows, key=lambda r: (r.objective, r.dims)):
        for rank, row in enumerate(group, 1):
            its = row.iters_to_threshold_mean
            its = "-" if its is None else f"{its:.1f} ({row.n_reached}/{row.repetitions})"
            lines.append(
                f"{obj:<12}{dims:>5}  {rank:>4}  {row.variant:<7}"
                + "".join(f"{row.snapshot_means[s]:>14.4e}" for s in snaps)
                + f"{its:>12}"
            )
    return "\n".join(lines)


def execute(cfg: CliConfig, stdout=None, stderr=None) -> int:
    """Run a parsed configuration; returns the exit status."""
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    try:
        specs = cfg.experiment_specs()
    except ConfigError as exc:
        print(f"swarmlab: error: {exc}", file=stderr)
        return 2

    failed: list[str] = []

    def on_error(spec, exc):
        failed.append(spec.label)
        print(f"swarmlab: experiment failed: {exc}", file=stderr)

    results = run_experiments(specs, jobs=cfg.jobs, on_error=on_error)
    config = cfg.to_dict()
    config.update(
        argv=cfg.to_argv(),
        seed_rule="run r uses seed + r",
        mpso_mutation_rule=MPSO_MUTATION_RULE,
        status="partial" if failed else "complete",
        failed=failed,
    )
    out = Path(cfg.out_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
        if results:
            rows = _group_rows(results)
            emit_trace(results, out / "trace.csv")
            emit_summary(rows, out / f"summary.{cfg.format}", cfg.format, config)
            print(format_table(rows), file=stdout)
    except OSError as exc:
        print(f"swarmlab: error: cannot write {exc.filename or out}: {exc.strerror}", file=stderr)
        return 1
    if failed:
        print(f"swarmlab: {len(failed)} of {len(specs)} experiments failed; "
              "outputs are partial", file=stderr)
        return 1
    return 0


def main(argv: Optional[Sequence[str]] = None) -> int:
    return execute(parse_cli(argv))


if __name__ == "__main__":
    sys.exit(main())
