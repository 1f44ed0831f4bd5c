"""Experiment runner: instances, solver runs, trace CSVs, summary, charts.

One experiment is a grid of (city count) x (algorithm) x (run seed).  All
algorithms at one city count share the same instance and the same
nearest-neighbor starting tour, so differences in the summary are down to
the solvers alone.  Every run leaves a trace CSV; the summary is computed
by reading those files back, so the summary can always be re-derived and
cross-checked from what is on disk.
"""

from __future__ import annotations

import csv
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path

from ..solvers import RunTrace, TraceRecord, TspProblem, qa_optimize, qbo_optimize, sa_optimize
from ..tsp import generate_instance, nn_tour, save_instance, tour_cost
from .config import ExperimentConfig
from .svg import line_chart

__all__ = [
    "TRACE_COLUMNS",
    "SchemaError",
    "SummaryRow",
    "ExperimentResult",
    "write_trace_csv",
    "read_trace_csv",
    "run_experiment",
    "summarize",
    "write_summary_csv",
    "verify_summary",
]

TRACE_COLUMNS = [
    "run_id", "algorithm", "seed", "n_cities", "iter",
    "best_cost", "current_cost", "h_exp", "accepted", "wall_ms",
]

SUMMARY_COLUMNS = [
    "n_cities", "algorithm", "mean_final_cost", "best_final_cost",
    "improvement_pct", "n_runs",
]


class SchemaError(ValueError):
    """A trace or summary CSV does not match the expected schema."""


@dataclass(frozen=True)
class SummaryRow:
    n_cities: int
    algorithm: str
    mean_final_cost: float
    best_final_cost: float
    improvement_pct: float
    n_runs: int


@dataclass
class ExperimentResult:
    output_dir: Path
    summary_path: Path
    summary_rows: list[SummaryRow]
    trace_paths: list[Path]
    instance_paths: list[Path]
    svg_paths: list[Path]
    elapsed_s: float


def write_trace_csv(path, trace: RunTrace, run_id: str, n_cities: int) -> None:
    """Write one run's records in the standard trace schema.

    ``wall_ms`` repeats the run's total wall time on every row; it is the
    one column that legitimately differs between repeat runs of the same
    config, and the summary never reads it.
    """
    wall_ms = repr(round(trace.wall_time_s * 1000.0, 3))
    with open(path, "w", encoding="ascii", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(TRACE_COLUMNS)
        for rec in trace.records:
            writer.writerow([
                run_id,
                trace.algorithm,
                trace.seed,
                n_cities,
                rec.iter,
                repr(rec.best_cost),
                repr(rec.current_cost),
                rec.h_exp,
                1 if rec.accepted else 0,
                wall_ms,
            ])


def read_trace_csv(path):
    """Read a trace CSV back as (header info dict, list of TraceRecord)."""
    with open(path, "r", encoding="ascii", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != TRACE_COLUMNS:
            raise SchemaError(f"{path}: expected columns {TRACE_COLUMNS}, got {header}")
        records = []
        info = None
        for row in reader:
            if len(row) != len(TRACE_COLUMNS):
                raise SchemaError(f"{path}: row with {len(row)} fields")
            if info is None:
                info = {
                    "run_id": row[0],
                    "algorithm": row[1],
                    "seed": int(row[2]),
                    "n_cities": int(row[3]),
                }
            records.append(TraceRecord(
                iter=int(row[4]),
                best_cost=float(row[5]),
                current_cost=float(row[6]),
                h_exp=int(row[7]),
                accepted=row[8] == "1",
            ))
    if info is None:
        raise SchemaError(f"{path}: no data rows")
    return info, records


_SOLVERS = {"qbo": qbo_optimize, "sa": sa_optimize, "qa": qa_optimize}


def _run_task(args) -> tuple[str, int, RunTrace]:
    """One solver run, self-contained so a worker process can execute it.

    The instance is regenerated from its seed rather than shipped across
    the process boundary; generation is deterministic and cheap.
    """
    algo, n, seed, cfg = args
    instance = generate_instance(n, cfg.coord_range, cfg.instance_seed)
    problem = TspProblem(instance)
    trace = _SOLVERS[algo](problem, cfg.solver_config(algo), seed)
    return algo, n, trace


def _nn_trace(instance, seed: int) -> RunTrace:
    t0 = time.perf_counter()
    tour = nn_tour(instance, 0)
    cost = tour_cost(instance, tour)
    wall = time.perf_counter() - t0
    return RunTrace(
        algorithm="nn",
        seed=seed,
        records=[TraceRecord(0, cost, cost, 0, False)],
        final_state=tour,
        final_cost=cost,
        wall_time_s=wall,
        meta={"iters_run": 0, "stop_reason": "constructive"},
    )


def run_experiment(cfg: ExperimentConfig, threads: int = 1) -> ExperimentResult:
    """Run the full grid described by ``cfg`` and write all artifacts.

    Layout under ``cfg.output_dir``: ``instances/`` (one text file per
    city count), ``traces/`` (one CSV per run), ``summary.csv``, and one
    SVG cost-trend chart per city count.  With ``threads > 1`` solver
    runs are distributed over a process pool; results are written by the
    parent in a fixed order either way, so outputs do not depend on
    scheduling.
    """
    cfg.validate()
    t_start = time.perf_counter()
    out = Path(cfg.output_dir)
    (out / "traces").mkdir(parents=True, exist_ok=True)
    (out / "instances").mkdir(parents=True, exist_ok=True)

    trace_paths: list[Path] = []
    instance_paths: list[Path] = []
    svg_paths: list[Path] = []

    solver_algos = [a for a in cfg.algorithms if a != "nn"]
    tasks = [(algo, n, seed, cfg)
             for n in cfg.cities for algo in solver_algos for seed in cfg.run_seeds]

    if threads > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(_run_task, tasks))
    else:
        results = [_run_task(t) for t in tasks]

    traces_by_n: dict[int, list[tuple[str, RunTrace]]] = {n: [] for n in cfg.cities}
    for n in cfg.cities:
        instance = generate_instance(n, cfg.coord_range, cfg.instance_seed)
        ipath = out / "instances" / f"cities_{n}.txt"
        save_instance(instance, ipath)
        instance_paths.append(ipath)
        # The nearest-neighbor baseline always runs: it is the shared
        # starting tour, and the improvement column needs its cost.
        nn = _nn_trace(instance, cfg.instance_seed)
        run_id = f"nn_n{n}_s{cfg.instance_seed}"
        tpath = out / "traces" / f"{run_id}.csv"
        write_trace_csv(tpath, nn, run_id, n)
        trace_paths.append(tpath)
        traces_by_n[n].append(("nn", nn))

    for (algo, n, trace) in results:
        run_id = f"{algo}_n{n}_s{trace.seed}"
        tpath = out / "traces" / f"{run_id}.csv"
        write_trace_csv(tpath, trace, run_id, n)
        trace_paths.append(tpath)
        traces_by_n[n].append((algo, trace))

    summary_rows = summarize(trace_paths)
    summary_path = out / "summary.csv"
    write_summary_csv(summary_path, summary_rows)

    for n in cfg.cities:
        series = []
        seen = set()
        for algo, trace in traces_by_n[n]:
            if algo in seen:
                continue  # chart the first seed per algorithm
            seen.add(algo)
            if algo == "nn":
                end = max(cfg.iters, 1)
                series.append(("nn", [1, end + 1], [trace.final_cost, trace.final_cost]))
            else:
                xs = [r.iter + 1 for r in trace.records]
                ys = [r.best_cost for r in trace.records]
                series.append((algo, xs, ys))
        spath = out / f"cost_trend_n{n}.svg"
        line_chart(
            series, spath,
            title=f"Best tour cost vs iteration, n={n}",
            x_label="iteration + 1 (log scale)",
            y_label="best tour cost",
            log_x=True,
        )
        svg_paths.append(spath)

    return ExperimentResult(
        output_dir=out,
        summary_path=summary_path,
        summary_rows=summary_rows,
        trace_paths=trace_paths,
        instance_paths=instance_paths,
        svg_paths=svg_paths,
        elapsed_s=time.perf_counter() - t_start,
    )


def summarize(trace_paths) -> list[SummaryRow]:
    """Aggregate trace CSVs into per (n_cities, algorithm) summary rows.

    The final best cost of a run is the last row's best_cost.  The
    improvement column compares each algorithm's mean against the
    nearest-neighbor cost for the same city count, which must be present
    among the traces.
    """
    finals: dict[tuple[int, str], list[float]] = {}
    nn_cost: dict[int, float] = {}
    for path in sorted(Path(p) for p in trace_paths):
        info, records = read_trace_csv(path)
        n, algo = info["n_cities"], info["algorithm"]
        final = records[-1].best_cost
        finals.setdefault((n, algo), []).append(final)
        if algo == "nn":
            nn_cost[n] = final
    rows = []
    for (n, algo), values in sorted(finals.items()):
        if n not in nn_cost:
            raise SchemaError(f"no nearest-neighbor trace for n={n}; "
                              f"cannot compute improvement")
        mean = sum(values) / len(values)
        rows.append(SummaryRow(
            n_cities=n,
            algorithm=algo,
            mean_final_cost=mean,
            best_final_cost=min(values),
            improvement_pct=100.0 * (nn_cost[n] - mean) / nn_cost[n],
            n_runs=len(values),
        ))
    return rows


def write_summary_csv(path, rows: list[SummaryRow]) -> None:
    with open(path, "w", encoding="ascii", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(SUMMARY_COLUMNS)
        for r in rows:
            writer.writerow([
                r.n_cities, r.algorithm, repr(r.mean_final_cost),
                repr(r.best_final_cost), repr(r.improvement_pct), r.n_runs,
            ])


def verify_summary(output_dir) -> list[str]:
    """Cross-check summary.csv against the trace files next to it.

    Recomputes every summary row from the traces and reports any
    mismatch, including rows that exist on one side only.  Returns a list
    of human-readable violations; empty means consistent.
    """
    out = Path(output_dir)
    summary_path = out / "summary.csv"
    problems: list[str] = []
    try:
        with open(summary_path, "r", encoding="ascii", newline="") as fh:
            reader = csv.reader(fh)
            header = next(reader, None)
            if header != SUMMARY_COLUMNS:
                return [f"{summary_path}: bad header {header}"]
            on_disk = {
                (int(row[0]), row[1]): (float(row[2]), float(row[3]), float(row[4]), int(row[5]))
                for row in reader
            }
    except FileNotFoundError:
        return [f"{summary_path}: missing"]
    recomputed = summarize(sorted((out / "traces").glob("*.csv")))
    fresh = {
        (r.n_cities, r.algorithm):
            (r.mean_final_cost, r.best_final_cost, r.improvement_pct, r.n_runs)
        for r in recomputed
    }
    for key in sorted(set(on_disk) | set(fresh)):
        if key not in on_disk:
            problems.append(f"summary missing row for {key}")
        elif key not in fresh:
            problems.append(f"summary has row {key} with no backing traces")
        elif on_disk[key] != fresh[key]:
            problems.append(f"summary row {key} disagrees with traces: "
                            f"{on_disk[key]} vs {fresh[key]}")
    return problems
