"""Command-line front end.

Subcommands are grouped by area: ``bench`` for experiments and trace
audits, ``stats`` for the statistics lab, ``tsp`` for instance tools.
Exit codes: 0 on success, 2 for configuration or usage problems, 1 for
runtime failures.
"""

from __future__ import annotations

import argparse
import math
import sys
from pathlib import Path

import numpy as np

from ..quantizer import QuantConfig, _pow_int, quantize
from ..schedules import ScheduleKind, ScheduleSpec
from ..solvers import brute_force_tsp
from ..statslab import (
    IID_DIFF_VARIANCE,
    CLAIMED_DIFF_CONSTANT,
    SdeParams,
    diff_error_stats,
    double_well,
    double_well_grad,
    error_stats,
    global_basin,
    hitting_rate,
    langevin_simulate,
)
from ..tsp import load_instance
from .audit import audit_directory
from .config import ConfigError, load_config, resolve_threads
from .runner import run_experiment

__all__ = ["build_parser", "cli_main", "main"]


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qopt",
        description="Quantization-based optimization toolkit",
    )
    top = parser.add_subparsers(dest="area", required=True)

    bench = top.add_parser("bench", help="experiments, traces, audits")
    bench_sub = bench.add_subparsers(dest="cmd", required=True)

    run = bench_sub.add_parser("run", help="run an experiment from a config file")
    run.add_argument("--config", required=True, help="TOML experiment config")
    run.add_argument("--out", help="override experiment.output_dir")
    run.add_argument("--threads", type=int, help="worker processes")
    run.add_argument("--seed", type=int, help="override experiment.instance_seed")

    quant = bench_sub.add_parser("quantize", help="quantize one value")
    quant.add_argument("--f", type=float, required=True, help="value to quantize")
    quant.add_argument("--base", type=int, default=2)
    quant.add_argument("--h", type=int, required=True, help="resolution exponent")
    quant.add_argument("--eta-pow", type=int, default=0,
                       help="normalization exponent (default 0)")

    aud = bench_sub.add_parser("audit", help="replay-check traces and summary")
    aud.add_argument("directory", help="experiment output directory")
    aud.add_argument("--base", type=int, default=2,
                     help="grid base used by the audited runs")

    stats = top.add_parser("stats", help="statistics lab")
    stats_sub = stats.add_subparsers(dest="cmd", required=True)

    wnh = stats_sub.add_parser(
        "wnh", help="white-noise checks on synthetic quantization errors")
    wnh.add_argument("--n", type=int, required=True, help="sample count")
    wnh.add_argument("--qp", type=float, required=True,
                     help="grid fineness; must be an exact power of --base")
    wnh.add_argument("--base", type=int, default=2)
    wnh.add_argument("--seed", type=int, default=0)
    wnh.add_argument("--out", help="write the report CSV here instead of stdout")

    sde = stats_sub.add_parser("sde", help="diffusion-limit checks from a config")
    sde.add_argument("--config", required=True, help="TOML check description")
    sde.add_argument("--seed", type=int, help="override the config seed")
    sde.add_argument("--out", help="write the report CSV here instead of stdout")

    tsp = top.add_parser("tsp", help="instance tools")
    tsp_sub = tsp.add_subparsers(dest="cmd", required=True)
    brute = tsp_sub.add_parser("brute", help="exact optimum of a small instance")
    brute.add_argument("--instance", required=True, help="instance text file")

    return parser


def _emit_report(rows, out_path) -> None:
    """Write statistic/expected/observed/n/pass rows as CSV."""
    lines = ["statistic,expected,observed,n,pass"]
    for stat, expected, observed, n, verdict in rows:
        lines.append(f"{stat},{repr(float(expected))},{repr(float(observed))},"
                     f"{n},{verdict}")
    text = "\n".join(lines) + "\n"
    if out_path:
        Path(out_path).write_text(text, encoding="ascii")
        print(f"report written to {out_path}")
    else:
        sys.stdout.write(text)


def _exp_for_qp(qp: float, base: int) -> int:
    """Map a fineness value back to its exponent, or reject it."""
    if not (qp > 0 and math.isfinite(qp)):
        raise ConfigError(f"--qp must be positive and finite, got {qp!r}")
    guess = round(math.log(qp, base))
    for k in (guess - 1, guess, guess + 1):
        if _pow_int(base, k) == qp:
            return k
    raise ConfigError(
        f"--qp {qp!r} is not an exact power of base {base}; "
        "pick a representable grid")


def _cmd_quantize(args) -> int:
    cfg = QuantConfig(base=args.base, h_exp=args.h, eta_pow=args.eta_pow)
    q = quantize(args.f, cfg)
    print(f"level {q.level}")
    print(f"value {q.value!r}")
    return 0


def _cmd_run(args) -> int:
    cfg = load_config(args.config)
    if args.out is not None:
        cfg.output_dir = args.out
    if args.seed is not None:
        cfg.instance_seed = args.seed
    threads = resolve_threads(args.threads, cfg)
    result = run_experiment(cfg, threads=threads)
    print(f"wrote {len(result.trace_paths)} traces, "
          f"{len(result.svg_paths)} charts, {result.summary_path} "
          f"in {result.elapsed_s:.1f}s")
    for row in result.summary_rows:
        print(f"  n={row.n_cities} {row.algorithm:>4}: "
              f"mean {row.mean_final_cost:.2f}  best {row.best_final_cost:.2f}  "
              f"improvement {row.improvement_pct:.2f}%  runs {row.n_runs}")
    return 0


def _cmd_audit(args) -> int:
    report = audit_directory(args.directory, base=args.base)
    uphill = {}
    for a in report.audits:
        uphill[a.algorithm] = uphill.get(a.algorithm, 0) + a.uphill_tie_accepts
        status = "ok" if a.ok else "FAIL"
        print(f"{status}  {a.run_id}: rows {a.n_rows}, "
              f"acceptances {a.n_acceptances}, "
              f"uphill accepts {a.uphill_tie_accepts}, h_final {a.h_final}")
        for v in a.violations:
            print(f"      {v}")
    for algo in sorted(uphill):
        print(f"uphill acceptances total [{algo}]: {uphill[algo]}")
    if report.summary_problems:
        for p in report.summary_problems:
            print(f"summary: {p}")
    else:
        print("summary: consistent with traces")
    return 0 if report.ok else 1


def _cmd_wnh(args) -> int:
    if args.n < 2:
        raise ConfigError("--n must be at least 2")
    k = _exp_for_qp(args.qp, args.base)
    cfg = QuantConfig(base=args.base, h_exp=k, eta_pow=0)
    # Dense synthetic objectives: a continuous uniform stretched over
    # many grid cells, so fractional parts are uniform by construction.
    span = 4096.0 / cfg.qp if cfg.qp > 1 else 4096.0
    rng = np.random.default_rng(args.seed)
    samples = rng.uniform(0.0, span, size=args.n)
    es = error_stats(samples, cfg, min_samples=2)
    ds = diff_error_stats(samples, cfg, min_samples=2)

    var_expected = 1.0 / (12.0 * cfg.qp * cfg.qp)
    mean_band = 3.0 * math.sqrt(var_expected / es.n)
    r1_band = 3.0 / math.sqrt(es.n)
    rows = [
        ("error_mean", 0.0, es.mean, es.n,
         "yes" if abs(es.mean) <= mean_band else "no"),
        ("error_variance", var_expected, es.variance, es.n,
         "yes" if 0.98 * var_expected <= es.variance <= 1.02 * var_expected
         else "no"),
        ("lag1_autocorr", 0.0, es.lag1_autocorr, es.n,
         "yes" if abs(es.lag1_autocorr) <= r1_band else "no"),
        ("diff_variance", IID_DIFF_VARIANCE, ds.variance, ds.n,
         "yes" if abs(ds.variance - IID_DIFF_VARIANCE) <= 0.02 * IID_DIFF_VARIANCE
         else "no"),
        # Reported for comparison only; the analytic row above is the gate.
        ("diff_variance_vs_claimed", CLAIMED_DIFF_CONSTANT, ds.variance, ds.n,
         "info"),
    ]
    _emit_report(rows, args.out)
    return 0


_SDE_KINDS = ("wiener", "decay", "double-well")


def _load_sde_config(path):
    try:
        import tomllib
    except ModuleNotFoundError:
        import tomli as tomllib
    try:
        with open(path, "rb") as fh:
            data = tomllib.load(fh)
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}") from None
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"{path}: {exc}") from None
    sde = data.get("sde")
    if not isinstance(sde, dict):
        raise ConfigError(f"{path}: missing [sde] table")
    known = {"kind", "dt", "steps", "paths", "trials", "iters", "seed"}
    unknown = sorted(set(sde) - known)
    if unknown:
        raise ConfigError(f"{path}: unknown sde keys {unknown}")
    kind = sde.get("kind")
    if kind not in _SDE_KINDS:
        raise ConfigError(f"{path}: sde.kind must be one of {_SDE_KINDS}")
    return {
        "kind": kind,
        "dt": float(sde.get("dt", 1e-3)),
        "steps": int(sde.get("steps", 1000)),
        "paths": int(sde.get("paths", 10_000)),
        "trials": int(sde.get("trials", 1000)),
        "iters": int(sde.get("iters", 4000)),
        "seed": int(sde.get("seed", 0)),
    }


def _cmd_sde(args) -> int:
    cfg = _load_sde_config(args.config)
    seed = cfg["seed"] if args.seed is None else args.seed
    kind = cfg["kind"]
    rows = []
    if kind == "wiener":
        params = SdeParams(
            grad=lambda x: np.zeros_like(x),
            x0=0.0, dt=cfg["dt"], steps=cfg["steps"],
            c_q=1.0, noise_schedule=lambda t: 1.0, n_paths=cfg["paths"],
        )
        traj = langevin_simulate(params, seed)
        disp = traj[-1, :, 0] - traj[0, :, 0]
        observed = float(np.var(disp, ddof=1))
        expected = cfg["steps"] * cfg["dt"]
        ok = abs(observed - expected) <= 0.05 * expected
        rows.append(("wiener_displacement_var", expected, observed,
                     cfg["paths"], "yes" if ok else "no"))
    elif kind == "decay":
        params = SdeParams(
            grad=lambda x: x, x0=1.0, dt=cfg["dt"], steps=cfg["steps"],
            c_q=1.0, noise_schedule=None, n_paths=1,
        )
        traj = langevin_simulate(params, seed)
        ks = np.arange(cfg["steps"] + 1)
        closed = (1.0 - cfg["dt"]) ** ks
        observed = float(np.max(np.abs(traj[:, 0, 0] - closed)))
        ok = observed <= 1e-9
        rows.append(("decay_max_abs_error", 0.0, observed, cfg["steps"],
                     "yes" if ok else "no"))
    else:
        bounds = (-2.0, 2.0)
        rate_q = hitting_rate(
            double_well, bounds, "qbo", cfg["trials"], seed,
            iters=cfg["iters"],
            schedule=ScheduleSpec(kind=ScheduleKind.LOG_SCHEDULE, c1=4.0),
        )
        rate_l = hitting_rate(
            double_well, bounds, "langevin", cfg["trials"], seed + 1,
            grad=double_well_grad, sigma=None, dt=cfg["dt"],
            sde_steps=cfg["steps"],
        )
        lo, hi = global_basin(double_well, bounds)
        ratio = (hi - lo) / (bounds[1] - bounds[0])
        rows.append(("double_well_qbo_rate", 0.95, rate_q, cfg["trials"],
                     "yes" if rate_q >= 0.95 else "no"))
        rows.append(("double_well_descent_rate", ratio, rate_l, cfg["trials"],
                     "yes" if abs(rate_l - ratio) <= 0.05 else "no"))
    _emit_report(rows, args.out)
    return 0


def _cmd_brute(args) -> int:
    instance = load_instance(args.instance)
    tour, cost = brute_force_tsp(instance)
    print(f"n {instance.n}")
    print(f"optimal_cost {cost!r}")
    print("order " + " ".join(str(i) for i in tour.order))
    return 0


_DISPATCH = {
    ("bench", "run"): _cmd_run,
    ("bench", "quantize"): _cmd_quantize,
    ("bench", "audit"): _cmd_audit,
    ("stats", "wnh"): _cmd_wnh,
    ("stats", "sde"): _cmd_sde,
    ("tsp", "brute"): _cmd_brute,
}


def cli_main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse already printed usage; keep its code for --help (0)
        # and normalize parse failures to the config-error code.
        return exc.code if exc.code in (0, 2) else 2
    handler = _DISPATCH[(args.area, args.cmd)]
    try:
        return handler(args)
    except (ConfigError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (ValueError, ArithmeticError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def main() -> None:
    sys.exit(cli_main())


if __name__ == "__main__":
    main()
