"""Experiment config, runner artifacts, trace audit, and the CLI."""

import csv
from pathlib import Path

import pytest

from qopt.bench.audit import audit_directory, audit_trace_file
from qopt.bench.cli import cli_main
from qopt.bench.config import ConfigError, ExperimentConfig, load_config, resolve_threads
from qopt.bench.runner import (
    SchemaError,
    run_experiment,
    summarize,
    verify_summary,
    write_summary_csv,
)
from qopt.solvers import brute_force_tsp
from qopt.tsp import generate_instance

TRACE_HEADER = ("run_id,algorithm,seed,n_cities,iter,best_cost,current_cost,"
                "h_exp,accepted,wall_ms\n")


def fake_trace(path, run_id, algo, seed, n, rows):
    lines = [TRACE_HEADER]
    for (it, best, cur, h, acc) in rows:
        lines.append(f"{run_id},{algo},{seed},{n},{it},{best!r},{cur!r},{h},{acc},1.0\n")
    Path(path).write_text("".join(lines), encoding="ascii")
    return Path(path)


def test_summarize_hand_arithmetic(tmp_path):
    paths = [
        fake_trace(tmp_path / "nn.csv", "nn_n5_s0", "nn", 0, 5,
                   [(0, 20.0, 20.0, 0, 0)]),
        fake_trace(tmp_path / "a0.csv", "qbo_n5_s0", "qbo", 0, 5,
                   [(0, 20.0, 20.0, 0, 0), (1, 10.0, 10.0, 1, 1)]),
        fake_trace(tmp_path / "a1.csv", "qbo_n5_s1", "qbo", 1, 5,
                   [(0, 20.0, 20.0, 0, 0), (1, 12.0, 12.0, 1, 1)]),
        fake_trace(tmp_path / "b0.csv", "sa_n5_s0", "sa", 0, 5,
                   [(0, 20.0, 20.0, 0, 0), (1, 13.0, 13.0, 0, 1)]),
    ]
    rows = {(r.n_cities, r.algorithm): r for r in summarize(paths)}
    qbo = rows[(5, "qbo")]
    assert qbo.mean_final_cost == pytest.approx(11.0)
    assert qbo.best_final_cost == pytest.approx(10.0)
    assert qbo.improvement_pct == pytest.approx(45.0)
    assert qbo.n_runs == 2
    sa = rows[(5, "sa")]
    assert sa.mean_final_cost == sa.best_final_cost == pytest.approx(13.0)
    assert sa.n_runs == 1
    nn = rows[(5, "nn")]
    assert nn.improvement_pct == 0.0


def test_summarize_requires_baseline(tmp_path):
    lone = fake_trace(tmp_path / "a.csv", "qbo_n5_s0", "qbo", 0, 5,
                      [(0, 20.0, 20.0, 0, 0)])
    with pytest.raises(SchemaError):
        summarize([lone])


def test_summarize_rejects_bad_schema(tmp_path):
    bad = tmp_path / "bad.csv"
    bad.write_text("foo,bar\n1,2\n", encoding="ascii")
    with pytest.raises(SchemaError):
        summarize([bad])


def write_config(path, text):
    Path(path).write_text(text, encoding="ascii")
    return str(path)


GOOD_TOML = """
[experiment]
cities = [6]
range = 50.0
instance_seed = 3
run_seeds = [0, 1]
iters = 300
algorithms = ["nn", "qbo", "sa", "qa"]
output_dir = "{out}"

[qbo]
schedule = "log"
c1 = 16.0

[sa]
t0 = 100.0
alpha = 0.9999
"""


def test_load_config_round_trip(tmp_path):
    cfg_path = write_config(tmp_path / "exp.toml",
                            GOOD_TOML.format(out=tmp_path / "out"))
    cfg = load_config(cfg_path)
    assert cfg.cities == [6]
    assert cfg.coord_range == 50.0
    assert cfg.run_seeds == [0, 1]
    assert cfg.qbo_schedule == "log"
    assert cfg.sa_t0 == 100.0
    cfg.validate()


def test_load_config_rejects_unknown_key(tmp_path):
    cfg_path = write_config(tmp_path / "exp.toml", "[experiment]\nctities = [6]\n")
    with pytest.raises(ConfigError, match="ctities"):
        load_config(cfg_path)


def test_load_config_rejects_wrong_type(tmp_path):
    cfg_path = write_config(tmp_path / "exp.toml", "[experiment]\niters = \"many\"\n")
    with pytest.raises(ConfigError, match="iters"):
        load_config(cfg_path)


def test_load_config_rejects_bad_toml(tmp_path):
    cfg_path = write_config(tmp_path / "exp.toml", "experiment = [unclosed\n")
    with pytest.raises(ConfigError):
        load_config(cfg_path)


def test_validate_rejects_empty_run_seeds():
    cfg = ExperimentConfig(run_seeds=[])
    with pytest.raises(ConfigError):
        cfg.validate()


def test_validate_rejects_tiny_cities():
    with pytest.raises(ConfigError):
        ExperimentConfig(cities=[2]).validate()
    with pytest.raises(ConfigError):
        ExperimentConfig(cities=[]).validate()
    with pytest.raises(ConfigError):
        ExperimentConfig(algorithms=["nn", "tabu"]).validate()


def test_resolve_threads_precedence(monkeypatch):
    cfg = ExperimentConfig(threads=3)
    monkeypatch.delenv("QOPT_THREADS", raising=False)
    assert resolve_threads(None, cfg) == 3
    monkeypatch.setenv("QOPT_THREADS", "5")
    assert resolve_threads(None, cfg) == 5
    assert resolve_threads(2, cfg) == 2
    monkeypatch.setenv("QOPT_THREADS", "zero")
    with pytest.raises(ConfigError):
        resolve_threads(None, cfg)


@pytest.fixture(scope="module")
def tiny_result(tmp_path_factory):
    out = tmp_path_factory.mktemp("exp")
    cfg = ExperimentConfig(cities=[6], coord_range=50.0, instance_seed=3,
                           run_seeds=[0, 1], iters=300, output_dir=str(out))
    return cfg, run_experiment(cfg, threads=1)


def test_runner_writes_all_artifacts(tiny_result):
    cfg, res = tiny_result
    out = Path(cfg.output_dir)
    assert (out / "summary.csv").is_file()
    assert (out / "instances" / "cities_6.txt").is_file()
    assert (out / "cost_trend_n6.svg").is_file()
    # 3 solvers x 2 seeds + the constructive baseline
    assert len(list((out / "traces").glob("*.csv"))) == 7
    algos = {r.algorithm for r in res.summary_rows}
    assert algos == {"nn", "qbo", "sa", "qa"}
    assert verify_summary(out) == []


def test_runner_traces_replay_clean(tiny_result):
    cfg, _ = tiny_result
    report = audit_directory(cfg.output_dir)
    assert report.ok
    assert len(report.audits) == 7


def test_rerun_summary_is_byte_identical(tiny_result, tmp_path):
    cfg, _ = tiny_result
    again = ExperimentConfig(cities=[6], coord_range=50.0, instance_seed=3,
                             run_seeds=[0, 1], iters=300,
                             output_dir=str(tmp_path / "again"))
    run_experiment(again, threads=1)
    first = Path(cfg.output_dir, "summary.csv").read_bytes()
    second = Path(tmp_path, "again", "summary.csv").read_bytes()
    assert first == second


def test_audit_flags_tampered_acceptance(tiny_result, tmp_path):
    cfg, _ = tiny_result
    src = sorted(Path(cfg.output_dir, "traces").glob("qbo_*.csv"))[0]
    rows = src.read_text(encoding="ascii").splitlines()
    target = None
    for k, line in enumerate(rows[2:], start=2):
        parts = line.split(",")
        if parts[8] == "1":
            parts[6] = repr(float(parts[6]) + 500.0)   # incumbent jumps uphill
            rows[k] = ",".join(parts)
            target = k
            break
    assert target is not None
    doctored = tmp_path / "doctored.csv"
    doctored.write_text("\n".join(rows) + "\n", encoding="ascii")
    audit = audit_trace_file(doctored)
    assert not audit.ok
    assert any("replay" in v or "best" in v for v in audit.violations)


def test_verify_summary_catches_edits(tiny_result, tmp_path):
    cfg, res = tiny_result
    copy = tmp_path / "copy"
    (copy / "traces").mkdir(parents=True)
    for p in Path(cfg.output_dir, "traces").glob("*.csv"):
        (copy / "traces" / p.name).write_bytes(p.read_bytes())
    rows = list(res.summary_rows)
    rows[0] = type(rows[0])(n_cities=rows[0].n_cities, algorithm=rows[0].algorithm,
                            mean_final_cost=rows[0].mean_final_cost + 1.0,
                            best_final_cost=rows[0].best_final_cost,
                            improvement_pct=rows[0].improvement_pct,
                            n_runs=rows[0].n_runs)
    write_summary_csv(copy / "summary.csv", rows)
    assert verify_summary(copy) != []


def test_qbo_matches_brute_force_on_a_small_grid_run(tmp_path):
    cfg = ExperimentConfig(cities=[8], coord_range=100.0, instance_seed=3,
                           run_seeds=[0], iters=200_000, algorithms=["nn", "qbo"],
                           output_dir=str(tmp_path / "n8"))
    res = run_experiment(cfg, threads=1)
    _, opt = brute_force_tsp(generate_instance(8, 100.0, 3))
    qbo = [r for r in res.summary_rows if r.algorithm == "qbo"][0]
    assert qbo.best_final_cost == pytest.approx(opt, abs=1e-9)


def test_cli_quantize_matches_hand_value(capsys):
    assert cli_main(["bench", "quantize", "--f", "3.7", "--base", "2", "--h", "0"]) == 0
    out = capsys.readouterr().out
    assert "level 4" in out
    assert "value 4.0" in out


def test_cli_wnh_gates_pass(capsys, tmp_path):
    report = tmp_path / "wnh.csv"
    code = cli_main(["stats", "wnh", "--n", "100000", "--qp", "1",
                     "--out", str(report)])
    assert code == 0
    rows = list(csv.DictReader(report.open()))
    by_stat = {r["statistic"]: r for r in rows}
    assert by_stat["error_variance"]["pass"] == "yes"
    assert float(by_stat["error_variance"]["observed"]) == pytest.approx(1 / 12, rel=0.02)
    assert by_stat["lag1_autocorr"]["pass"] == "yes"
    assert by_stat["diff_variance_vs_claimed"]["pass"] == "info"


def test_cli_wnh_rejects_non_power_grid():
    assert cli_main(["stats", "wnh", "--n", "1000", "--qp", "3"]) == 2


def test_cli_missing_config_is_a_config_error():
    assert cli_main(["bench", "run", "--config", "does-not-exist.toml"]) == 2


def test_cli_unknown_flag_is_usage_error(capsys):
    assert cli_main(["bench", "--bogus"]) == 2
    assert cli_main(["nonsense"]) == 2


def test_cli_run_and_audit_round_trip(tmp_path, capsys):
    out = tmp_path / "cli-out"
    cfg_path = write_config(tmp_path / "exp.toml", GOOD_TOML.format(out=out))
    assert cli_main(["bench", "run", "--config", cfg_path]) == 0
    assert (out / "summary.csv").is_file()
    assert cli_main(["bench", "audit", str(out)]) == 0
    text = capsys.readouterr().out
    assert "summary: consistent with traces" in text


def test_cli_brute_prints_optimum(tmp_path, capsys):
    from qopt.tsp import save_instance
    inst = generate_instance(7, 100.0, 5)
    path = tmp_path / "seven.txt"
    save_instance(inst, path)
    assert cli_main(["tsp", "brute", "--instance", str(path)]) == 0
    out = capsys.readouterr().out
    _, opt = brute_force_tsp(inst)
    assert f"optimal_cost {opt!r}" in out
    assert cli_main(["tsp", "brute", "--instance", str(tmp_path / "missing.txt")]) == 2


def test_cli_sde_decay_report(tmp_path, capsys):
    cfg_path = write_config(tmp_path / "sde.toml", "[sde]\nkind = \"decay\"\n")
    assert cli_main(["stats", "sde", "--config", cfg_path]) == 0
    assert "decay_max_abs_error" in capsys.readouterr().out
    bad = write_config(tmp_path / "bad.toml", "[sde]\nkind = \"warp\"\n")
    assert cli_main(["stats", "sde", "--config", bad]) == 2
