"""Experiment configuration: TOML files with strictly validated dotted keys.

A config file is a flat set of ``section.key`` values, for example::

    [experiment]
    cities = [100, 150, 200]
    run_seeds = [0, 1, 2, 3, 4, 5, 6, 7, 8, 9]

    [qbo]
    base = 2
    schedule = "log"

    [sa]
    t0 = 100.0
    alpha = 0.9999

Unknown keys are rejected rather than ignored: a typo like ``sa.aplha``
must fail loudly instead of silently running the default and corrupting a
comparison.  Every key has a default, so the empty file is a valid config
describing the standard benchmark.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field

try:
    import tomllib
except ModuleNotFoundError:  # Python 3.10
    import tomli as tomllib

from ..schedules import ScheduleKind, ScheduleSpec
from ..solvers import SaCooling, SolverConfig

__all__ = ["ConfigError", "ExperimentConfig", "load_config", "resolve_threads"]

KNOWN_ALGORITHMS = ("nn", "sa", "qa", "qbo")


class ConfigError(ValueError):
    """A config file could not be parsed or failed validation."""


@dataclass
class ExperimentConfig:
    """Full description of one benchmark experiment.

    Defaults reproduce the standard comparison: shared uniform instances,
    shared nearest-neighbor start, 2e5 iterations per run, ten seeds.
    The solver defaults are documented desk-scale choices, not published
    values: quantized search runs the log resolution ramp with gain 16,
    annealing uses geometric cooling from T0 = 100 with alpha = 0.9999,
    and the replica solver uses 6 slices at T = 1 with the transverse
    field annealed from 3.
    """

    # experiment.*
    cities: list[int] = field(default_factory=lambda: [100])
    coord_range: float = 200.0
    instance_seed: int = 42
    run_seeds: list[int] = field(default_factory=lambda: list(range(10)))
    iters: int = 200_000
    patience: int = 0
    algorithms: list[str] = field(default_factory=lambda: list(KNOWN_ALGORITHMS))
    output_dir: str = "qopt-out"
    threads: int = 1
    # qbo.*
    qbo_base: int = 2
    qbo_schedule: str = "log"
    qbo_c0: float = 1.0
    qbo_c1: float = 16.0
    qbo_beta: float = 0.0
    qbo_c_o: float = 1.0
    qbo_c_q: float = 1.0 / 3.0
    qbo_strict_improvement_only: bool = False
    # sa.*
    sa_t0: float = 100.0
    sa_alpha: float = 0.9999
    sa_cooling: str = "geometric"
    # qa.*
    qa_slices: int = 6
    qa_gamma0: float = 3.0
    qa_t: float = 1.0

    def validate(self) -> None:
        if not self.cities:
            raise ConfigError("experiment.cities must not be empty")
        if any(n < 3 for n in self.cities):
            raise ConfigError("experiment.cities entries must be >= 3")
        if len(set(self.cities)) != len(self.cities):
            raise ConfigError("experiment.cities entries must be distinct")
        if not self.run_seeds:
            raise ConfigError("experiment.run_seeds must not be empty")
        if len(set(self.run_seeds)) != len(self.run_seeds):
            raise ConfigError("experiment.run_seeds entries must be distinct")
        if not self.coord_range > 0:
            raise ConfigError("experiment.range must be > 0")
        if self.iters < 1:
            raise ConfigError("experiment.iters must be >= 1")
        if self.patience < 0:
            raise ConfigError("experiment.patience must be >= 0")
        if self.threads < 1:
            raise ConfigError("experiment.threads must be >= 1")
        bad = [a for a in self.algorithms if a not in KNOWN_ALGORITHMS]
        if bad:
            raise ConfigError(
                f"experiment.algorithms contains unknown entries {bad}; "
                f"choose from {list(KNOWN_ALGORITHMS)}"
            )
        if not self.algorithms:
            raise ConfigError("experiment.algorithms must not be empty")
        if self.qbo_schedule not in ("greedy", "log"):
            raise ConfigError("qbo.schedule must be 'greedy' or 'log'")
        if self.sa_cooling not in ("geometric", "log"):
            raise ConfigError("sa.cooling must be 'geometric' or 'log'")
        if not 0.0 < self.sa_alpha <= 1.0:
            raise ConfigError("sa.alpha must be in (0, 1]")
        # Delegate numeric range checks to the dataclasses that own them.
        try:
            self.qbo_schedule_spec()
            self.solver_config("sa")
            self.solver_config("qa")
        except (ValueError, TypeError) as exc:
            raise ConfigError(str(exc)) from None

    def qbo_schedule_spec(self) -> ScheduleSpec:
        kind = (ScheduleKind.GREEDY_INCREMENT if self.qbo_schedule == "greedy"
                else ScheduleKind.LOG_SCHEDULE)
        return ScheduleSpec(
            kind=kind,
            base=self.qbo_base,
            c0=self.qbo_c0,
            c1=self.qbo_c1,
            beta=self.qbo_beta,
            c_o=self.qbo_c_o,
            c_q=self.qbo_c_q,
        )

    def solver_config(self, algorithm: str) -> SolverConfig:
        """SolverConfig for one algorithm under this experiment's budget."""
        cooling = SaCooling.GEOMETRIC if self.sa_cooling == "geometric" else SaCooling.LOGARITHMIC
        return SolverConfig(
            max_iters=self.iters,
            patience=self.patience,
            schedule=self.qbo_schedule_spec() if algorithm == "qbo" else ScheduleSpec(),
            strict_improvement_only=self.qbo_strict_improvement_only,
            sa_t0=self.sa_t0,
            sa_alpha=self.sa_alpha,
            sa_cooling=cooling,
            qa_slices=self.qa_slices,
            qa_gamma0=self.qa_gamma0,
            qa_t=self.qa_t,
        )


# dotted config key -> (attribute, caster).  The casters are strict: TOML
# already types values, so a float where an int belongs is a user error.
def _int(name):
    def cast(v):
        if isinstance(v, bool) or not isinstance(v, int):
            raise ConfigError(f"{name} must be an integer, got {v!r}")
        return v
    return cast


def _real(name):
    def cast(v):
        if isinstance(v, bool) or not isinstance(v, (int, float)):
            raise ConfigError(f"{name} must be a number, got {v!r}")
        return float(v)
    return cast


def _bool(name):
    def cast(v):
        if not isinstance(v, bool):
            raise ConfigError(f"{name} must be true or false, got {v!r}")
        return v
    return cast


def _str(name):
    def cast(v):
        if not isinstance(v, str):
            raise ConfigError(f"{name} must be a string, got {v!r}")
        return v
    return cast


def _int_list(name):
    inner = _int(name)
    def cast(v):
        if not isinstance(v, list):
            raise ConfigError(f"{name} must be a list of integers, got {v!r}")
        return [inner(x) for x in v]
    return cast


def _str_list(name):
    inner = _str(name)
    def cast(v):
        if not isinstance(v, list):
            raise ConfigError(f"{name} must be a list of strings, got {v!r}")
        return [inner(x) for x in v]
    return cast


_KEYS = {
    "experiment.cities": ("cities", _int_list("experiment.cities")),
    "experiment.range": ("coord_range", _real("experiment.range")),
    "experiment.instance_seed": ("instance_seed", _int("experiment.instance_seed")),
    "experiment.run_seeds": ("run_seeds", _int_list("experiment.run_seeds")),
    "experiment.iters": ("iters", _int("experiment.iters")),
    "experiment.patience": ("patience", _int("experiment.patience")),
    "experiment.algorithms": ("algorithms", _str_list("experiment.algorithms")),
    "experiment.output_dir": ("output_dir", _str("experiment.output_dir")),
    "experiment.threads": ("threads", _int("experiment.threads")),
    "qbo.base": ("qbo_base", _int("qbo.base")),
    "qbo.schedule": ("qbo_schedule", _str("qbo.schedule")),
    "qbo.c0": ("qbo_c0", _real("qbo.c0")),
    "qbo.c1": ("qbo_c1", _real("qbo.c1")),
    "qbo.beta": ("qbo_beta", _real("qbo.beta")),
    "qbo.c_o": ("qbo_c_o", _real("qbo.c_o")),
    "qbo.c_q": ("qbo_c_q", _real("qbo.c_q")),
    "qbo.strict_improvement_only": (
        "qbo_strict_improvement_only", _bool("qbo.strict_improvement_only")),
    "sa.t0": ("sa_t0", _real("sa.t0")),
    "sa.alpha": ("sa_alpha", _real("sa.alpha")),
    "sa.cooling": ("sa_cooling", _str("sa.cooling")),
    "qa.slices": ("qa_slices", _int("qa.slices")),
    "qa.gamma0": ("qa_gamma0", _real("qa.gamma0")),
    "qa.t": ("qa_t", _real("qa.t")),
}


def _flatten(table: dict, prefix: str = "") -> dict:
    flat = {}
    for key, value in table.items():
        dotted = f"{prefix}{key}"
        if isinstance(value, dict):
            flat.update(_flatten(value, f"{dotted}."))
        else:
            flat[dotted] = value
    return flat


def load_config(path) -> ExperimentConfig:
    """Parse and validate a TOML experiment config.

    Raises :class:`ConfigError` for unreadable files, syntax errors (with
    the parser's line diagnostics), unknown keys, wrong types, and value
    ranges that make no sense.
    """
    try:
        with open(path, "rb") as fh:
            table = tomllib.load(fh)
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}") from None
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"{path}: {exc}") from None

    cfg = ExperimentConfig()
    for dotted, value in sorted(_flatten(table).items()):
        entry = _KEYS.get(dotted)
        if entry is None:
            raise ConfigError(f"{path}: unknown config key '{dotted}'")
        attr, cast = entry
        setattr(cfg, attr, cast(value))
    try:
        cfg.validate()
    except ConfigError as exc:
        raise ConfigError(f"{path}: {exc}") from None
    return cfg


def resolve_threads(cli_value: int | None, cfg: ExperimentConfig | None = None) -> int:
    """--threads wins, then QOPT_THREADS, then the config value, then 1."""
    if cli_value is not None:
        if cli_value < 1:
            raise ConfigError("--threads must be >= 1")
        return cli_value
    env = os.environ.get("QOPT_THREADS")
    if env is not None:
        try:
            n = int(env)
        except ValueError:
            raise ConfigError(f"QOPT_THREADS must be an integer, got {env!r}") from None
        if n < 1:
            raise ConfigError("QOPT_THREADS must be >= 1")
        return n
    if cfg is not None:
        return cfg.threads
    return 1
