"""Statistics lab: rounding-error laws, sublevel shrinkage, and diffusion.

The quantized-acceptance solver leans on a white-noise model of its own
rounding errors: for dense inputs the error eps = level - Q_p * f should
look like i.i.d. uniform noise on (-0.5, 0.5], with variance 1/12 in the
unit domain and 1/(12 Q_p^2) after rescaling by the grid.  This module
measures those statistics on arbitrary sample streams, audits the
sublevel-set shrinkage that drives convergence, and runs a small
Euler-Maruyama simulator for the continuum limit of the search dynamics.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .quantizer import EXACT_FLOOR_CAP, QuantConfig, _pow_int
from .schedules import ScheduleKind, ScheduleSpec, sigma_inf
from .solvers import RunTrace, SolverConfig, UniformSearchProblem, qbo_optimize

__all__ = [
    "TooFewSamplesError",
    "DivergenceError",
    "ErrorStats",
    "DiffErrorStats",
    "error_stats",
    "diff_error_stats",
    "trace_error_stats",
    "sublevel_measure_trace",
    "SdeParams",
    "langevin_simulate",
    "global_basin",
    "hitting_rate",
    "double_well",
    "double_well_grad",
]

# Below this many samples the variance bands used by the reports are too
# wide to mean anything.
MIN_SAMPLES = 10_000

# Constants for the difference-error report: the diffusion constant
# sometimes quoted for consecutive-difference noise, and the analytic
# variance of the difference of two independent uniform(-1/2, 1/2] draws.
# Both are reported side by side; see diff_error_stats.
CLAIMED_DIFF_CONSTANT = 1.0 / 3.0
IID_DIFF_VARIANCE = 1.0 / 6.0


class TooFewSamplesError(ValueError):
    """Sample stream is too short for a meaningful statistic."""


class DivergenceError(ArithmeticError):
    """A simulated trajectory left the guard radius."""


def _unit_errors(f_samples, cfg: QuantConfig) -> np.ndarray:
    """Signed unit-domain errors level - Q_p * f for every sample."""
    f = np.asarray(f_samples, dtype=np.float64)
    if f.ndim != 1:
        raise ValueError(f"expected a 1-D sample stream, got shape {f.shape}")
    if not np.all(np.isfinite(f)) or f.min() < 0.0:
        raise ValueError("samples must be finite and >= 0")
    scaled = f * cfg.qp
    if scaled.size and scaled.max() + 0.5 >= EXACT_FLOOR_CAP:
        raise ValueError("samples too large for exact quantization at this grid")
    return np.floor(scaled + 0.5) - scaled


@dataclass(frozen=True)
class ErrorStats:
    """Rounding-error statistics of one sample stream.

    ``mean`` and ``variance`` describe the value-domain error eps / Q_p;
    ``lag1_autocorr`` is computed on the unit-domain eps (it is scale
    free).  ``degenerate`` flags streams whose errors carry no variance
    at all, which violates the dense-input assumption behind the noise
    model and makes the autocorrelation undefined (NaN).
    """

    mean: float
    variance: float
    lag1_autocorr: float
    n: int
    qp: float
    degenerate: bool


@dataclass(frozen=True)
class DiffErrorStats:
    """Variance of consecutive error differences, with both reference values.

    The continuum analysis of the search dynamics uses a diffusion
    constant of 1/3 for this statistic, while independent uniform errors
    give exactly 1/6.  The lab reports the measurement next to both
    constants and takes no side.
    """

    variance: float
    n: int
    qp: float
    degenerate: bool
    claimed_constant: float = CLAIMED_DIFF_CONSTANT
    iid_uniform_variance: float = IID_DIFF_VARIANCE


def error_stats(f_samples, cfg: QuantConfig, min_samples: int = MIN_SAMPLES) -> ErrorStats:
    eps = _unit_errors(f_samples, cfg)
    n = eps.size
    if n < min_samples:
        raise TooFewSamplesError(f"need at least {min_samples} samples, got {n}")
    qp = cfg.qp
    value_err = eps / qp
    centered = eps - eps.mean()
    denom = float(np.dot(centered, centered))
    degenerate = denom == 0.0
    if degenerate:
        lag1 = math.nan
    else:
        lag1 = float(np.dot(centered[:-1], centered[1:]) / denom)
    return ErrorStats(
        mean=float(value_err.mean()),
        variance=float(value_err.var(ddof=1)),
        lag1_autocorr=lag1,
        n=n,
        qp=qp,
        degenerate=degenerate,
    )


def diff_error_stats(f_samples, cfg: QuantConfig, min_samples: int = MIN_SAMPLES) -> DiffErrorStats:
    eps = _unit_errors(f_samples, cfg)
    n = eps.size
    if n < min_samples:
        raise TooFewSamplesError(f"need at least {min_samples} samples, got {n}")
    diffs = np.diff(eps)
    var = float(diffs.var(ddof=1))
    return DiffErrorStats(variance=var, n=n, qp=cfg.qp, degenerate=var == 0.0)


def trace_error_stats(trace: RunTrace, min_samples: int = 3) -> ErrorStats:
    """Rounding-error statistics of a solver run's own cost stream.

    Reads the recorded incumbent costs and each record's grid exponent
    from the trace and recovers the unit-domain errors the solver saw.
    Solver streams are short and serially dependent, so this report is
    informative rather than a gate; the sample floor only guards against
    empty traces.
    """
    base = trace.meta.get("base")
    eta = trace.meta.get("eta_pow")
    if base is None or eta is None:
        raise ValueError("trace lacks quantizer metadata (base/eta_pow)")
    n = len(trace.records)
    if n < min_samples:
        raise TooFewSamplesError(f"need at least {min_samples} records, got {n}")
    qps = np.array([_pow_int(base, eta + r.h_exp) for r in trace.records])
    costs = np.array([r.current_cost for r in trace.records])
    scaled = costs * qps
    eps = np.floor(scaled + 0.5) - scaled
    centered = eps - eps.mean()
    denom = float(np.dot(centered, centered))
    degenerate = denom == 0.0
    lag1 = math.nan if degenerate else float(np.dot(centered[:-1], centered[1:]) / denom)
    # Mixed grids make a single value-domain variance meaningless here, so
    # the value-domain fields use the finest grid seen as the reference.
    qp_ref = float(qps.max())
    return ErrorStats(
        mean=float((eps / qps).mean()),
        variance=float((eps / qp_ref).var(ddof=1)),
        lag1_autocorr=lag1,
        n=n,
        qp=qp_ref,
        degenerate=degenerate,
    )


def sublevel_measure_trace(f: Callable, bounds: tuple[float, float], grid_n: int,
                           trace: RunTrace) -> list[float]:
    """Grid measure of {x : f(x) <= quantized incumbent} at each acceptance.

    The measure is a Riemann count over a uniform grid of ``grid_n``
    points on ``bounds``.  The incumbent's quantized value is rebuilt from
    the trace's recorded raw cost and grid exponent, so the sequence
    reflects exactly what the solver compared against.  Each acceptance
    can only shrink the quantized incumbent, so up to one-cell slack the
    sequence is non-increasing.
    """
    a, b = float(bounds[0]), float(bounds[1])
    if not a < b:
        raise ValueError(f"need a < b, got [{a}, {b}]")
    if grid_n < 1_000:
        raise ValueError(f"grid_n must be >= 1000, got {grid_n}")
    base = trace.meta.get("base")
    eta = trace.meta.get("eta_pow")
    if base is None or eta is None:
        raise ValueError("trace lacks quantizer metadata (base/eta_pow)")
    xs = np.linspace(a, b, grid_n)
    fx = np.asarray(f(xs), dtype=np.float64)
    if fx.ndim == 0:
        fx = np.full_like(xs, float(fx))  # constant objectives are fine
    elif fx.shape != xs.shape:
        raise ValueError("f must map a grid array to an equally shaped array")
    if not np.all(np.isfinite(fx)):
        raise ValueError("f is undefined (non-finite) somewhere on the grid")
    cell = (b - a) / grid_n
    measures = []
    for rec in trace.records:
        if not rec.accepted:
            continue
        qp = _pow_int(base, eta + rec.h_exp)
        incumbent_q = math.floor(rec.current_cost * qp + 0.5) / qp
        measures.append(float(np.count_nonzero(fx <= incumbent_q)) * cell)
    return measures


@dataclass
class SdeParams:
    """Inputs for :func:`langevin_simulate`.

    ``grad`` must accept an (n_paths, dim) array and return the gradient
    with the same shape.  ``noise_schedule`` may be a ScheduleSpec (its
    noise floor c_o / ln(t+2) is used, or the constant c_o for a constant
    spec), a plain callable t -> sigma, or None for zero noise.  The
    step index k plays the role of t.
    """

    grad: Callable
    x0: float | Sequence[float] | np.ndarray
    dt: float
    steps: int
    c_q: float = 1.0 / 3.0
    noise_schedule: ScheduleSpec | Callable[[float], float] | None = None
    n_paths: int = 1
    guard_radius: float = 1e6

    def __post_init__(self) -> None:
        if not (self.dt > 0.0):
            raise ValueError(f"dt must be > 0, got {self.dt!r}")
        if self.steps < 1:
            raise ValueError(f"steps must be >= 1, got {self.steps}")
        if self.n_paths < 1:
            raise ValueError(f"n_paths must be >= 1, got {self.n_paths}")
        if not (self.c_q > 0.0):
            raise ValueError(f"c_q must be > 0, got {self.c_q!r}")
        if not (self.guard_radius > 0.0):
            raise ValueError(f"guard_radius must be > 0, got {self.guard_radius!r}")


def _sigma_fn(schedule) -> Callable[[float], float]:
    if schedule is None:
        return lambda t: 0.0
    if isinstance(schedule, ScheduleSpec):
        if schedule.kind is ScheduleKind.CONSTANT:
            return lambda t, c=schedule.c_o: c
        if schedule.kind is ScheduleKind.LOG_SCHEDULE:
            return lambda t, c=schedule.c_o: sigma_inf(t, c)
        raise ValueError(
            "greedy schedules have no continuous-time noise amplitude; "
            "use a log or constant spec, or pass a callable"
        )
    if callable(schedule):
        return schedule
    raise TypeError(f"cannot interpret noise schedule {schedule!r}")


def langevin_simulate(params: SdeParams, seed: int) -> np.ndarray:
    """Euler-Maruyama integration of overdamped Langevin dynamics.

    X_{k+1} = X_k - grad(X_k) dt + sqrt(c_q) * sigma(k) * sqrt(dt) * g_k

    with g_k standard normal.  Returns the full trajectory with shape
    (steps + 1, n_paths, dim).  ``x0`` may be a scalar, a (dim,) vector
    shared by all paths, or an (n_paths, dim) array of per-path starts.
    Bit-reproducible for a fixed seed.
    """
    rng = np.random.default_rng(seed)
    x0 = np.asarray(params.x0, dtype=np.float64)
    if x0.ndim == 0:
        x0 = x0.reshape(1)
    if x0.ndim == 1:
        cur = np.broadcast_to(x0, (params.n_paths, x0.size)).copy()
    elif x0.ndim == 2:
        if x0.shape[0] != params.n_paths:
            raise ValueError(
                f"x0 has {x0.shape[0]} rows but n_paths is {params.n_paths}"
            )
        cur = x0.copy()
    else:
        raise ValueError(f"x0 must be at most 2-D, got shape {x0.shape}")

    sigma = _sigma_fn(params.noise_schedule)
    dim = cur.shape[1]
    out = np.empty((params.steps + 1, params.n_paths, dim))
    out[0] = cur
    root_cq_dt = math.sqrt(params.c_q) * math.sqrt(params.dt)
    for k in range(params.steps):
        g = rng.standard_normal(cur.shape)
        cur = cur - np.asarray(params.grad(cur)) * params.dt + (root_cq_dt * sigma(k)) * g
        if np.abs(cur).max() > params.guard_radius:
            raise DivergenceError(
                f"trajectory left the guard radius {params.guard_radius:g} at step {k + 1}"
            )
        out[k + 1] = cur
    return out


def double_well(x):
    """Asymmetric double well (x^2 - 1)^2 + 0.2 x + 0.5, positive on [-2, 2].

    Global minimum near x = -1.025, a higher local minimum near x = 0.975,
    and a ridge near x = 0.05 separating the two basins.
    """
    x = np.asarray(x, dtype=np.float64)
    return (x * x - 1.0) ** 2 + 0.2 * x + 0.5


def double_well_grad(x):
    x = np.asarray(x, dtype=np.float64)
    return 4.0 * x * (x * x - 1.0) + 0.2


def global_basin(f: Callable, bounds: tuple[float, float], grid_n: int = 4096) -> tuple[float, float]:
    """Basin of attraction of the global minimum, by dense-grid descent.

    Finds the grid argmin and expands outward while the function keeps
    rising, i.e. while plain descent from those points would still slide
    into the global minimum.  Returns the basin's (left, right) bounds.
    """
    a, b = float(bounds[0]), float(bounds[1])
    if not a < b:
        raise ValueError(f"need a < b, got [{a}, {b}]")
    xs = np.linspace(a, b, grid_n)
    fx = np.asarray(f(xs), dtype=np.float64)
    if not np.all(np.isfinite(fx)):
        raise ValueError("f is undefined (non-finite) somewhere on the grid")
    i_min = int(np.argmin(fx))
    lo = i_min
    while lo > 0 and fx[lo - 1] >= fx[lo]:
        lo -= 1
    hi = i_min
    while hi < grid_n - 1 and fx[hi + 1] >= fx[hi]:
        hi += 1
    return float(xs[lo]), float(xs[hi])


def hitting_rate(
    f: Callable,
    bounds: tuple[float, float],
    optimizer: str,
    trials: int,
    seed: int,
    *,
    iters: int = 4000,
    schedule: ScheduleSpec | None = None,
    grad: Callable | None = None,
    sigma: ScheduleSpec | Callable[[float], float] | None = None,
    dt: float = 1e-3,
    sde_steps: int = 2000,
    c_q: float = 1.0 / 3.0,
    grid_n: int = 4096,
) -> float:
    """Fraction of independent trials whose final state lands in the global basin.

    ``optimizer`` is "qbo" (quantized blind search over uniform proposals,
    driven by ``schedule``, log ramp by default) or "langevin"
    (Euler-Maruyama with ``grad``, noise from ``sigma``; sigma None means
    plain descent).  Starts are uniform on ``bounds`` in both cases, and
    the basin itself comes from the dense-grid oracle, so the comparison
    between optimizers is apples to apples.
    """
    basin_lo, basin_hi = global_basin(f, bounds, grid_n)
    starts_rng = np.random.default_rng(seed)
    lo, hi = float(bounds[0]), float(bounds[1])
    starts = starts_rng.uniform(lo, hi, size=trials)

    if optimizer == "qbo":
        spec = schedule or ScheduleSpec(kind=ScheduleKind.LOG_SCHEDULE, c1=4.0)
        cfg = SolverConfig(max_iters=iters, schedule=spec, record_every=max(1, iters))
        hits = 0
        for k in range(trials):
            problem = UniformSearchProblem(f, lo, hi, x0=float(starts[k]))
            trace = qbo_optimize(problem, cfg, seed=seed + 1 + k)
            if basin_lo <= float(trace.final_state) <= basin_hi:
                hits += 1
        return hits / trials

    if optimizer == "langevin":
        if grad is None:
            raise ValueError("langevin hitting_rate needs grad")
        params = SdeParams(
            grad=grad,
            x0=starts.reshape(trials, 1),
            dt=dt,
            steps=sde_steps,
            c_q=c_q,
            noise_schedule=sigma,
            n_paths=trials,
        )
        traj = langevin_simulate(params, seed=seed + 1)
        finals = traj[-1, :, 0]
        return float(np.count_nonzero((finals >= basin_lo) & (finals <= basin_hi))) / trials

    raise ValueError(f"unknown optimizer {optimizer!r}; use 'qbo' or 'langevin'")
