"""Optimizers sharing one problem interface.

Three stochastic solvers plus an exact reference:

* :func:`qbo_optimize` - blind random search with quantized acceptance.
  A candidate is accepted iff its objective, rounded to the current grid,
  does not exceed the rounded incumbent; every acceptance then refines the
  grid according to the run's schedule and re-quantizes the incumbent.
  Ties on the grid are accepted, which is what lets the walk drift across
  regions the coarse grid cannot distinguish.
* :func:`sa_optimize` - Metropolis simulated annealing with geometric or
  logarithmic cooling.
* :func:`qa_optimize` - path-integral simulated quantum annealing: P
  coupled tour replicas with a transverse-field coupling that decays as
  Gamma is annealed to zero.
* :func:`brute_force_tsp` - exact optimum by enumeration, small n only.

Problems plug in through duck typing.  Every problem provides
``initial() -> state``, ``evaluate(state) -> float`` (nonnegative), and
``propose(state, rng) -> state``.  Problems that can score a move in O(1)
additionally provide ``sample_move``, ``move_delta``, ``apply_move`` and
``clone_state``; the solvers use that fast path when present, and
:func:`qa_optimize` requires it (plus ``coupling_delta`` for P > 1).

All solvers draw from ``random.Random(seed)`` only, so equal seeds give
identical runs on any platform.
"""

from __future__ import annotations

import itertools
import math
import random
import time
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, NamedTuple

import numpy as np

from .quantizer import EXACT_FLOOR_CAP, _pow_int, init_eta, max_h_exp
from .schedules import ScheduleKind, ScheduleSpec, next_h
from .tsp import Tour, TspInstance, nn_tour, tour_cost

__all__ = [
    "TraceRecord",
    "RunTrace",
    "SaCooling",
    "SolverConfig",
    "TspProblem",
    "UniformSearchProblem",
    "qbo_optimize",
    "sa_optimize",
    "qa_optimize",
    "brute_force_tsp",
]

# Cap on recorded rows per run (acceptance rows are always kept on top of
# this).  Traces stay small without losing any accepted step.
_MAX_SAMPLED_ROWS = 10_000


class TraceRecord(NamedTuple):
    """One recorded step.  ``h_exp`` is 0 for the annealing baselines."""

    iter: int
    best_cost: float
    current_cost: float
    h_exp: int
    accepted: bool


@dataclass
class RunTrace:
    """Everything a finished run leaves behind.

    ``records`` always contains iteration 0 (the starting state), every
    accepted iteration, a subsample of the rest, and the final iteration.
    ``best_cost`` is non-increasing and ``h_exp`` non-decreasing across
    records.  ``final_cost`` is re-evaluated from ``final_state`` at the
    end, so it is free of any accumulated drift from incremental deltas.
    ``meta`` carries run-level counters and the quantizer identity needed
    to replay acceptance decisions from the trace alone.
    """

    algorithm: str
    seed: int
    records: list[TraceRecord]
    final_state: Any
    final_cost: float
    wall_time_s: float
    meta: dict = field(default_factory=dict)

    @property
    def best_cost(self) -> float:
        return self.records[-1].best_cost

    @property
    def iterations(self) -> int:
        return self.records[-1].iter


class SaCooling(Enum):
    GEOMETRIC = "geometric"
    LOGARITHMIC = "log"


@dataclass(frozen=True)
class SolverConfig:
    """Shared knob bundle for all three stochastic solvers.

    Only the fields prefixed with a solver's name matter to that solver;
    the rest are ignored.  ``patience`` of 0 disables early stopping, and
    ``target_cost`` (when set) stops a run as soon as the best cost
    reaches it, which only ever shortens a run and never changes which
    states it visits first.
    """

    max_iters: int = 200_000
    patience: int = 0
    target_cost: float | None = None
    record_every: int | None = None
    schedule: ScheduleSpec = field(default_factory=ScheduleSpec)
    strict_improvement_only: bool = False
    sa_t0: float = 100.0
    sa_alpha: float = 0.9999
    sa_cooling: SaCooling = SaCooling.GEOMETRIC
    qa_slices: int = 6
    qa_gamma0: float = 3.0
    qa_t: float = 1.0

    def __post_init__(self) -> None:
        if self.max_iters < 1:
            raise ValueError(f"max_iters must be >= 1, got {self.max_iters}")
        if self.patience < 0:
            raise ValueError(f"patience must be >= 0, got {self.patience}")
        if self.record_every is not None and self.record_every < 1:
            raise ValueError(f"record_every must be >= 1, got {self.record_every}")
        if not (self.sa_t0 > 0.0):
            raise ValueError(f"sa_t0 must be > 0, got {self.sa_t0!r}")
        if not (0.0 < self.sa_alpha <= 1.0):
            raise ValueError(f"sa_alpha must be in (0, 1], got {self.sa_alpha!r}")
        if self.qa_slices < 1:
            raise ValueError(f"qa_slices must be >= 1, got {self.qa_slices}")
        if not (self.qa_gamma0 > 0.0):
            raise ValueError(f"qa_gamma0 must be > 0, got {self.qa_gamma0!r}")
        if not (self.qa_t > 0.0):
            raise ValueError(f"qa_t must be > 0, got {self.qa_t!r}")

    @property
    def sample_stride(self) -> int:
        if self.record_every is not None:
            return self.record_every
        return max(1, -(-self.max_iters // _MAX_SAMPLED_ROWS))


class _Recorder:
    """Collects trace rows: iteration 0, acceptances, stride samples, final."""

    def __init__(self, stride: int):
        self.stride = stride
        self.records: list[TraceRecord] = []

    def add(self, t: int, best: float, current: float, h: int, accepted: bool) -> None:
        if accepted or t % self.stride == 0 or t == 0:
            self.records.append(TraceRecord(t, best, current, h, accepted))

    def close(self, t: int, best: float, current: float, h: int) -> None:
        if self.records[-1].iter != t:
            self.records.append(TraceRecord(t, best, current, h, False))


class TspProblem:
    """TSP with 2-opt moves, packaged for the solvers.

    State is an int64 numpy array of city indices.  A precomputed distance
    matrix makes ``move_delta`` four lookups, so the solvers never pay for
    a full tour evaluation inside the hot loop.
    """

    def __init__(self, instance: TspInstance, start: Tour | None = None):
        self.instance = instance
        self._dist = instance.distance_matrix()
        if start is None:
            start = nn_tour(instance, 0)
        if start.n != instance.n:
            raise ValueError("start tour does not match instance size")
        self._start = np.array(start.order, dtype=np.int64)
        self._n = instance.n

    def initial(self) -> np.ndarray:
        return self._start.copy()

    def evaluate(self, order: np.ndarray) -> float:
        d = self._dist
        return float(d[order, np.roll(order, -1)].sum())

    def propose(self, order: np.ndarray, rng: random.Random) -> np.ndarray:
        cand = order.copy()
        self.apply_move(cand, self.sample_move(rng))
        return cand

    def sample_move(self, rng: random.Random) -> tuple[int, int]:
        n = self._n
        r = rng.random
        while True:
            i = int(r() * n)
            j = int(r() * n)
            if i == j:
                continue
            if i > j:
                i, j = j, i
            if i == 0 and j == n - 1:
                continue
            return i, j

    def move_delta(self, order: np.ndarray, move: tuple[int, int]) -> float:
        i, j = move
        d = self._dist
        # j + 1 - n is the successor position as a negative index; it wraps
        # to 0 exactly when j is the last position.
        a = order[i - 1]
        b = order[i]
        c = order[j]
        e = order[j + 1 - self._n]
        return float(d[a, c] + d[b, e] - d[a, b] - d[c, e])

    def apply_move(self, order: np.ndarray, move: tuple[int, int]) -> None:
        i, j = move
        order[i:j + 1] = order[i:j + 1][::-1].copy()

    def clone_state(self, order: np.ndarray) -> np.ndarray:
        return order.copy()

    def coupling_delta(self, order: np.ndarray, move: tuple[int, int],
                       other: np.ndarray) -> int:
        """Change in positionwise disagreement with ``other`` if the move runs."""
        i, j = move
        seg = order[i:j + 1]
        oseg = other[i:j + 1]
        return int(np.count_nonzero(seg[::-1] != oseg)) - int(np.count_nonzero(seg != oseg))

    def as_tour(self, order: np.ndarray) -> Tour:
        return Tour(tuple(int(c) for c in order))


class UniformSearchProblem:
    """Blind uniform sampling of a scalar function on an interval.

    The textbook setting for the quantized-acceptance solver: every
    proposal is a fresh uniform draw, so all search structure comes from
    the acceptance rule alone.  States are plain floats.
    """

    def __init__(self, f, lo: float, hi: float, x0: float | None = None):
        if not lo < hi:
            raise ValueError(f"need lo < hi, got [{lo}, {hi}]")
        self.f = f
        self.lo = float(lo)
        self.hi = float(hi)
        self.x0 = float(x0) if x0 is not None else 0.5 * (self.lo + self.hi)

    def initial(self) -> float:
        return self.x0

    def evaluate(self, x: float) -> float:
        return float(self.f(x))

    def propose(self, x: float, rng: random.Random) -> float:
        return self.lo + (self.hi - self.lo) * rng.random()


def _is_incremental(problem) -> bool:
    return all(
        hasattr(problem, name)
        for name in ("sample_move", "move_delta", "apply_move", "clone_state")
    )


def qbo_optimize(problem, config: SolverConfig, seed: int) -> RunTrace:
    """Blind random search with quantized acceptance and grid refinement.

    Every iteration draws one candidate.  The candidate's cost and the
    incumbent's are rounded to the current grid and compared as integers;
    the candidate wins on less-or-equal.  On acceptance the resolution
    exponent advances per ``config.schedule`` (capped so the arithmetic
    stays exact) and the new incumbent is re-quantized on the new grid.
    The objective must be nonnegative everywhere it is evaluated.
    """
    t_start = time.perf_counter()
    spec = config.schedule
    base = spec.base
    rng = random.Random(seed)

    x = problem.initial()
    f_inc = float(problem.evaluate(x))
    if not (f_inc >= 0.0):
        raise ValueError(f"objective must be nonnegative, got {f_inc!r} at the start")
    eta = init_eta(f_inc, base)
    h = 0
    qp = _pow_int(base, eta + h)
    lvl_inc = int(f_inc * qp + 0.5)

    incremental = _is_incremental(problem)
    best = f_inc
    best_state = problem.clone_state(x) if incremental else x

    rec = _Recorder(config.sample_stride)
    rec.add(0, best, f_inc, h, False)

    uphill_ties = 0
    overflow_rejects = 0
    clamped = False
    since_best = 0
    stop_reason = "max_iters"
    t = 0

    for t in range(1, config.max_iters + 1):
        if incremental:
            move = problem.sample_move(rng)
            f_cand = f_inc + problem.move_delta(x, move)
        else:
            cand = problem.propose(x, rng)
            f_cand = float(problem.evaluate(cand))
        if f_cand < 0.0:
            # Accumulated deltas may graze zero from above; anything beyond
            # rounding noise means the objective itself is negative.
            if f_cand < -1e-9:
                raise ValueError(f"objective went negative ({f_cand!r}) at iter {t}")
            f_cand = 0.0

        scaled = f_cand * qp + 0.5
        if scaled < EXACT_FLOOR_CAP:
            lvl_cand = int(scaled)
            accepted = lvl_cand <= lvl_inc
        else:
            # The incumbent's level fits, so a candidate too big to even
            # quantize is certainly no better: reject, count it.
            accepted = False
            overflow_rejects += 1

        if accepted:
            went_uphill = f_cand > f_inc
            if went_uphill:
                uphill_ties += 1
            if incremental:
                problem.apply_move(x, move)
            else:
                x = cand
            f_inc = f_cand
            refine = not config.strict_improvement_only or lvl_cand < lvl_inc
            if refine:
                cap = max_h_exp(base, eta, f_inc)
                h_new = next_h(spec, t, h, True, cap)
                if h_new < next_h(spec, t, h, True, None):
                    clamped = True
                if h_new != h:
                    h = h_new
                    qp = _pow_int(base, eta + h)
            lvl_inc = int(f_inc * qp + 0.5)
            if f_inc < best:
                best = f_inc
                best_state = problem.clone_state(x) if incremental else x
                since_best = 0
            else:
                since_best += 1
        else:
            since_best += 1

        rec.add(t, best, f_inc, h, accepted)
        if config.target_cost is not None and best <= config.target_cost:
            stop_reason = "target"
            break
        if config.patience and since_best >= config.patience:
            stop_reason = "patience"
            break

    rec.close(t, best, f_inc, h)
    final_cost = float(problem.evaluate(best_state))
    return RunTrace(
        algorithm="qbo",
        seed=seed,
        records=rec.records,
        final_state=best_state,
        final_cost=final_cost,
        wall_time_s=time.perf_counter() - t_start,
        meta={
            "base": base,
            "eta_pow": eta,
            "h_final": h,
            "h_clamped": clamped,
            "uphill_tie_accepts": uphill_ties,
            "overflow_rejects": overflow_rejects,
            "iters_run": t,
            "stop_reason": stop_reason,
        },
    )


def sa_optimize(problem, config: SolverConfig, seed: int) -> RunTrace:
    """Metropolis simulated annealing.

    Geometric cooling multiplies the temperature by ``sa_alpha`` each
    iteration; logarithmic cooling uses T0 / ln(k + 2).  Downhill and flat
    moves always pass; uphill moves pass with probability exp(-delta / T).
    """
    t_start = time.perf_counter()
    rng = random.Random(seed)
    rand = rng.random

    x = problem.initial()
    f_cur = float(problem.evaluate(x))
    incremental = _is_incremental(problem)
    best = f_cur
    best_state = problem.clone_state(x) if incremental else x

    rec = _Recorder(config.sample_stride)
    rec.add(0, best, f_cur, 0, False)

    geometric = config.sa_cooling is SaCooling.GEOMETRIC
    temp = config.sa_t0
    alpha = config.sa_alpha
    since_best = 0
    stop_reason = "max_iters"
    t = 0

    for t in range(1, config.max_iters + 1):
        if not geometric:
            temp = config.sa_t0 / math.log(t + 1.0)
        if incremental:
            move = problem.sample_move(rng)
            delta = problem.move_delta(x, move)
        else:
            cand = problem.propose(x, rng)
            f_cand = float(problem.evaluate(cand))
            delta = f_cand - f_cur

        if delta <= 0.0:
            accepted = True
        elif temp <= 0.0:
            accepted = False
        else:
            accepted = rand() < math.exp(-delta / temp)

        if accepted:
            if incremental:
                problem.apply_move(x, move)
                f_cur += delta
            else:
                x = cand
                f_cur = f_cand
            if f_cur < best:
                best = f_cur
                best_state = problem.clone_state(x) if incremental else x
                since_best = 0
            else:
                since_best += 1
        else:
            since_best += 1

        rec.add(t, best, f_cur, 0, accepted)
        if geometric:
            temp *= alpha
        if config.target_cost is not None and best <= config.target_cost:
            stop_reason = "target"
            break
        if config.patience and since_best >= config.patience:
            stop_reason = "patience"
            break

    rec.close(t, best, f_cur, 0)
    final_cost = float(problem.evaluate(best_state))
    return RunTrace(
        algorithm="sa",
        seed=seed,
        records=rec.records,
        final_state=best_state,
        final_cost=final_cost,
        wall_time_s=time.perf_counter() - t_start,
        meta={"iters_run": t, "stop_reason": stop_reason,
              "t_final": temp, "cooling": config.sa_cooling.value},
    )


def _transverse_coupling(gamma: float, pt: float) -> float:
    """Replica coupling J(Gamma) = -(PT / 2) ln tanh(Gamma / PT), >= 0.

    Weak when the transverse field Gamma is strong, divergent as Gamma
    goes to zero (replicas lock together).  tanh saturates to 1.0 in
    float64 for large arguments, where the coupling is exactly zero.
    """
    th = math.tanh(gamma / pt)
    if th >= 1.0:
        return 0.0
    return -0.5 * pt * math.log(th)


def qa_optimize(problem, config: SolverConfig, seed: int) -> RunTrace:
    """Path-integral simulated quantum annealing.

    Runs ``qa_slices`` replicas of the problem at fixed temperature
    ``qa_t``.  Each sweep visits every replica once with a single 2-opt
    style move, scored by its cost delta plus the transverse coupling
    times the change in disagreement with the two neighboring replicas
    (periodic).  The field anneals linearly from ``qa_gamma0`` to almost
    zero across ``max_iters`` sweeps.  With one slice there is no
    coupling and the dynamics reduce to constant-temperature annealing.

    The problem must provide the incremental move interface, and
    ``coupling_delta`` as well when ``qa_slices > 1``.
    """
    if not _is_incremental(problem):
        raise TypeError("qa_optimize needs the incremental move interface "
                        "(sample_move/move_delta/apply_move/clone_state)")
    slices = config.qa_slices
    if slices > 1 and not hasattr(problem, "coupling_delta"):
        raise TypeError("qa_optimize with more than one slice needs coupling_delta")

    t_start = time.perf_counter()
    rng = random.Random(seed)
    rand = rng.random

    x0 = problem.initial()
    f0 = float(problem.evaluate(x0))
    replicas = [problem.clone_state(x0) for _ in range(slices)]
    costs = [f0] * slices
    best = f0
    best_state = problem.clone_state(x0)

    pt = slices * config.qa_t
    gamma0 = config.qa_gamma0
    gamma_end = 1e-8
    sweeps = config.max_iters

    rec = _Recorder(config.sample_stride)
    rec.add(0, best, f0, 0, False)

    since_best = 0
    stop_reason = "max_iters"
    t = 0

    for t in range(1, sweeps + 1):
        frac = (t - 1) / (sweeps - 1) if sweeps > 1 else 1.0
        gamma = gamma0 + (gamma_end - gamma0) * frac
        coupling = _transverse_coupling(gamma, pt) if slices > 1 else 0.0
        any_accept = False
        improved = False

        for r in range(slices):
            order = replicas[r]
            move = problem.sample_move(rng)
            d_cost = problem.move_delta(order, move)
            d_total = d_cost
            if coupling != 0.0:
                d_dis = problem.coupling_delta(order, move, replicas[r - 1])
                if slices > 2:
                    d_dis += problem.coupling_delta(order, move, replicas[(r + 1) % slices])
                d_total += coupling * d_dis

            if d_total <= 0.0 or rand() < math.exp(-d_total / pt):
                problem.apply_move(order, move)
                costs[r] += d_cost
                any_accept = True
                if costs[r] < best:
                    best = costs[r]
                    best_state = problem.clone_state(order)
                    improved = True

        if improved:
            since_best = 0
        else:
            since_best += 1
        rec.add(t, best, min(costs), 0, any_accept)
        if config.target_cost is not None and best <= config.target_cost:
            stop_reason = "target"
            break
        if config.patience and since_best >= config.patience:
            stop_reason = "patience"
            break

    rec.close(t, best, min(costs), 0)
    final_cost = float(problem.evaluate(best_state))
    return RunTrace(
        algorithm="qa",
        seed=seed,
        records=rec.records,
        final_state=best_state,
        final_cost=final_cost,
        wall_time_s=time.perf_counter() - t_start,
        meta={"iters_run": t, "stop_reason": stop_reason,
              "slices": slices, "gamma0": gamma0, "qa_t": config.qa_t},
    )


def brute_force_tsp(instance: TspInstance) -> tuple[Tour, float]:
    """Exact optimum by enumeration.  Refuses instances above 10 cities.

    City 0 is pinned first and each direction pair is enumerated once, so
    the loop visits (n-1)!/2 candidate tours.
    """
    n = instance.n
    if n > 10:
        raise ValueError(f"brute force is limited to 10 cities, got {n}")
    d = instance.distance_matrix().tolist()
    best_cost = math.inf
    best_perm: tuple[int, ...] | None = None
    for perm in itertools.permutations(range(1, n)):
        if perm[0] > perm[-1]:
            continue  # each cycle and its reversal counted once
        cost = d[0][perm[0]] + d[perm[-1]][0]
        prev = perm[0]
        for city in perm[1:]:
            cost += d[prev][city]
            prev = city
        if cost < best_cost:
            best_cost = cost
            best_perm = perm
    tour = Tour((0,) + best_perm)
    return tour, tour_cost(instance, tour)
