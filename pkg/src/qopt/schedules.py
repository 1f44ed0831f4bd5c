"""Resolution and noise schedules.

The optimizer refines its quantizer grid over time by raising the
resolution exponent h.  Two growth policies are provided:

* greedy: h goes up by one on every acceptance, and only then;
* log: h tracks floor(log_base(c1 * ln(t + 2))), a slow deterministic
  ramp that is useful when acceptances are rare or when a run needs a
  resolution ceiling tied to wall-clock progress.

Both are monotone in t by construction.  The companion noise floor
sigma_inf(t) = c_o / ln(t + 2) decays like the classical logarithmic
annealing temperature and is what the diffusion lab uses as its default
noise amplitude.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

from .quantizer import _floor_log

__all__ = [
    "ScheduleKind",
    "ScheduleSpec",
    "h_greedy",
    "h_log",
    "sigma_inf",
    "h_lower_bound",
    "next_h",
]


class ScheduleKind(enum.Enum):
    GREEDY_INCREMENT = "greedy"
    LOG_SCHEDULE = "log"
    CONSTANT = "constant"


@dataclass(frozen=True)
class ScheduleSpec:
    """Bundle of schedule choice and constants.

    ``c1`` is the gain on ln(t + 2) inside the log schedule, ``c_o`` the
    noise-floor constant, and ``c_q`` the diffusion constant handed to the
    SDE lab.  ``c0`` and ``beta`` only enter the diagnostic lower bound
    :func:`h_lower_bound`; they are never enforced by a solver.  ``base``
    must match the quantizer base of the run it drives.
    """

    kind: ScheduleKind = ScheduleKind.GREEDY_INCREMENT
    base: int = 2
    c0: float = 1.0
    c1: float = 4.0
    beta: float = 0.0
    c_o: float = 1.0
    c_q: float = 1.0 / 3.0

    def __post_init__(self) -> None:
        if not isinstance(self.base, int) or self.base < 2:
            raise ValueError(f"base must be an integer >= 2, got {self.base!r}")
        for name in ("c0", "c1", "c_o", "c_q"):
            v = getattr(self, name)
            if not (v > 0.0) or math.isinf(v):
                raise ValueError(f"{name} must be finite and > 0, got {v!r}")
        if not (self.beta >= 0.0) or math.isinf(self.beta):
            raise ValueError(f"beta must be finite and >= 0, got {self.beta!r}")


def h_greedy(prev_h: int, accepted: bool, cap: int | None = None) -> int:
    """Greedy policy: +1 on acceptance, unchanged otherwise.

    ``cap`` is the precision ceiling from :func:`qopt.quantizer.max_h_exp`;
    at the cap the exponent stays put even on acceptance.
    """
    if prev_h < 0:
        raise ValueError(f"prev_h must be >= 0, got {prev_h}")
    if not accepted:
        return prev_h
    if cap is not None and prev_h >= cap:
        return prev_h
    return prev_h + 1


def h_log(t: int, spec: ScheduleSpec) -> int:
    """Deterministic ramp floor(log_base(c1 * ln(t + 2))), clamped at 0."""
    if spec.kind is not ScheduleKind.LOG_SCHEDULE:
        raise ValueError(f"h_log needs a log-schedule spec, got kind {spec.kind!r}")
    if t < 0:
        raise ValueError(f"t must be >= 0, got {t}")
    arg = spec.c1 * math.log(t + 2.0)
    return max(0, _floor_log(spec.base, arg))


def sigma_inf(t: float, c_o: float = 1.0) -> float:
    """Noise floor c_o / ln(t + 2); decreasing, positive, finite at t = 0."""
    if not (t >= 0.0):
        raise ValueError(f"t must be >= 0, got {t!r}")
    if not (c_o > 0.0):
        raise ValueError(f"c_o must be > 0, got {c_o!r}")
    return c_o / math.log(t + 2.0)


def h_lower_bound(t: int, spec: ScheduleSpec) -> float:
    """Diagnostic lower envelope for the resolution exponent.

    log_base of c0 * base**(-2*beta/(t+2)) * sigma_inf(t).  Reported by
    audits so schedule constants can be sanity-checked offline; solvers do
    not read it.
    """
    if t < 0:
        raise ValueError(f"t must be >= 0, got {t}")
    damping = spec.base ** (-2.0 * spec.beta / (t + 2.0))
    return math.log(spec.c0 * damping * sigma_inf(t, spec.c_o), spec.base)


def next_h(spec: ScheduleSpec, t: int, prev_h: int, accepted: bool,
           cap: int | None = None) -> int:
    """Advance the resolution exponent one step under ``spec``.

    Whatever the policy says, the result never decreases below ``prev_h``
    and never exceeds ``cap`` (unless ``prev_h`` already does, in which
    case it is left alone for the caller to deal with).
    """
    if spec.kind is ScheduleKind.GREEDY_INCREMENT:
        return h_greedy(prev_h, accepted, cap)
    if spec.kind is ScheduleKind.LOG_SCHEDULE:
        h = max(prev_h, h_log(t, spec))
    elif spec.kind is ScheduleKind.CONSTANT:
        h = prev_h
    else:  # pragma: no cover - enum is closed
        raise ValueError(f"unknown schedule kind {spec.kind!r}")
    if cap is not None and h > prev_h:
        h = max(prev_h, min(h, cap))
    return h
