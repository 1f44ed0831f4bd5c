"""Trace auditing: replay recorded runs and re-check their invariants.

Because every acceptance lands in the trace (only rejected iterations are
downsampled), the incumbent cost and resolution exponent can change only
between consecutive recorded rows that are acceptances.  That makes a
full offline replay possible: for each accepted row, rebuild the grid
that was in force when the decision was made and redo the integer
comparison from the recorded costs alone.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

from ..quantizer import EXACT_FLOOR_CAP, _pow_int, init_eta
from .runner import read_trace_csv, verify_summary

__all__ = ["TraceAudit", "DirectoryAudit", "audit_trace_file", "audit_directory"]


@dataclass
class TraceAudit:
    path: str
    run_id: str
    algorithm: str
    seed: int
    n_cities: int
    n_rows: int = 0
    n_acceptances: int = 0
    uphill_tie_accepts: int = 0
    h_final: int = 0
    violations: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations


@dataclass
class DirectoryAudit:
    audits: list[TraceAudit]
    summary_problems: list[str]

    @property
    def uphill_tie_accepts(self) -> int:
        return sum(a.uphill_tie_accepts for a in self.audits)

    @property
    def ok(self) -> bool:
        return not self.summary_problems and all(a.ok for a in self.audits)


def audit_trace_file(path, base: int = 2) -> TraceAudit:
    """Check one trace CSV.

    All algorithms get the generic checks: iterations strictly increase
    from 0, best cost never rises, and rows without an acceptance carry
    the previous incumbent unchanged.  Quantized-acceptance traces
    additionally get the grid replay: a non-decreasing exponent and, for
    every acceptance, ``level(candidate) <= level(incumbent)`` on the
    grid in force before the move.
    """
    info, records = read_trace_csv(path)
    audit = TraceAudit(
        path=str(path),
        run_id=info["run_id"],
        algorithm=info["algorithm"],
        seed=info["seed"],
        n_cities=info["n_cities"],
        n_rows=len(records),
    )
    bad = audit.violations

    first = records[0]
    if first.iter != 0:
        bad.append(f"first row is iter {first.iter}, expected 0")
    if first.best_cost != first.current_cost:
        bad.append("iter 0 best and current disagree")

    quantized = audit.algorithm == "qbo"
    eta = init_eta(first.current_cost, base) if quantized else 0

    prev = first
    for rec in records[1:]:
        if rec.iter <= prev.iter:
            bad.append(f"iter {rec.iter}: not increasing after {prev.iter}")
        if rec.best_cost > prev.best_cost:
            bad.append(f"iter {rec.iter}: best rose "
                       f"{prev.best_cost!r} -> {rec.best_cost!r}")
        if rec.accepted:
            audit.n_acceptances += 1
            if rec.current_cost > prev.current_cost:
                audit.uphill_tie_accepts += 1
            want_best = min(prev.best_cost, rec.current_cost)
            if rec.best_cost != want_best:
                bad.append(f"iter {rec.iter}: best {rec.best_cost!r}, "
                           f"expected {want_best!r}")
        else:
            if rec.current_cost != prev.current_cost:
                bad.append(f"iter {rec.iter}: incumbent changed without "
                           "an acceptance")
            if rec.best_cost != prev.best_cost:
                bad.append(f"iter {rec.iter}: best changed without "
                           "an acceptance")
        if quantized:
            if rec.h_exp < prev.h_exp:
                bad.append(f"iter {rec.iter}: h_exp decreased "
                           f"{prev.h_exp} -> {rec.h_exp}")
            if rec.accepted:
                # Replay the decision on the pre-move grid, i.e. the
                # exponent of the previous recorded row.
                qp = _pow_int(base, eta + prev.h_exp)
                s_inc = prev.current_cost * qp + 0.5
                s_cand = rec.current_cost * qp + 0.5
                if s_inc >= EXACT_FLOOR_CAP or s_cand >= EXACT_FLOOR_CAP:
                    bad.append(f"iter {rec.iter}: recorded costs overflow "
                               "the exact range at the recorded exponent")
                elif int(s_cand) > int(s_inc):
                    bad.append(f"iter {rec.iter}: acceptance fails replay, "
                               f"level {int(s_cand)} > {int(s_inc)} "
                               f"at h={prev.h_exp}")
            elif rec.h_exp != prev.h_exp:
                bad.append(f"iter {rec.iter}: h_exp changed without "
                           "an acceptance")
        prev = rec
    audit.h_final = prev.h_exp
    return audit


def audit_directory(output_dir, base: int = 2) -> DirectoryAudit:
    """Audit every trace under ``output_dir/traces`` plus the summary.

    The summary check recomputes summary.csv from the trace files and
    flags any row that disagrees.
    """
    out = Path(output_dir)
    trace_dir = out / "traces"
    audits = [audit_trace_file(p, base) for p in sorted(trace_dir.glob("*.csv"))]
    problems = verify_summary(out)
    if not audits:
        problems = problems + [f"{trace_dir}: no trace files"]
    return DirectoryAudit(audits=audits, summary_problems=problems)
