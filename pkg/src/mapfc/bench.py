"""Solver-comparison harness: one CSV row per (instance, backend)."""
from __future__ import annotations

import csv
import io
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from statistics import mean
from typing import Iterable, Sequence

from .model import Instance

BACKENDS = ("eager-sat", "smt-cbs", "mip-bnp", "oracle")

COLUMNS = (
    "instance", "backend", "status", "soc", "wall_time",
    "sat_calls", "bounds_tried", "clauses", "conflict_clauses", "eager_collision_clauses",
    "bnb_nodes", "cuts", "columns", "lp_iterations", "agree",
)


@dataclass
class BenchReport:
    rows: list[dict]
    mismatches: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.mismatches

    def laziness_ratios(self) -> list[float]:
        """SMT-CBS conflict clauses over eager collision clauses, per solved instance."""
        out = []
        for r in self.rows:
            if r["backend"] == "smt-cbs" and r["status"] == "optimal" and r["eager_collision_clauses"]:
                out.append(r["conflict_clauses"] / r["eager_collision_clauses"])
        return out

    def mean_laziness(self) -> float | None:
        ratios = self.laziness_ratios()
        return mean(ratios) if ratios else None

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.DictWriter(buf, fieldnames=COLUMNS, lineterminator="\n")
        w.writeheader()
        for r in self.rows:
            w.writerow({c: _cell(r[c]) for c in COLUMNS})
        return buf.getvalue()


def _cell(v):
    if v is None:
        return ""
    if isinstance(v, float):
        return f"{v:.4f}"
    if isinstance(v, bool):
        return "yes" if v else "no"
    return v


def _run_cell(name: str, instance: Instance, backend: str, cap):
    from . import solve

    t0 = time.perf_counter()
    try:
        r = solve(instance, backend, cap) if backend != "oracle" else solve(instance, backend)
        status, soc, stats = r.status, r.soc, r.stats
    except Exception as exc:  # a crashing backend is a row, not a harness failure
        status, soc, stats = f"error: {type(exc).__name__}", None, {}
    wall = time.perf_counter() - t0
    clauses = stats.get("clauses")
    return {
        "instance": name,
        "backend": backend,
        "status": status,
        "soc": soc,
        "wall_time": wall,
        "sat_calls": stats.get("sat_calls"),
        "bounds_tried": len(stats["bounds_tried"]) if "bounds_tried" in stats else None,
        "clauses": sum(clauses.values()) if clauses else None,
        "conflict_clauses": stats.get("conflict_clauses"),
        "eager_collision_clauses": stats.get("eager_collision_clauses"),
        "bnb_nodes": stats.get("bnb_nodes"),
        "cuts": stats.get("cuts"),
        "columns": stats.get("columns"),
        "lp_iterations": stats.get("lp_iterations"),
        "agree": None,
    }


def _verdict(rows: Sequence[dict]) -> bool:
    """True when the decided rows agree on SoC or on unsolvability."""
    decided = {(r["status"], r["soc"]) for r in rows if r["status"] in ("optimal", "unsolvable")}
    return len(decided) <= 1


def run_benchmark(instances: Iterable[tuple[str, Instance]] | Iterable[Instance],
                  backends: Sequence[str] = BACKENDS, caps=None, *, jobs: int = 1) -> BenchReport:
    """Run every backend on every instance.

    ``caps`` is one SoC/horizon cap for all backends, a dict per backend, or
    None for the defaults. Cells run in ``jobs`` worker processes; rows keep
    the input order.
    """
    for b in backends:
        if b not in BACKENDS:
            raise ValueError(f"unknown backend {b!r}")
    named = []
    for i, item in enumerate(instances):
        named.append(item if isinstance(item, tuple) else (f"inst{i:03d}", item))
    if not isinstance(caps, dict):
        caps = {b: caps for b in backends}
    cells = [(name, inst, b, caps.get(b)) for name, inst in named for b in backends]
    if jobs > 1:
        with ProcessPoolExecutor(jobs) as pool:
            rows = list(pool.map(_run_cell, *zip(*cells))) if cells else []
    else:
        rows = [_run_cell(*c) for c in cells]
    report = BenchReport(rows)
    nb = len(backends)
    for i, (name, _) in enumerate(named):
        group = rows[i * nb:(i + 1) * nb]
        agree = _verdict(group)
        for r in group:
            r["agree"] = agree
        if not agree:
            report.mismatches.append(name)
    return report
