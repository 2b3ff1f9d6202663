"""SAT-compilation loops: eager MDD-SAT and lazy SMT-CBS."""
from __future__ import annotations

import time

from . import cnf
from .mdd import build_mdd
from .model import (
    Bounds,
    Instance,
    SolveResult,
    Unreachable,
    default_soc_cap,
    joint_space_size,
    shortest_path_lengths,
    sum_of_costs,
    trim_plan,
    validate,
)
from .oracle import DEFAULT_STATE_CAP, is_solvable

PRECHECK_LIMIT = 10**6


def precheck_unsolvable(instance: Instance, limit: int = PRECHECK_LIMIT) -> bool:
    """True when the joint space is small enough to search and holds no solution."""
    if joint_space_size(instance) > limit:
        return False
    return is_solvable(instance, max(limit, DEFAULT_STATE_CAP)) is False


def _mdds(instance: Instance, bounds: Bounds):
    dists = [(instance.distances_from(a.start), instance.distances_from(a.goal)) for a in instance.agents]
    return [
        build_mdd(instance, i, bounds.depth(i), dist_start=ds, dist_goal=dg)
        for i, (ds, dg) in enumerate(dists)
    ]


def _prologue(instance, soc_cap, precheck):
    try:
        xi = shortest_path_lengths(instance)
    except Unreachable:
        return None, None, SolveResult("unsolvable", stats={"reason": "unreachable goal"})
    if precheck and precheck_unsolvable(instance):
        return None, None, SolveResult("unsolvable", stats={"reason": "joint space exhausted"})
    if soc_cap is None:
        soc_cap = default_soc_cap(instance)
    return xi, soc_cap, None


def _finish(instance, plan, soc, stats, t0):
    plan = trim_plan(plan)
    assert not validate(instance, plan), "decoded plan has conflicts"
    got = sum_of_costs(instance, plan)
    assert got <= soc, f"decoded plan costs {got} above bound {soc}"
    stats["wall_time"] = time.perf_counter() - t0
    return SolveResult("optimal", plan, got, stats)


def solve_eager(instance: Instance, soc_cap: int | None = None, *, precheck: bool = True,
                decide_opts: dict | None = None) -> SolveResult:
    """MDD-SAT: full encoding at SoC = LB, LB+1, ... until satisfiable."""
    t0 = time.perf_counter()
    decide_opts = decide_opts or {}
    xi, soc_cap, early = _prologue(instance, soc_cap, precheck)
    if early is not None:
        return early
    stats = {"bounds_tried": [], "sat_calls": 0, "decisions": 0, "conflicts": 0}
    for soc in range(sum(xi), soc_cap + 1):
        bounds = Bounds.for_soc(xi, soc)
        f, vm = cnf.encode_eager(instance, _mdds(instance, bounds), bounds)
        d = cnf.decide(f, **decide_opts)
        stats["bounds_tried"].append(soc)
        stats["sat_calls"] += 1
        stats["decisions"] += d.stats.get("decisions", 0)
        stats["conflicts"] += d.stats.get("conflicts", 0)
        stats["clauses"] = f.family_counts()
        stats["variables"] = {"x": len(vm.x_vars), "e": len(vm.e_vars), "aux": len(vm.aux_vars)}
        stats["eager_collision_clauses"] = stats["clauses"]["vertex-collision"] + stats["clauses"]["swap-collision"]
        if d.satisfiable:
            return _finish(instance, cnf.decode(d.assignment, vm, instance), soc, stats, t0)
    stats["wall_time"] = time.perf_counter() - t0
    return SolveResult("cap", stats=stats)


def solve_smt_cbs(instance: Instance, soc_cap: int | None = None, *, precheck: bool = True,
                  decide_opts: dict | None = None) -> SolveResult:
    """Lazy loop: base encoding, decide, validate, forbid the conflicts found.

    Conflicts carry over to higher bounds. Within one bound the formula is
    extended in place, which yields the same clause set as re-encoding.
    """
    t0 = time.perf_counter()
    decide_opts = decide_opts or {}
    xi, soc_cap, early = _prologue(instance, soc_cap, precheck)
    if early is not None:
        return early
    conflicts: list = []
    stats = {"bounds_tried": [], "sat_calls": 0, "decisions": 0, "conflicts": 0, "iterations": 0}
    for soc in range(sum(xi), soc_cap + 1):
        bounds = Bounds.for_soc(xi, soc)
        f, vm = cnf.encode_base(instance, _mdds(instance, bounds), bounds)
        cnf.add_conflict_clauses(f, vm, conflicts)
        stats["bounds_tried"].append(soc)
        while True:
            d = cnf.decide(f, **decide_opts)
            stats["sat_calls"] += 1
            stats["decisions"] += d.stats.get("decisions", 0)
            stats["conflicts"] += d.stats.get("conflicts", 0)
            if not d.satisfiable:
                break
            stats["iterations"] += 1
            plan = cnf.decode(d.assignment, vm, instance)
            found = validate(instance, plan)
            if not found:
                stats["clauses"] = f.family_counts()
                stats["conflict_clauses"] = len(f._conflict_keys)
                stats["eager_collision_clauses"] = cnf.eager_collision_count(vm)
                stats["conflict_set"] = sorted(f._conflict_keys)
                return _finish(instance, plan, soc, stats, t0)
            cnf.add_conflict_clauses(f, vm, found)
            conflicts.extend(found)
    stats["wall_time"] = time.perf_counter() - t0
    return SolveResult("cap", stats=stats)
