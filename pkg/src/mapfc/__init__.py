"""Optimal sum-of-costs multi-agent path finding.

Backends: an eager SAT encoding over MDDs, a lazy SMT-CBS style variant, a
branch-and-price MIP on top of a small simplex, and an exact joint-space A*.
"""
from .model import (
    Agent,
    Bounds,
    Conflict,
    Instance,
    InvalidInstance,
    MalformedPlan,
    MapfError,
    SolveResult,
    Unreachable,
    makespan,
    sum_of_costs,
    validate,
)

__version__ = "0.1.0"
from .bench import BACKENDS


def solve(instance: Instance, backend: str = "eager-sat", soc_cap: int | None = None, **kw) -> SolveResult:
    """Dispatch to one backend. ``soc_cap`` is a horizon cap for ``mip-bnp``."""
    if backend == "eager-sat":
        from .sat_backends import solve_eager
        return solve_eager(instance, soc_cap, **kw)
    if backend == "smt-cbs":
        from .sat_backends import solve_smt_cbs
        return solve_smt_cbs(instance, soc_cap, **kw)
    if backend == "mip-bnp":
        from .bnp import solve_mip
        return solve_mip(instance, soc_cap, **kw)
    if backend == "oracle":
        from .oracle import solve_joint
        r = solve_joint(instance, **kw)
        return SolveResult(r.status, r.plan, r.soc, r.stats)
    raise ValueError(f"unknown backend {backend!r}")
