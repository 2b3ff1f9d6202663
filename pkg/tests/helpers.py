"""Root column generation driven through the public B&P operations.

Every cut and every priced column is checked against values recomputed here
from the master's duals, so the loop doubles as a semantics probe.
"""
from mapfc.bnp import (
    RC_TOL,
    add_collision_cut,
    detect_collisions,
    init_path_pool,
    price_columns,
    solve_master,
    usage,
)
from mapfc.model import shortest_path_lengths


def reduced_cost(col, master, horizon, phase1=False):
    pen = sum(-y for key, y in master.cut_duals.items() if y < 0 and key in col.keys(horizon))
    step = 0.0 if phase1 else 1.0
    return step * col.cost + pen - master.mu[col.agent]


class Probe:
    def __init__(self):
        self.cut_checks = []  # (location, usage after re-solve)
        self.priced = []  # independent reduced cost of every added column

    @property
    def worst_usage(self):
        return max((u for _, u in self.cut_checks), default=0.0)

    @property
    def worst_rc(self):
        return max(self.priced, default=float("-inf"))


def root_column_generation(inst, horizon, probe=None, max_rounds=500):
    """Solve the root master at ``horizon``; returns the final master or None if infeasible."""
    probe = probe or Probe()
    if horizon < max(shortest_path_lengths(inst), default=0):
        return None
    pool = init_path_pool(inst, horizon)
    cuts = []
    for _ in range(max_rounds):
        m = solve_master(pool, cuts, frozenset(), horizon)
        phase1 = m.status != "optimal"
        if phase1:
            m = solve_master(pool, cuts, frozenset(), horizon, phase1=True)
        else:
            fresh = [loc for loc in detect_collisions(m, horizon) if add_collision_cut(cuts, loc)]
            if fresh:
                again = solve_master(pool, cuts, frozenset(), horizon)
                if again.status == "optimal":
                    use = usage(again, horizon)
                    probe.cut_checks += [(loc, use.get(loc, 0.0)) for loc in fresh]
                continue
        before = len(pool.all)
        price_columns(inst, pool, m, frozenset(), horizon, phase1=phase1)
        added = pool.all[before:]
        probe.priced += [reduced_cost(c, m, horizon, phase1) for c in added]
        if not added:
            return None if phase1 else m
    raise RuntimeError("column generation did not settle")


__all__ = ["Probe", "RC_TOL", "reduced_cost", "root_column_generation"]
