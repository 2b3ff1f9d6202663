"""Lazy MIP compilation: column generation over path pools with branch-and-bound.

The restricted master is

    min  sum cost(p) * lam[i,p]
    s.t. sum_p lam[i,p] >= 1                 for every agent i
         sum_{i,p uses loc} lam[i,p] <= 1    for every active collision cut
         lam >= 0

Locations are time-indexed: ``("v", v, t)`` for a vertex at step t and
``("e", u, v, t)`` (u < v) for traversing an edge between t and t + 1.
"""
from __future__ import annotations

import os
import time
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Sequence

import numpy as np

from .model import (
    Instance,
    MapfError,
    SolveResult,
    Unreachable,
    arrival_time,
    default_soc_cap,
    pad_plan,
    shortest_path_lengths,
    trim_plan,
    validate,
)
from .sat_backends import precheck_unsolvable
from .simplex import LinearProgram, LpSolution, solve_lp

from . import _pricing_py

try:
    if os.environ.get("MAPFC_PURE"):
        raise ImportError("pure mode requested")
    from . import _pricing as _pricing_native
except ImportError:  # pragma: no cover - depends on the build
    _pricing_native = None

PRICING_KERNEL = "cython" if _pricing_native is not None else "python"


def pricing_kernel(name: str | None = None):
    name = name or PRICING_KERNEL
    if name == "python":
        return _pricing_py
    if name == "cython" and _pricing_native is not None:
        return _pricing_native
    raise ImportError(f"pricing kernel {name!r} is not available")


INT_TOL = 1e-6
PAIRWISE = True
ARRIVAL_BRANCHING = True
RC_TOL = 1e-7
POOL_BATCH = 40  # pool columns brought into a node's master per pricing round


class HorizonExhausted(MapfError):
    pass


class NoFractionality(MapfError):
    pass


class Infeasible(MapfError):
    pass


def vertex_key(v: int, t: int):
    return ("v", v, t)


def edge_key(u: int, v: int, t: int):
    return ("e", min(u, v), max(u, v), t)


@dataclass(eq=False)
class Column:
    agent: int
    path: tuple[int, ...]  # trimmed at final arrival
    cost: int = field(init=False)
    value: float = 0.0
    uid: int = -1  # position in the pool, set by PathPool.add
    _keys: dict = field(default_factory=dict, repr=False)
    _rows: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        self.path = tuple(self.path[: arrival_time(self.path) + 1])
        self.cost = len(self.path) - 1

    def padded(self, horizon: int) -> tuple[int, ...]:
        return pad_plan([self.path], horizon)[0]

    def keys(self, horizon: int) -> frozenset:
        ks = self._keys.get(horizon)
        if ks is None:
            p = self.padded(horizon)
            out = {vertex_key(v, t) for t, v in enumerate(p)}
            out.update(edge_key(p[t], p[t + 1], t) for t in range(horizon) if p[t] != p[t + 1])
            ks = self._keys[horizon] = frozenset(out)
        return ks

    def cut_rows(self, cuts: list, horizon: int) -> list[int]:
        """Indices of the cuts this column touches; ``cuts`` may only grow."""
        tag, seen, rows = self._rows.get(horizon, (None, 0, []))
        if tag != id(cuts):
            seen, rows = 0, []
        if seen < len(cuts):
            keys = self.keys(horizon)
            rows = rows + [r for r in range(seen, len(cuts)) if cuts[r] in keys]
            self._rows[horizon] = (id(cuts), len(cuts), rows)
        return rows


class PathPool:
    def __init__(self, k: int):
        self.columns: list[list[Column]] = [[] for _ in range(k)]
        self.all: list[Column] = []
        self._seen: list[set] = [set() for _ in range(k)]
        self._index: dict = {}  # horizon -> location -> column uids
        self._arrays: dict = {}
        self._agent: list[int] = []
        self._cost: list[int] = []

    def add(self, col: Column) -> bool:
        if col.path in self._seen[col.agent]:
            return False
        self._seen[col.agent].add(col.path)
        col.uid = len(self.all)
        self.all.append(col)
        self._agent.append(col.agent)
        self._cost.append(col.cost)
        self.columns[col.agent].append(col)
        for horizon, index in self._index.items():
            if len(col.path) - 1 > horizon:
                continue
            for key in col.keys(horizon):
                index.setdefault(key, []).append(col.uid)
        return True

    def containing(self, key, horizon: int):
        index = self._index.get(horizon)
        if index is None:
            index = self._index[horizon] = {}
            for col in self.all:
                if len(col.path) - 1 > horizon:
                    continue
                for k in col.keys(horizon):
                    index.setdefault(k, []).append(col.uid)
        return index.get(key, ())

    def reduced_costs(self, uids: np.ndarray, master: "MasterSolution", horizon: int,
                      phase1: bool = False) -> np.ndarray:
        """Reduced costs of the given pool columns under the master's duals."""
        pen = np.zeros(len(self.all))
        for key, y in master.cut_duals.items():
            if y < 0:
                pen[self.containing_array(key, horizon)] -= y
        agent = np.array(self._agent, dtype=np.intp)[uids]
        step = np.array(master.step_costs(len(self.columns), phase1))[agent]
        cost = np.array(self._cost, dtype=float)[uids]
        return step * cost + pen[uids] - np.asarray(master.mu)[agent]

    def containing_array(self, key, horizon: int) -> np.ndarray:
        uids = self.containing(key, horizon)
        cached = self._arrays.get((key, horizon))
        if cached is None or len(cached) != len(uids):
            cached = self._arrays[(key, horizon)] = np.array(uids, dtype=np.intp)
        return cached

    def __iter__(self):
        return iter(self.all)

    def __len__(self):
        return sum(len(c) for c in self.columns)


@dataclass(frozen=True)
class Branch:
    agent: int
    location: tuple  # a vertex key
    require: bool


@dataclass(frozen=True)
class TargetBranch:
    """Split on when an agent settles on its goal.

    ``early``: the agent arrives by ``time`` and no other agent stands on its
    goal from ``time`` on. Otherwise it arrives after ``time``.
    """

    agent: int
    goal: int
    time: int
    early: bool


@dataclass
class BnbNode:
    branches: frozenset = frozenset()
    parent_bound: float = float("-inf")
    # pool columns known to respect ``branches``, and how much of the pool was scanned
    columns: list | None = field(default=None, repr=False)
    scanned: int = 0
    # columns of the node's restricted master
    active: list | None = field(default=None, repr=False)

    def __post_init__(self):
        plain = [b for b in self.branches if isinstance(b, Branch)]
        req = {(b.agent, b.location) for b in plain if b.require}
        forb = {(b.agent, b.location) for b in plain if not b.require}
        if req & forb:
            raise ValueError("require and forbid on the same location")

    def child(self, branch: Branch, bound: float) -> "BnbNode":
        return BnbNode(self.branches | {branch}, bound)


def _allowed(col: Column, branches, horizon: int, caps=None) -> bool:
    if col.cost > horizon or (caps is not None and col.cost > caps[col.agent]):
        return False
    keys = col.keys(horizon)
    for b in branches:
        if isinstance(b, TargetBranch):
            if b.agent == col.agent:
                if (col.cost <= b.time) != b.early:
                    return False
            elif b.early and b.goal in col.path[b.time:]:
                return False
            continue
        if b.agent == col.agent:
            if (b.location in keys) != b.require:
                return False
        elif b.require and b.location in keys:
            # the required agent owns that vertex at that step
            return False
    return True


def init_path_pool(instance: Instance, horizon: int) -> PathPool:
    xi = shortest_path_lengths(instance)
    if horizon < max(xi, default=0):
        raise HorizonExhausted(f"horizon {horizon} shorter than a shortest path")
    pool = PathPool(instance.k)
    for i, a in enumerate(instance.agents):
        dg = instance.distances_from(a.goal)
        path = [a.start]
        while path[-1] != a.goal:
            u = path[-1]
            path.append(min(v for v in instance.adj[u] if dg[v] == dg[u] - 1))
        pool.add(Column(i, tuple(path)))
    return pool


@dataclass
class MasterSolution:
    status: str
    lp: LpSolution
    columns: list[Column]
    values: list[float]
    mu: list[float]
    cut_duals: dict
    objective: float | None
    artificial: list[float] = field(default_factory=list)
    group_duals: list[float] = field(default_factory=list)
    groups: Sequence = ()

    def step_costs(self, k: int, phase1: bool = False) -> list[float]:
        """Per-agent cost of one time step once group bound duals are priced in."""
        step = [0.0 if phase1 else 1.0] * k
        for (members, _), pi in zip(self.groups, self.group_duals):
            for i in members:
                step[i] -= pi
        return step


def solve_master(pool: PathPool, cuts: Sequence, branches=frozenset(), horizon: int = 0, *,
                 phase1: bool = False, caps=None, columns: list | None = None,
                 groups: Sequence = ()) -> MasterSolution:
    """Restricted master LP over the columns that respect ``branches``.

    ``caps`` optionally bounds each agent's arrival time; ``columns`` may hold
    a pre-filtered list of pool columns already known to respect ``branches``.
    ``groups`` holds ``(agents, bound)`` rows asking the listed agents' costs
    to add up to at least ``bound``.
    With ``phase1`` every agent gets an artificial column of cost 1 and real
    columns cost 0, so a zero objective certifies feasibility of the master.
    """
    k = len(pool.columns)
    if not isinstance(cuts, list):
        cuts = list(cuts)
    if columns is None:
        cols = [c for c in pool if _allowed(c, branches, horizon, caps)]
    elif caps is not None:
        cols = [c for c in columns if c.cost <= caps[c.agent]]
    else:
        cols = list(columns)
    nc, nr, ng = len(cols), len(cuts), len(groups)
    nart = k + ng if phase1 else 0
    A = np.zeros((k + nr + ng, nc + nart))
    agents = np.array([c.agent for c in cols], dtype=np.intp)
    costs = np.array([float(c.cost) for c in cols])
    A[agents, np.arange(nc)] = 1.0
    ri, cj = [], []
    for j, c in enumerate(cols):
        rows = c.cut_rows(cuts, horizon)
        ri += rows
        cj += [j] * len(rows)
    if ri:
        A[k + np.array(ri), cj] = 1.0
    for g, (members, bound) in enumerate(groups):
        A[k + nr + g] = 0.0
        mask = np.isin(agents, list(members))
        A[k + nr + g, :nc][mask] = costs[mask]
        if phase1:
            A[k + nr + g, nc + k + g] = bound
    if phase1:
        A[np.arange(k), nc + np.arange(k)] = 1.0
        cost = np.concatenate([np.zeros(nc), np.ones(nart)])
    else:
        cost = costs
    senses = [">="] * k + ["<="] * nr + [">="] * ng
    b = np.concatenate([np.ones(k + nr), [float(bound) for _, bound in groups]])
    lp = solve_lp(LinearProgram(cost, A, senses, b)) if nc + nart else LpSolution("infeasible")
    if lp.status != "optimal":
        return MasterSolution(lp.status, lp, cols, [], [], {}, None)
    values = lp.x[:nc].tolist()
    mu = lp.y[:k].tolist()
    duals = {c: float(lp.y[k + r]) for r, c in enumerate(cuts)}
    art = lp.x[nc:].tolist() if phase1 else []
    return MasterSolution("optimal", lp, cols, values, mu, duals, lp.objective, art,
                          lp.y[k + nr:].tolist(), list(groups))


def usage(master: MasterSolution, horizon: int) -> dict:
    use: dict = {}
    for col, lam in zip(master.columns, master.values):
        if lam <= 0:
            continue
        for key in col.keys(horizon):
            use[key] = use.get(key, 0.0) + lam
    return use


def detect_collisions(master: MasterSolution, horizon: int) -> list:
    """Locations whose fractional usage exceeds one, deterministic order."""
    over = [key for key, u in usage(master, horizon).items() if u > 1 + INT_TOL]
    return sorted(over, key=lambda key: (key[-1], key[0], key[1:-1]))


def add_collision_cut(cuts: list, location) -> bool:
    if location in cuts:
        return False
    cuts.append(location)
    return True


def _cut_penalties(duals: dict):
    vpen: dict = {}
    epen: dict = {}
    for key, y in duals.items():
        if y >= 0:
            continue
        if key[0] == "v":
            vpen[(key[1], key[2])] = vpen.get((key[1], key[2]), 0.0) - y
        else:
            epen[(key[1], key[2], key[3])] = -y
    return vpen, epen


@lru_cache(maxsize=64)
def _csr(instance: Instance):
    offsets = np.zeros(instance.n + 1, dtype=np.intc)
    targets = []
    arc = {}
    for u in range(instance.n):
        for v in instance.adj[u]:
            arc[(u, v)] = len(targets)
            targets.append(v)
        offsets[u + 1] = len(targets)
    return offsets, np.array(targets, dtype=np.intc), arc


def _restrictions(instance: Instance, agent: int, horizon: int, branches, max_arrival=None):
    """Graph surgery for one agent: ``(allowed[t, v], first, last)`` arrival window."""
    allowed = np.ones((horizon + 1, instance.n), dtype=np.uint8)
    first, last = 0, horizon if max_arrival is None else min(horizon, max_arrival)
    for b in branches:
        if isinstance(b, TargetBranch):
            if b.agent == agent:
                if b.early:
                    last = min(last, b.time)
                else:
                    first = max(first, b.time + 1)
            elif b.early:
                allowed[b.time:, b.goal] = 0
            continue
        _, v, t = b.location
        if t > horizon:
            continue
        if b.agent == agent:
            if b.require:
                keep = allowed[t, v]
                allowed[t] = 0
                allowed[t, v] = keep
            else:
                allowed[t, v] = 0
        elif b.require:
            allowed[t, v] = 0
    return allowed, first, last


def cheapest_path(instance: Instance, agent: int, horizon: int, vpen: dict, epen: dict,
                  branches=frozenset(), *, step_cost: float = 1.0, max_arrival: int | None = None,
                  impl: str | None = None):
    """Min ``step_cost * arrival + penalties`` over walks within ``horizon``.

    Branching restrictions are applied as graph surgery on the time-expanded
    graph. Returns ``(value, path)``; raises HorizonExhausted if no walk
    reaches the goal.
    """
    a = instance.agents[agent]
    n = instance.n
    offsets, targets, arc = _csr(instance)
    allowed, first, last = _restrictions(instance, agent, horizon, branches, max_arrival)
    vp = np.zeros((horizon + 1, n))
    for (v, t), y in vpen.items():
        if t <= horizon:
            vp[t, v] += y
    ep = np.zeros((max(horizon, 1), max(len(targets), 1)))
    for (u, v, t), y in epen.items():
        if t < horizon:
            ep[t, arc[(u, v)]] += y
            ep[t, arc[(v, u)]] += y
    out = pricing_kernel(impl).dp(n, offsets, targets, horizon, first, last, a.start, a.goal,
                                  float(step_cost), vp, ep, allowed)
    if out is None:
        raise HorizonExhausted(f"agent {agent}: no path within horizon {horizon}")
    return out


def price_columns(instance: Instance, pool: PathPool, master: MasterSolution, branches, horizon: int,
                  *, phase1: bool = False, log: list | None = None, caps=None) -> int:
    """Add, per agent, the cheapest path if its reduced cost is negative."""
    vpen, epen = _cut_penalties(master.cut_duals)
    step = master.step_costs(instance.k, phase1)
    added = 0
    for i in range(instance.k):
        val, path = cheapest_path(instance, i, horizon, vpen, epen, branches, step_cost=step[i],
                                  max_arrival=None if caps is None else caps[i])
        rc = val - master.mu[i]
        if rc < -RC_TOL:
            if pool.add(Column(i, path)):
                added += 1
                if log is not None:
                    log.append(rc)
    return added


def resolve_fractionality(master: MasterSolution, horizon: int) -> list[BnbNode]:
    """Children requiring and forbidding the agent-vertex-step usage nearest 0.5."""
    per_agent: dict = {}
    for col, lam in zip(master.columns, master.values):
        if lam <= INT_TOL:
            continue
        for t, v in enumerate(col.padded(horizon)):
            key = (col.agent, t, v)
            per_agent[key] = per_agent.get(key, 0.0) + lam
    frac = [(abs(u - 0.5), key) for key, u in per_agent.items() if INT_TOL < u < 1 - INT_TOL]
    if not frac:
        raise NoFractionality("master solution is integral")
    _, (agent, t, v) = min(frac)
    loc = vertex_key(v, t)
    return [BnbNode(frozenset({Branch(agent, loc, True)})), BnbNode(frozenset({Branch(agent, loc, False)}))]


def arrival_split(master: MasterSolution, k: int):
    """``(agent, t)`` whose arrival mass by ``t`` is nearest 0.5, or None."""
    mass = [{} for _ in range(k)]
    for col, lam in zip(master.columns, master.values):
        if lam > INT_TOL:
            mass[col.agent][col.cost] = mass[col.agent].get(col.cost, 0.0) + lam
    best = None
    for i, m in enumerate(mass):
        if len(m) < 2:
            continue
        total = sum(m.values())
        acc = 0.0
        for t in sorted(m)[:-1]:
            acc += m[t]
            score = abs(acc / total - 0.5)
            if best is None or score < best[0] - 1e-12:
                best = (score, i, t)
    return None if best is None else best[1:]


def target_conflicts(instance: Instance, master: MasterSolution) -> list:
    """Fractional violations of the goal-occupation rule.

    If agent i has settled on its goal g by time t, no agent j may stand on g
    at any time >= t. For integral plans ``Z_i(t) + Y_j(t) <= 1`` where Z_i(t)
    is the mass of i's paths arriving by t and Y_j(t) the mass of j's paths
    visiting g at or after t. Returns ``(excess, i, j, t)`` sorted by excess.
    """
    k = instance.k
    cols = [[] for _ in range(k)]
    for col, lam in zip(master.columns, master.values):
        if lam > INT_TOL:
            cols[col.agent].append((col, lam))
    out = []
    for i in range(k):
        g = instance.agents[i].goal
        arrivals = sorted((col.cost, lam) for col, lam in cols[i])
        for j in range(k):
            if j == i:
                continue
            visits = []
            for col, lam in cols[j]:
                last = max((t for t, v in enumerate(col.path) if v == g), default=-1)
                if last >= 0:
                    visits.append((last, lam))
            for t in sorted({last for last, _ in visits}):
                y = sum(lam for last, lam in visits if last >= t)
                z = sum(lam for cost, lam in arrivals if cost <= t)
                if y + z > 1 + INT_TOL:
                    out.append((y + z - 1, i, j, t))
    out.sort(key=lambda r: (-round(r[0], 9), r[1], r[3], r[2]))
    return out


def is_integral(master: MasterSolution) -> bool:
    return all(lam <= INT_TOL or lam >= 1 - INT_TOL for lam in master.values)


class _Search:
    def __init__(self, instance: Instance, stats: dict):
        self.instance = instance
        self.stats = stats
        self.xi = shortest_path_lengths(instance)
        self.pool = init_path_pool(instance, max(self.xi, default=0))
        self.cuts: list = []
        self.caps = None
        self.groups: list = []
        self.pairwise = PAIRWISE
        self._pair_memo: dict = {}

    def tighten(self, soc: int):
        """Only strictly cheaper plans matter now: bound every agent's arrival."""
        slack = soc - 1 - sum(self.xi)
        self.caps = tuple(x + slack for x in self.xi)

    def node_groups(self, node: BnbNode, horizon: int):
        """Global group rows plus pair bounds under this node's restrictions.

        Returns None when some pair cannot be routed at all.
        """
        if not self.pairwise or self.instance.k < 2:
            return self.groups
        inst, k = self.instance, self.instance.k
        caps = self.caps or (None,) * k
        res = [_restrictions(inst, a, horizon, node.branches, caps[a]) for a in range(k)]
        keys = [(r[0].tobytes(), r[1], r[2]) for r in res]
        rows = {G: b for G, b in self.groups}
        for i in range(k):
            for j in range(i + 1, k):
                key = (i, j, horizon, keys[i], keys[j])
                b = self._pair_memo.get(key, False)
                if b is False:
                    b = self._pair_memo[key] = pair_bound(inst, i, j, horizon, res[i], res[j])
                    self.stats["pair_bounds"] = self.stats.get("pair_bounds", 0) + 1
                if b is None:
                    return None
                if b > max(rows.get((i, j), 0), self.xi[i] + self.xi[j]):
                    rows[(i, j)] = b
        return list(rows.items())

    def node_columns(self, node: BnbNode, horizon: int) -> list:
        pool = self.pool.all
        if node.columns is None:
            node.columns, node.scanned = [], 0
        node.columns += [c for c in pool[node.scanned:] if _allowed(c, node.branches, horizon)]
        node.scanned = len(pool)
        return node.columns

    def child(self, node: BnbNode, branch, bound: float, horizon: int, m: MasterSolution) -> BnbNode:
        out = node.child(branch, bound)
        one = frozenset({branch})
        if node.columns is not None:
            out.columns = [c for c in node.columns if _allowed(c, one, horizon)]
            out.scanned = node.scanned
        # warm start from the parent's support and its zero reduced cost columns
        rc = self.pool.reduced_costs(np.array([c.uid for c in m.columns], dtype=np.intp), m, horizon)
        keep = [c for c, lam, r in zip(m.columns, m.values, rc) if lam > INT_TOL or r < 1e-9]
        out.active = [c for c in keep if _allowed(c, one, horizon)]
        return out

    def _active(self, node: BnbNode, horizon: int) -> list:
        if node.active is None:
            node.active = [c for c in self.node_columns(node, horizon)
                           if self.caps is None or c.cost <= self.caps[c.agent]]
        elif self.caps is not None:
            node.active = [c for c in node.active if c.cost <= self.caps[c.agent]]
        return node.active

    def _price(self, node: BnbNode, m: MasterSolution, horizon: int, phase1: bool = False) -> int:
        """Bring in negative reduced cost columns: from the pool first, else by the DP."""
        active = {c.uid for c in node.active}
        cand = [c for c in self.node_columns(node, horizon)
                if c.uid not in active and (self.caps is None or c.cost <= self.caps[c.agent])]
        if cand:
            rc = self.pool.reduced_costs(np.array([c.uid for c in cand], dtype=np.intp), m, horizon,
                                         phase1)
            order = [j for j in np.argsort(rc, kind="stable")[:POOL_BATCH] if rc[j] < -RC_TOL]
            if order:
                node.active += [cand[j] for j in order]
                return len(order)
        before = len(self.pool.all)
        price_columns(self.instance, self.pool, m, node.branches, horizon, phase1=phase1,
                      log=self.stats["reduced_costs"], caps=self.caps)
        fresh = self.pool.all[before:]
        self.stats["columns_priced"] += len(fresh)
        node.active += fresh
        return len(fresh)

    def evaluate(self, node: BnbNode, horizon: int) -> MasterSolution | None:
        """Column generation with lazy cuts until neither adds anything."""
        st = self.stats
        groups = self.node_groups(node, horizon)
        if groups is None:
            return None
        while True:
            m = solve_master(self.pool, self.cuts, node.branches, horizon, caps=self.caps,
                             columns=self._active(node, horizon), groups=groups)
            st["lp_solves"] += 1
            st["lp_iterations"] += m.lp.iterations
            if m.status != "optimal":
                if not self._restore_feasibility(node, horizon, groups):
                    return None
                continue
            new_cuts = [loc for loc in detect_collisions(m, horizon) if add_collision_cut(self.cuts, loc)]
            if new_cuts:
                st["cuts"] += len(new_cuts)
                continue
            try:
                if not self._price(node, m, horizon):
                    return m
            except HorizonExhausted:
                return None

    def _restore_feasibility(self, node: BnbNode, horizon: int, groups) -> bool:
        st = self.stats
        while True:
            m = solve_master(self.pool, self.cuts, node.branches, horizon, phase1=True, caps=self.caps,
                             columns=self._active(node, horizon), groups=groups)
            st["lp_solves"] += 1
            st["lp_iterations"] += m.lp.iterations
            if m.objective <= INT_TOL:
                return True
            try:
                if not self._price(node, m, horizon, phase1=True):
                    return False
            except HorizonExhausted:
                return False

    def dive(self, horizon: int, tries: int = 3):
        """Column-fixing dive: pin the heaviest fractional path until integral."""
        best = None
        for attempt in range(tries):
            node, skip = BnbNode(), attempt
            while True:
                m = self.evaluate(node, horizon)
                self.stats["dive_lps"] += 1
                if m is None:
                    break
                if is_integral(m):
                    plan = self._plan(m, horizon)
                    soc = sum(arrival_time(p) for p in plan)
                    if plan is not None and (best is None or soc < best[0]):
                        best = (soc, plan)
                    break
                frac = sorted(((lam, j) for j, lam in enumerate(m.values) if INT_TOL < lam < 1 - INT_TOL),
                              key=lambda r: (-r[0], r[1]))
                lam, j = frac[min(skip, len(frac) - 1)]
                skip = 0
                col = m.columns[j]
                pins = {Branch(col.agent, vertex_key(v, t), True) for t, v in enumerate(col.padded(horizon))}
                node = BnbNode(node.branches | pins)
            if best is not None and attempt == 0:
                break
        return best

    def _plan(self, m: MasterSolution, horizon: int):
        chosen = {}
        for col, lam in zip(m.columns, m.values):
            if lam >= 1 - INT_TOL and col.agent not in chosen:
                chosen[col.agent] = col
        plan = pad_plan([chosen[i].path for i in range(self.instance.k)], horizon)
        if validate(self.instance, plan):
            raise AssertionError("integral master solution with undetected collisions")
        return plan

    def run(self, horizon: int, incumbent):
        """Depth-first branch-and-bound at a fixed horizon."""
        stack = [BnbNode()]
        while stack:
            node = stack.pop()
            if incumbent is not None and node.parent_bound > incumbent[0] - 1 + INT_TOL:
                continue
            self.stats["bnb_nodes"] += 1
            m = self.evaluate(node, horizon)
            if m is None:
                continue
            if incumbent is not None and m.objective > incumbent[0] - 1 + INT_TOL:
                continue
            if is_integral(m):
                plan = self._plan(m, horizon)
                soc = sum(arrival_time(p) for p in plan)
                if incumbent is None or soc < incumbent[0]:
                    incumbent = (soc, plan)
                    self.tighten(soc)
                continue
            self.stats["branches"] += 1
            targets = target_conflicts(self.instance, m)
            if targets:
                _, i, _, t = targets[0]
                g = self.instance.agents[i].goal
                first, second = TargetBranch(i, g, t, False), TargetBranch(i, g, t, True)
                self.stats["target_branches"] += 1
            else:
                split = arrival_split(m, self.instance.k) if ARRIVAL_BRANCHING else None
                if split is not None:
                    i, t = split
                    g = self.instance.agents[i].goal
                    first, second = TargetBranch(i, g, t, True), TargetBranch(i, g, t, False)
                    self.stats["arrival_branches"] = self.stats.get("arrival_branches", 0) + 1
                else:
                    req, forb = resolve_fractionality(m, horizon)
                    first, second = next(iter(req.branches)), next(iter(forb.branches))
            stack.append(self.child(node, second, m.objective, horizon, m))
            stack.append(self.child(node, first, m.objective, horizon, m))
        return incumbent


def prioritized_plan(instance: Instance, horizon: int, order) -> list | None:
    """One pass of prioritized planning on the pricing DP, or None on failure.

    Each agent takes a cheapest walk that avoids the steps of the agents
    planned before it; occupied locations carry a prohibitive penalty.
    """
    big = 10.0 * (horizon + 1) * max(instance.k, 1)
    vpen: dict = {}
    epen: dict = {}
    paths: dict = {}
    for i in order:
        try:
            val, path = cheapest_path(instance, i, horizon, vpen, epen)
        except HorizonExhausted:
            return None
        if val >= big:
            return None
        paths[i] = path
        p = pad_plan([path], horizon)[0]
        for t, v in enumerate(p):
            vpen[(v, t)] = big
        for t in range(horizon):
            if p[t] != p[t + 1]:
                edge = (min(p[t], p[t + 1]), max(p[t], p[t + 1]), t)
                epen[edge] = big
    plan = pad_plan([paths[i] for i in range(instance.k)], horizon)
    return None if validate(instance, plan) else plan


def _heuristic_incumbent(instance: Instance, xi, tries: int = 8):
    import random

    horizon = max(xi, default=0) + instance.n
    idx = list(range(instance.k))
    orders = [idx, sorted(idx, key=lambda i: -xi[i]), sorted(idx, key=lambda i: xi[i])]
    rng = random.Random(0)
    for _ in range(tries):
        orders.append(rng.sample(idx, len(idx)))
    best = None
    for order in orders:
        plan = prioritized_plan(instance, horizon, order)
        if plan is not None:
            soc = sum(arrival_time(p) for p in plan)
            if best is None or soc < best[0]:
                best = (soc, plan)
    return best


def pair_bound(instance: Instance, i: int, j: int, horizon: int, ri, rj, *, impl: str | None = None):
    """Least cost of agents i and j together under per-agent restrictions.

    ``ri``/``rj`` come from :func:`_restrictions`; a settled agent sits on
    its goal until the horizon. Returns None when the pair cannot be routed.
    """
    offsets, targets, _ = _csr(instance)
    a, b = instance.agents[i], instance.agents[j]
    settle = []
    for (allowed, first, last), ag in ((ri, a), (rj, b)):
        # may settle at t if the arrival window admits t and the goal stays open
        tail = np.flip(np.cumprod(np.flip(allowed[:, ag.goal]))).astype(np.uint8)
        ok = np.zeros(horizon + 1, dtype=np.uint8)
        ok[max(first, 0):min(last, horizon) + 1] = 1
        settle.append(ok & tail)
    c = pricing_kernel(impl).pair_dp(instance.n, offsets, targets, horizon, a.start, a.goal, b.start, b.goal,
                                     ri[0], rj[0], settle[0], settle[1])
    return None if c < 0 else int(c)


def pair_optimum(instance: Instance, horizon_cap: int):
    """Least SoC of a two-agent instance, or "cap".

    Optimal within horizon H at cost c is optimal outright once
    ``H >= max(xi) + c - 1 - sum(xi)``: a cheaper plan would fit in H.
    """
    xi = shortest_path_lengths(instance)
    lb, top = sum(xi), max(xi)
    horizon = top
    while horizon <= horizon_cap:
        free = [_restrictions(instance, a, horizon, ()) for a in (0, 1)]
        c = pair_bound(instance, 0, 1, horizon, *free)
        if c is not None:
            need = top + c - 1 - lb
            if horizon >= need:
                return c
            horizon = need
        else:
            horizon += 1
    return "cap"


def group_bounds(instance: Instance, xi, size: int, horizon_cap: int | None, memo: dict):
    """Optimal joint costs of agent subsets, solved recursively by ``solve_mip``.

    Any plan for the whole instance restricts to a plan for each subset, so
    ``sum_{i in G} cost_i >= opt(G)``. Returns None when some subset has no
    plan at all. Triples are only tried when they contain an interacting pair.
    """
    from itertools import combinations

    out = []
    tight = set()
    for s in range(2, min(size, instance.k - 1) + 1):
        for G in combinations(range(instance.k), s):
            if s > 2 and not any(pair in tight for pair in combinations(G, 2)):
                continue
            agents = [instance.agents[i] for i in G]
            key = tuple(sorted((a.start, a.goal) for a in agents))
            if key not in memo:
                sub = instance.with_agents(agents)
                if s == 2:
                    memo[key] = pair_optimum(sub, horizon_cap)
                else:
                    r = solve_mip(sub, horizon_cap, precheck=False, group_size=s - 1, _memo=memo)
                    memo[key] = r.soc if r.status == "optimal" else r.status
            best = memo[key]
            if best == "unsolvable":
                return None
            if isinstance(best, int) and best > sum(xi[i] for i in G):
                out.append((G, best))
                tight.add(G)
    return out


def solve_mip(instance: Instance, horizon_cap: int | None = None, *, precheck: bool = True,
              group_size: int = 3, _memo: dict | None = None) -> SolveResult:
    """Branch-and-price with arrival caps.

    Prioritized planning and a column-fixing dive supply a first plan. The
    SoC bound then deepens from ``sum(xi)``: with bound S every agent must
    arrive by ``xi_i + S - sum(xi)``, so a complete search at horizon
    ``max(xi) + S - sum(xi)`` either finds a plan of cost S or rules S out.
    The first plan found is optimal. The master also carries the optimal
    costs of agent subsets up to ``group_size`` agents as lower bound rows,
    and every node adds exact pair bounds under its own restrictions.
    """
    t0 = time.perf_counter()
    stats = {"bnb_nodes": 0, "branches": 0, "cuts": 0, "columns_priced": 0, "lp_solves": 0,
             "lp_iterations": 0, "target_branches": 0, "dive_lps": 0, "horizons": [],
             "reduced_costs": []}
    try:
        xi = shortest_path_lengths(instance)
    except Unreachable:
        return SolveResult("unsolvable", stats={"reason": "unreachable goal"})
    if precheck and precheck_unsolvable(instance):
        return SolveResult("unsolvable", stats={"reason": "joint space exhausted"})
    if horizon_cap is None:
        horizon_cap = default_soc_cap(instance)
    lb, top = sum(xi), max(xi, default=0)
    search = _Search(instance, stats)
    if group_size >= 2 and instance.k > 2:
        groups = group_bounds(instance, xi, group_size, horizon_cap, {} if _memo is None else _memo)
        if groups is None:
            return SolveResult("unsolvable", stats={"reason": "a group of agents has no plan"})
        search.groups = groups
    stats["groups"] = len(search.groups)
    incumbent = _heuristic_incumbent(instance, xi)
    if incumbent is None or incumbent[0] > lb:
        dived = search.dive(top + instance.n)
        if dived is not None and (incumbent is None or dived[0] < incumbent[0]):
            incumbent = dived
    if incumbent is None or incumbent[0] > lb:
        # deepen the SoC bound; every plan of cost <= soc fits the horizon
        # top + soc - lb once arrivals are capped at xi_i + soc - lb
        best, incumbent = incumbent, None
        soc = lb
        while incumbent is None:
            if best is not None and soc >= best[0]:
                incumbent = best
                break
            horizon = top + soc - lb
            if horizon > horizon_cap:
                break
            stats["horizons"].append(horizon)
            search.tighten(soc + 1)
            found = search.run(horizon, (soc + 1, None))
            if found[1] is not None:
                incumbent = found
            soc += 1
    stats["columns"] = len(search.pool)
    stats["wall_time"] = time.perf_counter() - t0
    if incumbent is None:
        return SolveResult("cap", stats=stats)
    return SolveResult("optimal", trim_plan(incumbent[1]), incumbent[0], stats)
