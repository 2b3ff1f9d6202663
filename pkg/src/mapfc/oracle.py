"""Exact reference solver: A* over joint configurations.

A state is the tuple of agent positions plus a bitmask of agents that have
*settled*, i.e. committed to stay on their goal forever. Settling is a zero
cost transition available to an agent standing on its goal; every joint step
costs the number of unsettled agents. An agent's accumulated cost is thus its
final arrival time, which is the sum-of-costs convention of
:func:`mapfc.model.sum_of_costs`.
"""
from __future__ import annotations

import heapq
from dataclasses import dataclass, field

from .model import Instance, Plan, Unreachable, pad_plan, shortest_path_lengths

DEFAULT_STATE_CAP = 10**6


@dataclass
class OracleResult:
    status: str  # "optimal", "unsolvable" or "cap"
    plan: Plan | None = None
    soc: int | None = None
    stats: dict = field(default_factory=dict)


def joint_successors(adj, positions, frozen):
    """Yield every collision-free joint move from ``positions``.

    ``adj[v]`` lists the neighbours of v; agents with their bit set in
    ``frozen`` do not move.
    """
    k = len(positions)
    occupied_next = {positions[i] for i in range(k) if frozen >> i & 1}
    nxt = list(positions)

    def rec(i):
        if i == k:
            yield tuple(nxt)
            return
        u = positions[i]
        if frozen >> i & 1:
            yield from rec(i + 1)
            return
        for v in (u,) + adj[u]:
            if v in occupied_next:
                continue
            if v != u:
                # swap: an earlier agent moved v -> u
                if any(positions[j] == v and nxt[j] == u for j in range(i)):
                    continue
            occupied_next.add(v)
            nxt[i] = v
            yield from rec(i + 1)
            occupied_next.discard(v)
        nxt[i] = u

    yield from rec(0)


def _goal_distances(instance: Instance):
    return [instance.distances_from(a.goal) for a in instance.agents]


def is_solvable(instance: Instance, state_cap: int = DEFAULT_STATE_CAP) -> bool | None:
    """True/False when decided exactly, None when the state cap was hit."""
    try:
        shortest_path_lengths(instance)
    except Unreachable:
        return False
    k = instance.k
    start = tuple(a.start for a in instance.agents)
    goal = tuple(a.goal for a in instance.agents)
    if start == goal:
        return True
    dg = _goal_distances(instance)
    adj = instance.adj
    h0 = sum(dg[i][start[i]] for i in range(k))
    heap = [(h0, 0, start)]
    seen = {start}
    tick = 0
    while heap:
        _, _, s = heapq.heappop(heap)
        for nxt in joint_successors(adj, s, 0):
            if nxt in seen:
                continue
            if nxt == goal:
                return True
            seen.add(nxt)
            if len(seen) > state_cap:
                return None
            tick += 1
            heapq.heappush(heap, (sum(dg[i][nxt[i]] for i in range(k)), tick, nxt))
    return False


def solve_joint(instance: Instance, state_cap: int = DEFAULT_STATE_CAP, *, exact_unsolvable: bool = True) -> OracleResult:
    """SoC-optimal plan by A*, or an exact unsolvability verdict."""
    if exact_unsolvable:
        verdict = is_solvable(instance, state_cap)
        if verdict is False:
            return OracleResult("unsolvable")
        if verdict is None:
            return OracleResult("cap")
    k = instance.k
    agents = instance.agents
    adj = instance.adj
    dg = _goal_distances(instance)
    goals = tuple(a.goal for a in agents)
    full = (1 << k) - 1
    start = (tuple(a.start for a in agents), 0)

    def h(pos, mask):
        return sum(dg[i][pos[i]] for i in range(k) if not mask >> i & 1)

    g = {start: 0}
    parent = {start: None}  # state -> (previous state, moved?)
    heap = [(h(*start), 0, 0, start)]
    tick = 0
    expanded = 0
    while heap:
        f, negg, _, state = heapq.heappop(heap)
        cost = -negg
        if cost > g[state]:
            continue
        pos, mask = state
        if mask == full:
            return OracleResult("optimal", _reconstruct(parent, state), cost,
                                {"expanded": expanded, "generated": len(g)})
        expanded += 1
        succ = []
        for i in range(k):
            if not mask >> i & 1 and pos[i] == goals[i]:
                succ.append(((pos, mask | 1 << i), 0))
        step = k - bin(mask).count("1")
        for nxt in joint_successors(adj, pos, mask):
            succ.append(((nxt, mask), step))
        for nstate, c in succ:
            ng = cost + c
            old = g.get(nstate)
            if old is not None and old <= ng:
                continue
            g[nstate] = ng
            parent[nstate] = (state, c > 0 or nstate[0] != pos)
            if len(g) > state_cap:
                return OracleResult("cap", stats={"expanded": expanded, "generated": len(g)})
            tick += 1
            # ties broken towards deeper g
            heapq.heappush(heap, (ng + h(*nstate), -ng, tick, nstate))
    return OracleResult("unsolvable", stats={"expanded": expanded, "generated": len(g)})


def _reconstruct(parent, state) -> Plan:
    steps = []
    while True:
        link = parent[state]
        if link is None:
            steps.append(state[0])
            break
        prev, moved = link
        if moved:
            steps.append(state[0])
        state = prev
    steps.reverse()
    k = len(steps[0])
    return pad_plan([tuple(s[i] for s in steps) for i in range(k)])
