"""Instances, plans, conflicts and cost bounds shared by every backend.

Vertices are addressed internally by their index ``0..n-1``; ``Instance.names``
keeps the external ids used by the text formats.
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, Sequence


class MapfError(Exception):
    """Base class for all errors raised by this package."""


class InvalidInstance(MapfError):
    pass


class Unreachable(MapfError):
    def __init__(self, agent: int):
        super().__init__(f"goal of agent {agent} is unreachable from its start")
        self.agent = agent


class MalformedPlan(MapfError):
    pass


@dataclass(frozen=True)
class Agent:
    start: int
    goal: int


@dataclass(frozen=True, eq=False)
class Instance:
    names: tuple[str, ...]
    edges: frozenset[tuple[int, int]]
    agents: tuple[Agent, ...]
    adj: tuple[tuple[int, ...], ...] = field(init=False, repr=False)

    def __post_init__(self):
        n = len(self.names)
        if len(set(self.names)) != n:
            raise InvalidInstance("duplicate vertex ids")
        nbrs: list[set[int]] = [set() for _ in range(n)]
        for u, v in self.edges:
            if not (0 <= u < n and 0 <= v < n):
                raise InvalidInstance(f"edge ({u}, {v}) references a missing vertex")
            if u == v:
                raise InvalidInstance(f"self-loop on vertex {self.names[u]}")
            nbrs[u].add(v)
            nbrs[v].add(u)
        object.__setattr__(self, "adj", tuple(tuple(sorted(s)) for s in nbrs))
        starts = [a.start for a in self.agents]
        goals = [a.goal for a in self.agents]
        for x in starts + goals:
            if not 0 <= x < n:
                raise InvalidInstance(f"agent endpoint {x} is not a vertex")
        if len(set(starts)) != len(starts):
            raise InvalidInstance("agent starts must be pairwise distinct")
        if len(set(goals)) != len(goals):
            raise InvalidInstance("agent goals must be pairwise distinct")
        if len(self.agents) > n:
            raise InvalidInstance("more agents than vertices")

    @classmethod
    def build(
        cls,
        names: Iterable[str],
        edges: Iterable[tuple[str, str]],
        agents: Iterable[tuple[str, str]],
    ) -> "Instance":
        """Construct from external vertex ids."""
        names = tuple(names)
        index = {name: i for i, name in enumerate(names)}
        try:
            es = frozenset(_norm(index[u], index[v]) for u, v in edges)
            ags = tuple(Agent(index[s], index[g]) for s, g in agents)
        except KeyError as exc:
            raise InvalidInstance(f"unknown vertex id {exc.args[0]!r}") from None
        return cls(names, es, ags)

    def with_agents(self, agents: Iterable[Agent]) -> "Instance":
        return Instance(self.names, self.edges, tuple(agents))

    @property
    def n(self) -> int:
        return len(self.names)

    @property
    def k(self) -> int:
        return len(self.agents)

    def index(self, name: str) -> int:
        return self.names.index(name)

    def adjacent(self, u: int, v: int) -> bool:
        return _norm(u, v) in self.edges

    def distances_from(self, source: int) -> list[int]:
        """BFS distances; unreachable vertices get -1."""
        dist = [-1] * self.n
        dist[source] = 0
        queue = deque([source])
        while queue:
            u = queue.popleft()
            for v in self.adj[u]:
                if dist[v] < 0:
                    dist[v] = dist[u] + 1
                    queue.append(v)
        return dist


def _norm(u: int, v: int) -> tuple[int, int]:
    return (u, v) if u <= v else (v, u)


@dataclass(frozen=True)
class Conflict:
    kind: str  # "vertex" or "edge"
    agents: tuple[int, int]
    location: tuple[int, ...]  # (v,), or (u, v) as traversed by agents[0]
    timestep: int

    def sort_key(self):
        return (self.timestep, 0 if self.kind == "vertex" else 1, self.agents, self.location)


@dataclass(frozen=True)
class Bounds:
    xi: tuple[int, ...]
    delta: int

    def __post_init__(self):
        if self.delta < 0:
            raise ValueError("delta must be non-negative")

    @classmethod
    def for_soc(cls, xi: Sequence[int], soc: int) -> "Bounds":
        return cls(tuple(xi), soc - sum(xi))

    @property
    def soc_lb(self) -> int:
        return sum(self.xi)

    @property
    def soc(self) -> int:
        return self.soc_lb + self.delta

    @property
    def t_max(self) -> int:
        return max(self.xi, default=0) + self.delta

    def depth(self, agent: int) -> int:
        return self.xi[agent] + self.delta


Plan = tuple[tuple[int, ...], ...]


def shortest_path_lengths(instance: Instance) -> tuple[int, ...]:
    out = []
    for i, a in enumerate(instance.agents):
        d = instance.distances_from(a.start)[a.goal]
        if d < 0:
            raise Unreachable(i)
        out.append(d)
    return tuple(out)


def pad_plan(plan: Sequence[Sequence[int]], horizon: int | None = None) -> Plan:
    """Extend every path to a common length by repeating its last vertex."""
    if horizon is None:
        horizon = max((len(p) - 1 for p in plan), default=0)
    out = []
    for p in plan:
        if not p:
            raise MalformedPlan("empty path")
        if len(p) - 1 > horizon:
            raise MalformedPlan("path longer than the requested horizon")
        out.append(tuple(p) + (p[-1],) * (horizon + 1 - len(p)))
    return tuple(out)


def check_plan(instance: Instance, plan: Sequence[Sequence[int]]) -> None:
    """Raise MalformedPlan unless every path is a legal individual walk."""
    if len(plan) != instance.k:
        raise MalformedPlan(f"plan has {len(plan)} paths for {instance.k} agents")
    for i, (path, agent) in enumerate(zip(plan, instance.agents)):
        if not path:
            raise MalformedPlan(f"agent {i}: empty path")
        if path[0] != agent.start:
            raise MalformedPlan(f"agent {i}: path does not begin at the start")
        if path[-1] != agent.goal:
            raise MalformedPlan(f"agent {i}: path does not end at the goal")
        for t in range(len(path) - 1):
            u, v = path[t], path[t + 1]
            if u != v and not instance.adjacent(u, v):
                raise MalformedPlan(f"agent {i}: jump {instance.names[u]}->{instance.names[v]} at t={t}")


def validate(instance: Instance, plan: Sequence[Sequence[int]], *, vacant_only: bool = False) -> list[Conflict]:
    """All vertex and swap conflicts of a plan, sorted by (timestep, kind, agents).

    With ``vacant_only`` an agent may only enter a vertex that was empty at the
    previous step, so following another agent also counts as a conflict (kind
    ``"follow"``).
    """
    check_plan(instance, plan)
    paths = pad_plan(plan)
    horizon = len(paths[0]) - 1 if paths else 0
    k = len(paths)
    found: list[Conflict] = []
    for t in range(horizon + 1):
        seen: dict[int, list[int]] = {}
        for i in range(k):
            seen.setdefault(paths[i][t], []).append(i)
        for v, who in seen.items():
            for a in range(len(who)):
                for b in range(a + 1, len(who)):
                    found.append(Conflict("vertex", (who[a], who[b]), (v,), t))
        if t == horizon:
            break
        for i in range(k):
            u, v = paths[i][t], paths[i][t + 1]
            if u == v:
                continue
            for j in range(i + 1, k):
                if paths[j][t] == v and paths[j][t + 1] == u:
                    found.append(Conflict("edge", (i, j), (u, v), t))
        if vacant_only:
            for i in range(k):
                u, v = paths[i][t], paths[i][t + 1]
                if u == v:
                    continue
                for j in range(k):
                    if j != i and paths[j][t] == v and paths[j][t + 1] != u:
                        found.append(Conflict("follow", (min(i, j), max(i, j)), (v,), t))
    found.sort(key=Conflict.sort_key)
    return found


def arrival_time(path: Sequence[int]) -> int:
    """Number of timesteps until the agent reaches its final vertex for good."""
    goal = path[-1]
    t = len(path) - 1
    while t > 0 and path[t - 1] == goal:
        t -= 1
    return t


def sum_of_costs(instance: Instance, plan: Sequence[Sequence[int]]) -> int:
    return sum(arrival_time(p) for p in plan)


def makespan(plan: Sequence[Sequence[int]]) -> int:
    return max((arrival_time(p) for p in plan), default=0)


def trim_plan(plan: Sequence[Sequence[int]]) -> Plan:
    """Drop trailing goal waits shared by all agents."""
    return pad_plan([tuple(p[: arrival_time(p) + 1]) for p in plan])


@dataclass
class SolveResult:
    """Outcome of a backend run.

    ``status`` is ``"optimal"``, ``"unsolvable"`` (proven) or ``"cap"`` (no
    solution found within the configured bound).
    """

    status: str
    plan: Plan | None = None
    soc: int | None = None
    stats: dict = field(default_factory=dict)

    @property
    def solved(self) -> bool:
        return self.status == "optimal"


def joint_space_size(instance: Instance) -> int:
    size = 1
    for j in range(instance.k):
        size *= instance.n - j
    return size


def default_soc_cap(instance: Instance) -> int:
    return max(1, instance.k) * instance.n**3
