"""Per-agent multi-valued decision diagrams over the time-expanded graph."""
from __future__ import annotations

from dataclasses import dataclass

from .model import Instance, MapfError


class DepthTooSmall(MapfError):
    pass


@dataclass(frozen=True)
class Mdd:
    agent: int
    depth: int
    layers: tuple[tuple[int, ...], ...]  # sorted vertices per timestep 0..depth
    arcs: tuple[tuple[int, int, int], ...]  # (t, u, v): (u, t) -> (v, t + 1)

    @property
    def nodes(self) -> frozenset[tuple[int, int]]:
        return frozenset((v, t) for t, layer in enumerate(self.layers) for v in layer)

    def contains(self, v: int, t: int) -> bool:
        return 0 <= t <= self.depth and v in self.layers[t]

    def out_arcs(self) -> dict[tuple[int, int], list[int]]:
        out: dict[tuple[int, int], list[int]] = {}
        for t, u, v in self.arcs:
            out.setdefault((u, t), []).append(v)
        return out

    def dump(self, names=None) -> str:
        """Plain text: ``t vertex`` per node then ``t u v`` per arc."""
        name = (lambda v: names[v]) if names is not None else str
        lines = [f"{t} {name(v)}" for t, layer in enumerate(self.layers) for v in layer]
        lines += [f"{t} {name(u)} {name(v)}" for t, u, v in self.arcs]
        return "\n".join(lines) + "\n"


def build_mdd(instance: Instance, agent: int, depth: int, *, dist_start=None, dist_goal=None) -> Mdd:
    a = instance.agents[agent]
    ds = dist_start if dist_start is not None else instance.distances_from(a.start)
    dg = dist_goal if dist_goal is not None else instance.distances_from(a.goal)
    xi = ds[a.goal]
    if xi < 0 or depth < xi:
        raise DepthTooSmall(f"agent {agent}: depth {depth} below shortest path {xi}")
    layers = []
    for t in range(depth + 1):
        layers.append(tuple(v for v in range(instance.n) if 0 <= ds[v] <= t and 0 <= dg[v] <= depth - t))
    arcs = []
    for t in range(depth):
        nxt = set(layers[t + 1])
        for u in layers[t]:
            if u in nxt:
                arcs.append((t, u, u))
            for v in instance.adj[u]:
                if v in nxt:
                    arcs.append((t, u, v))
    arcs.sort()
    return Mdd(agent, depth, tuple(layers), tuple(arcs))


def extend_to(mdd: Mdd, horizon: int, goal: int) -> Mdd:
    """Append goal-wait layers so the diagram reaches ``horizon``."""
    if horizon <= mdd.depth:
        return mdd
    extra = horizon - mdd.depth
    layers = mdd.layers + ((goal,),) * extra
    arcs = mdd.arcs + tuple((t, goal, goal) for t in range(mdd.depth, horizon))
    return Mdd(mdd.agent, horizon, layers, arcs)


def mdd_walks(mdd: Mdd) -> int:
    """Number of distinct directed paths from the root to the sink."""
    if not mdd.layers:
        return 0
    count = {v: 1 for v in mdd.layers[0]}
    by_t: dict[int, list[tuple[int, int]]] = {}
    for t, u, v in mdd.arcs:
        by_t.setdefault(t, []).append((u, v))
    for t in range(mdd.depth):
        nxt: dict[int, int] = {}
        for u, v in by_t.get(t, ()):
            nxt[v] = nxt.get(v, 0) + count.get(u, 0)
        count = nxt
    return sum(count.values())

