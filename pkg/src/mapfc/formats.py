"""Text formats: grid maps, scenarios, edge-list graphs and solutions.

Grid cells become vertices ``v1, v2, ...`` in row-major order over passable
cells, 4-connected.
"""
from __future__ import annotations

import random
from dataclasses import dataclass
from typing import Sequence

from .model import Agent, Instance, MapfError, makespan, pad_plan, sum_of_costs

PASSABLE = frozenset(".G")
BLOCKED = frozenset("@OT")


class FormatError(MapfError):
    def __init__(self, message: str, line: int | None = None):
        super().__init__(f"line {line}: {message}" if line is not None else message)
        self.line = line


class BlockedCell(FormatError):
    pass


class InfeasibleParameters(MapfError):
    pass


@dataclass(frozen=True)
class GridMap:
    height: int
    width: int
    rows: tuple[str, ...]
    map_type: str = "octile"

    def passable(self, x: int, y: int) -> bool:
        return 0 <= y < self.height and 0 <= x < self.width and self.rows[y][x] in PASSABLE

    @property
    def cells(self) -> list[tuple[int, int]]:
        return [(x, y) for y in range(self.height) for x in range(self.width) if self.passable(x, y)]

    def vertex_of(self) -> dict[tuple[int, int], int]:
        return {cell: i for i, cell in enumerate(self.cells)}

    def instance(self, agents: Sequence[Agent] = ()) -> Instance:
        index = self.vertex_of()
        edges = set()
        for (x, y), i in index.items():
            for nx, ny in ((x + 1, y), (x, y + 1)):
                j = index.get((nx, ny))
                if j is not None:
                    edges.add((i, j))
        names = tuple(f"v{i + 1}" for i in range(len(index)))
        return Instance(names, frozenset(edges), tuple(agents))


def parse_map(text: str) -> GridMap:
    lines = text.splitlines()
    header = {}
    i = 0
    expected = ("type", "height", "width")
    while i < len(lines) and lines[i].strip() != "map":
        parts = lines[i].split()
        if len(parts) != 2 or parts[0] not in expected:
            raise FormatError(f"unexpected header line {lines[i]!r}", i + 1)
        header[parts[0]] = parts[1]
        i += 1
    if i == len(lines):
        raise FormatError("missing 'map' line", i)
    for key in expected:
        if key not in header:
            raise FormatError(f"missing '{key}' header", i + 1)
    try:
        height, width = int(header["height"]), int(header["width"])
    except ValueError:
        raise FormatError("height and width must be integers", i) from None
    rows = lines[i + 1:i + 1 + height]
    if len(rows) != height:
        raise FormatError(f"expected {height} map rows, found {len(rows)}", len(lines))
    for r, row in enumerate(rows):
        lineno = i + 2 + r
        if len(row) != width:
            raise FormatError(f"row has {len(row)} cells, expected {width}", lineno)
        bad = set(row) - PASSABLE - BLOCKED
        if bad:
            raise FormatError(f"unsupported terrain {''.join(sorted(bad))!r}", lineno)
    if any(line.strip() for line in lines[i + 1 + height:]):
        raise FormatError("trailing content after the map", i + 2 + height)
    return GridMap(height, width, tuple(rows), header["type"])


def write_map(grid: GridMap) -> str:
    head = [f"type {grid.map_type}", f"height {grid.height}", f"width {grid.width}", "map"]
    return "\n".join(head + list(grid.rows)) + "\n"


@dataclass(frozen=True)
class ScenarioEntry:
    bucket: str
    map_name: str
    width: str
    height: str
    start: tuple[int, int]
    goal: tuple[int, int]
    optimal_length: str

    def line(self) -> str:
        return "\t".join([self.bucket, self.map_name, self.width, self.height, str(self.start[0]),
                          str(self.start[1]), str(self.goal[0]), str(self.goal[1]), self.optimal_length])


@dataclass(frozen=True)
class Scenario:
    entries: tuple[ScenarioEntry, ...]
    version: str = "1"

    def agents(self, grid: GridMap, limit: int | None = None) -> list[Agent]:
        index = grid.vertex_of()
        out = []
        for n, e in enumerate(self.entries[:limit]):
            for cell in (e.start, e.goal):
                if cell not in index:
                    raise BlockedCell(f"cell {cell} is not passable", n + 2)
            out.append(Agent(index[e.start], index[e.goal]))
        return out


def parse_scen(text: str, grid: GridMap | None = None) -> Scenario:
    lines = text.splitlines()
    if not lines or lines[0].split()[:1] != ["version"]:
        raise FormatError("missing 'version' header", 1)
    parts = lines[0].split()
    if len(parts) != 2:
        raise FormatError("malformed version header", 1)
    entries = []
    for n, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        f = line.split("\t")
        if len(f) != 9:
            raise FormatError(f"expected 9 tab-separated fields, found {len(f)}", n)
        try:
            sx, sy, gx, gy = (int(v) for v in f[4:8])
            float(f[8])
        except ValueError:
            raise FormatError("non-numeric coordinate or length", n) from None
        entry = ScenarioEntry(f[0], f[1], f[2], f[3], (sx, sy), (gx, gy), f[8])
        if grid is not None:
            for cell in (entry.start, entry.goal):
                if not grid.passable(*cell):
                    raise BlockedCell(f"cell {cell} is not passable", n)
        entries.append(entry)
    return Scenario(tuple(entries), parts[1])


def write_scen(scen: Scenario) -> str:
    return "".join([f"version {scen.version}\n"] + [e.line() + "\n" for e in scen.entries])


def parse_graph(text: str) -> Instance:
    """Edge-list format: ``v <id>``, ``e <id> <id>`` and ``a <start> <goal>`` lines."""
    names: list[str] = []
    edges: list[tuple[str, str]] = []
    agents: list[tuple[str, str]] = []
    for n, line in enumerate(text.splitlines(), start=1):
        parts = line.split()
        if not parts or parts[0].startswith("#"):
            continue
        tag, args = parts[0], parts[1:]
        if tag == "v" and len(args) == 1:
            names.append(args[0])
        elif tag == "e" and len(args) == 2:
            edges.append((args[0], args[1]))
        elif tag == "a" and len(args) == 2:
            agents.append((args[0], args[1]))
        else:
            raise FormatError(f"unrecognised line {line!r}", n)
    try:
        return Instance.build(names, edges, agents)
    except MapfError as exc:
        raise FormatError(str(exc)) from None


def write_graph(instance: Instance) -> str:
    nm = instance.names
    lines = [f"v {x}" for x in nm]
    lines += [f"e {nm[u]} {nm[v]}" for u, v in sorted(instance.edges)]
    lines += [f"a {nm[a.start]} {nm[a.goal]}" for a in instance.agents]
    return "\n".join(lines) + "\n"


def write_solution(instance: Instance, plan, stats: dict | None = None) -> str:
    plan = pad_plan(plan) if plan else ()
    lines = [f"agent {i}: " + " ".join(instance.names[v] for v in path) for i, path in enumerate(plan)]
    lines.append(f"soc={sum_of_costs(instance, plan)} makespan={makespan(plan)}")
    return "\n".join(lines) + "\n"


def parse_solution(text: str, instance: Instance):
    """Returns ``(plan, soc, makespan)`` as written by :func:`write_solution`."""
    index = {name: i for i, name in enumerate(instance.names)}
    plan = []
    footer = None
    for n, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        if line.startswith("agent "):
            head, _, body = line.partition(":")
            try:
                i = int(head.split()[1])
            except (IndexError, ValueError):
                raise FormatError("bad agent index", n) from None
            if i != len(plan):
                raise FormatError(f"agent {i} out of order", n)
            try:
                plan.append(tuple(index[x] for x in body.split()))
            except KeyError as exc:
                raise FormatError(f"unknown vertex {exc.args[0]!r}", n) from None
        elif line.startswith("soc="):
            try:
                kv = dict(part.split("=", 1) for part in line.split())
                footer = (int(kv["soc"]), int(kv["makespan"]))
            except (KeyError, ValueError):
                raise FormatError("bad footer", n) from None
        else:
            raise FormatError(f"unrecognised line {line!r}", n)
    if footer is None:
        raise FormatError("missing soc/makespan footer")
    return tuple(plan), footer[0], footer[1]


def load_instance(map_text: str, scen_text: str | None = None, agents: int | None = None) -> Instance:
    """Grid map + scenario, or a self-contained edge-list graph."""
    if map_text.lstrip().startswith("type"):
        grid = parse_map(map_text)
        if scen_text is None:
            return grid.instance()
        scen = parse_scen(scen_text, grid)
        return grid.instance(scen.agents(grid, agents))
    inst = parse_graph(map_text)
    if agents is not None:
        inst = inst.with_agents(inst.agents[:agents])
    return inst


def random_grid(seed: int, width: int, height: int, obstacle_ratio: float, k: int):
    """Random grid and agents; returns ``(GridMap, Instance)``."""
    if not 0 <= obstacle_ratio < 1:
        raise InfeasibleParameters("obstacle ratio must lie in [0, 1)")
    rng = random.Random(seed)
    cells = [(x, y) for y in range(height) for x in range(width)]
    blocked = set(rng.sample(cells, round(obstacle_ratio * len(cells))))
    rows = tuple("".join("@" if (x, y) in blocked else "." for x in range(width)) for y in range(height))
    grid = GridMap(height, width, rows)
    graph = grid.instance()
    comp = _largest_component(graph)
    if k > len(comp):
        raise InfeasibleParameters(f"{k} agents do not fit into {len(comp)} connected cells")
    starts = rng.sample(comp, k)
    goals = rng.sample(comp, k)
    return grid, graph.with_agents([Agent(s, g) for s, g in zip(starts, goals)])


def generate_random(seed: int, width: int, height: int, obstacle_ratio: float, k: int) -> Instance:
    return random_grid(seed, width, height, obstacle_ratio, k)[1]


def _largest_component(graph: Instance) -> list[int]:
    seen = [False] * graph.n
    best: list[int] = []
    for s in range(graph.n):
        if seen[s]:
            continue
        comp = [s]
        seen[s] = True
        for u in comp:
            for v in graph.adj[u]:
                if not seen[v]:
                    seen[v] = True
                    comp.append(v)
        if len(comp) > len(best):
            best = comp
    return sorted(best)
