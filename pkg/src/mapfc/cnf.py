"""Boolean encodings of bounded sum-of-costs MAPF over MDDs.

Variables are allocated in three consecutive blocks: occupancy ``X[i,v,t]``
for every MDD node, movement ``E[i,u,v,t]`` for every MDD arc, then auxiliary
variables of the cost circuit. Every clause carries a family tag.
"""
from __future__ import annotations

import os
import shlex
import subprocess
import tempfile
from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from . import sat
from .mdd import Mdd, extend_to
from .model import Bounds, Conflict, Instance, MapfError, pad_plan

FAMILIES = ("path", "vertex-collision", "swap-collision", "cardinality", "conflict-elimination")


class UnknownVariable(MapfError):
    pass


class SolverFailure(MapfError):
    pass


class AmbiguousAssignment(MapfError):
    pass


@dataclass
class VarMap:
    x_vars: dict[tuple[int, int, int], int] = field(default_factory=dict)
    e_vars: dict[tuple[int, int, int, int], int] = field(default_factory=dict)
    aux_vars: list[int] = field(default_factory=list)
    mdds: list[Mdd] = field(default_factory=list)
    horizon: int = 0
    indicators: list[int] = field(default_factory=list)

    @property
    def count(self) -> int:
        return len(self.x_vars) + len(self.e_vars) + len(self.aux_vars)

    def new_aux(self) -> int:
        v = self.count + 1
        self.aux_vars.append(v)
        return v


@dataclass
class CnfFormula:
    num_vars: int = 0
    clauses: list[tuple[int, ...]] = field(default_factory=list)
    tags: list[str] = field(default_factory=list)
    _conflict_keys: set = field(default_factory=set, repr=False)

    def add(self, clause: Iterable[int], tag: str) -> None:
        clause = tuple(clause)
        if not clause:
            raise ValueError("empty clause")
        if tag not in FAMILIES:
            raise ValueError(f"unknown clause family {tag!r}")
        top = max(abs(x) for x in clause)
        if 0 in clause or top > self.num_vars:
            raise ValueError(f"clause {clause} references variables outside 1..{self.num_vars}")
        self.clauses.append(clause)
        self.tags.append(tag)

    def family_counts(self) -> dict[str, int]:
        c = Counter(self.tags)
        return {f: c.get(f, 0) for f in FAMILIES}

    def __len__(self):
        return len(self.clauses)


def _pairs(items: Sequence[int]):
    for a in range(len(items)):
        for b in range(a + 1, len(items)):
            yield items[a], items[b]


def encode_base(instance: Instance, mdds: Sequence[Mdd], bounds: Bounds) -> tuple[CnfFormula, VarMap]:
    """Individual path constraints plus the sum-of-costs circuit, no collisions."""
    horizon = bounds.t_max
    vm = VarMap(horizon=horizon)
    for i, mdd in enumerate(mdds):
        if mdd.depth != bounds.depth(i):
            raise ValueError(f"agent {i}: MDD depth {mdd.depth} != {bounds.depth(i)}")
        vm.mdds.append(extend_to(mdd, horizon, instance.agents[i].goal))
    for i, mdd in enumerate(vm.mdds):
        for t, layer in enumerate(mdd.layers):
            for v in layer:
                vm.x_vars[(i, v, t)] = len(vm.x_vars) + 1
    base = len(vm.x_vars)
    for i, mdd in enumerate(vm.mdds):
        for t, u, v in mdd.arcs:
            vm.e_vars[(i, u, v, t)] = base + len(vm.e_vars) + 1

    f = CnfFormula(num_vars=vm.count)
    X, E = vm.x_vars, vm.e_vars
    for i, mdd in enumerate(vm.mdds):
        a = instance.agents[i]
        f.add((X[(i, a.start, 0)],), "path")
        f.add((X[(i, a.goal, horizon)],), "path")
        outs = mdd.out_arcs()
        for t, layer in enumerate(mdd.layers):
            for x, y in _pairs([X[(i, v, t)] for v in layer]):
                f.add((-x, -y), "path")
            if t == horizon:
                continue
            for u in layer:
                arcs = [E[(i, u, v, t)] for v in outs.get((u, t), ())]
                f.add((-X[(i, u, t)], *arcs), "path")
                for x, y in _pairs(arcs):
                    f.add((-x, -y), "path")
        for t, u, v in mdd.arcs:
            e = E[(i, u, v, t)]
            f.add((-e, X[(i, u, t)]), "path")
            f.add((-e, X[(i, v, t + 1)]), "path")
    encode_soc_bound(f, vm, bounds, instance)
    return f, vm


def sequential_counter(f: CnfFormula, vm: VarMap, lits: Sequence[int], bound: int) -> int:
    """At-most-``bound`` over ``lits`` (Sinz counter). Returns aux vars created."""
    n = len(lits)
    if bound >= n:
        return 0
    if bound == 0:
        for x in lits:
            f.add((-x,), "cardinality")
        return 0
    before = len(vm.aux_vars)
    s = [[vm.new_aux() for _ in range(bound)] for _ in range(n - 1)]
    f.num_vars = vm.count
    f.add((-lits[0], s[0][0]), "cardinality")
    for c in range(1, bound):
        f.add((-s[0][c],), "cardinality")
    for j in range(1, n - 1):
        x = lits[j]
        f.add((-x, s[j][0]), "cardinality")
        f.add((-s[j - 1][0], s[j][0]), "cardinality")
        for c in range(1, bound):
            f.add((-x, -s[j - 1][c - 1], s[j][c]), "cardinality")
            f.add((-s[j - 1][c], s[j][c]), "cardinality")
        f.add((-x, -s[j - 1][bound - 1]), "cardinality")
    f.add((-lits[n - 1], -s[n - 2][bound - 1]), "cardinality")
    return len(vm.aux_vars) - before


def encode_soc_bound(f: CnfFormula, vm: VarMap, bounds: Bounds, instance: Instance) -> tuple[int, int]:
    """Lateness indicators per agent and step, at most ``delta`` of them true.

    Indicator ``L[i,t]`` (``xi_i <= t < depth_i``) is forced true when agent i
    is off its goal at t or at any later step, so their count is exactly
    the agent's cost above its shortest path.
    Returns ``(aux vars added, clauses added)``.
    """
    before_vars, before_clauses = len(vm.aux_vars), len(f)
    lits = []
    for i, mdd in enumerate(vm.mdds):
        goal = instance.agents[i].goal
        chain = []
        for t in range(bounds.xi[i], bounds.depth(i)):
            ind = vm.new_aux()
            f.num_vars = vm.count
            chain.append(ind)
            for v in mdd.layers[t]:
                if v != goal:
                    f.add((-vm.x_vars[(i, v, t)], ind), "cardinality")
        for later, earlier in zip(chain[1:], chain):
            f.add((-later, earlier), "cardinality")
        lits.extend(chain)
    vm.indicators = lits
    sequential_counter(f, vm, lits, bounds.delta)
    f.num_vars = vm.count
    return len(vm.aux_vars) - before_vars, len(f) - before_clauses


def vertex_collision_pairs(vm: VarMap):
    by_node: dict[tuple[int, int], list[int]] = {}
    for (i, v, t) in vm.x_vars:
        by_node.setdefault((v, t), []).append(i)
    for (v, t), who in sorted(by_node.items(), key=lambda kv: (kv[0][1], kv[0][0])):
        for i, j in _pairs(sorted(who)):
            yield i, j, v, t


def swap_collision_pairs(vm: VarMap):
    by_arc: dict[tuple[int, int, int], list[int]] = {}
    for (i, u, v, t) in vm.e_vars:
        if u != v:
            by_arc.setdefault((u, v, t), []).append(i)
    for (u, v, t), who in sorted(by_arc.items(), key=lambda kv: (kv[0][2], kv[0][0], kv[0][1])):
        for j in by_arc.get((v, u, t), ()):
            for i in who:
                if i < j:
                    yield i, j, u, v, t


def encode_vertex_collisions(f: CnfFormula, vm: VarMap) -> int:
    n = 0
    for i, j, v, t in vertex_collision_pairs(vm):
        f.add((-vm.x_vars[(i, v, t)], -vm.x_vars[(j, v, t)]), "vertex-collision")
        n += 1
    return n


def encode_swap_collisions(f: CnfFormula, vm: VarMap) -> int:
    n = 0
    for i, j, u, v, t in swap_collision_pairs(vm):
        f.add((-vm.e_vars[(i, u, v, t)], -vm.e_vars[(j, v, u, t)]), "swap-collision")
        n += 1
    return n


def eager_collision_count(vm: VarMap) -> int:
    """Number of eager collision clauses the two encoders would add."""
    return sum(1 for _ in vertex_collision_pairs(vm)) + sum(1 for _ in swap_collision_pairs(vm))


def encode_eager(instance: Instance, mdds: Sequence[Mdd], bounds: Bounds) -> tuple[CnfFormula, VarMap]:
    f, vm = encode_base(instance, mdds, bounds)
    encode_vertex_collisions(f, vm)
    encode_swap_collisions(f, vm)
    return f, vm


def conflict_clause(vm: VarMap, c: Conflict) -> tuple[int, int]:
    i, j = c.agents
    t = c.timestep
    try:
        if c.kind == "vertex":
            (v,) = c.location
            return (-vm.x_vars[(i, v, t)], -vm.x_vars[(j, v, t)])
        if c.kind == "edge":
            u, v = c.location
            return (-vm.e_vars[(i, u, v, t)], -vm.e_vars[(j, v, u, t)])
    except KeyError:
        raise UnknownVariable(f"{c} refers to a node or arc missing at the current bound") from None
    raise ValueError(f"cannot eliminate conflict of kind {c.kind!r}")


def add_conflict_clauses(f: CnfFormula, vm: VarMap, conflicts: Iterable[Conflict]) -> int:
    added = 0
    for c in conflicts:
        key = (c.kind, c.agents, c.location, c.timestep)
        if key in f._conflict_keys:
            continue
        clause = conflict_clause(vm, c)
        f._conflict_keys.add(key)
        f.add(clause, "conflict-elimination")
        added += 1
    return added


@dataclass
class Decision:
    satisfiable: bool
    assignment: tuple[bool, ...] | None  # index 0 unused; assignment[v] for v in 1..n
    stats: dict

    def __bool__(self):
        return self.satisfiable


def _assignment(num_vars: int, lits: Iterable[int]) -> tuple[bool, ...]:
    vals = [False] * (num_vars + 1)
    for x in lits:
        if 0 < abs(x) <= num_vars:
            vals[abs(x)] = x > 0
    return tuple(vals)


def decide(f: CnfFormula, *, mode: str = "embedded", command: str | Sequence[str] | None = None,
           impl: str | None = None, timeout: float | None = None) -> Decision:
    """Run a complete SAT decision on ``f``.

    ``mode="external"`` writes DIMACS to a temporary file and runs ``command``;
    the string ``{input}`` in the command is replaced by that path (appended
    when absent) and ``{output}``, if present, by a result file in MiniSat
    format. Otherwise the solver's stdout is read in competition format.
    """
    if mode == "embedded":
        status, model, stats = sat.solve_clauses(f.num_vars, f.clauses, impl=impl)
        if status is None:
            raise SolverFailure("conflict limit reached")
        return Decision(status, _assignment(f.num_vars, model) if status else None, dict(stats))
    if mode != "external":
        raise ValueError(f"unknown decision mode {mode!r}")
    if command is None:
        raise ValueError("external mode needs a solver command")
    argv = shlex.split(command) if isinstance(command, str) else list(command)
    with tempfile.TemporaryDirectory(prefix="mapfc-") as tmp:
        cnf_path = os.path.join(tmp, "formula.cnf")
        out_path = os.path.join(tmp, "result.txt")
        with open(cnf_path, "w") as fh:
            fh.write(to_dimacs(f))
        if not any("{input}" in a for a in argv):
            argv.append("{input}")
        uses_out = any("{output}" in a for a in argv)
        argv = [a.replace("{input}", cnf_path).replace("{output}", out_path) for a in argv]
        try:
            proc = subprocess.run(argv, capture_output=True, text=True, timeout=timeout)
        except (OSError, subprocess.TimeoutExpired) as exc:
            raise SolverFailure(f"cannot run {argv[0]}: {exc}") from exc
        if uses_out:
            try:
                with open(out_path) as fh:
                    text = fh.read()
            except OSError as exc:
                raise SolverFailure(f"solver wrote no result file (exit {proc.returncode})") from exc
        else:
            text = proc.stdout
    status, lits = parse_solver_output(text)
    if status is None:
        raise SolverFailure(f"unrecognised solver output (exit {proc.returncode}): {proc.stderr.strip()[:200]}")
    return Decision(status, _assignment(f.num_vars, lits) if status else None, {"returncode": proc.returncode})


def parse_solver_output(text: str) -> tuple[bool | None, list[int]]:
    """Accept competition format (``s``/``v`` lines) or MiniSat result files."""
    status = None
    lits: list[int] = []
    lines = text.splitlines()
    for line in lines:
        parts = line.split()
        if not parts:
            continue
        head = parts[0]
        if head == "s":
            word = " ".join(parts[1:])
            if word == "SATISFIABLE":
                status = True
            elif word == "UNSATISFIABLE":
                status = False
        elif head == "v":
            lits.extend(int(x) for x in parts[1:] if x != "0")
        elif head in ("SAT", "SATISFIABLE") and status is None:
            status = True
        elif head in ("UNSAT", "UNSATISFIABLE") and status is None:
            status = False
        elif status is True and head.lstrip("-").isdigit():
            lits.extend(int(x) for x in parts if x != "0")
    return status, lits


def parse_assignment(text: str, num_vars: int) -> tuple[bool, ...]:
    """Whitespace-separated signed integers, optionally 0-terminated."""
    return _assignment(num_vars, (int(x) for x in text.split()))


def decode(assignment: Sequence[bool], vm: VarMap, instance: Instance):
    """Read one vertex per agent and timestep off a satisfying assignment."""
    where: dict[tuple[int, int], int] = {}
    for (i, v, t), var in vm.x_vars.items():
        if assignment[var]:
            if (i, t) in where:
                raise AmbiguousAssignment(f"agent {i} occupies two vertices at t={t}")
            where[(i, t)] = v
    plan = []
    for i in range(instance.k):
        try:
            plan.append(tuple(where[(i, t)] for t in range(vm.horizon + 1)))
        except KeyError:
            raise AmbiguousAssignment(f"agent {i} has no position at some timestep") from None
    return pad_plan(plan, vm.horizon)


def encode_plan(plan, vm: VarMap, instance: Instance) -> tuple[bool, ...] | None:
    """Occupancy and movement variables of ``plan``, or None if it leaves the MDDs.

    Auxiliary variables are left False; callers complete them by propagation.
    """
    vals = [False] * (vm.count + 1)
    paths = pad_plan(plan, vm.horizon)
    for i, p in enumerate(paths):
        for t, v in enumerate(p):
            var = vm.x_vars.get((i, v, t))
            if var is None:
                return None
            vals[var] = True
            if t < vm.horizon:
                e = vm.e_vars.get((i, v, p[t + 1], t))
                if e is None:
                    return None
                vals[e] = True
    return tuple(vals)


def to_dimacs(f: CnfFormula, *, comments: bool = False) -> str:
    out = []
    if comments:
        for fam, n in f.family_counts().items():
            out.append(f"c family {fam} {n}\n")
    out.append(f"p cnf {f.num_vars} {len(f.clauses)}\n")
    for c in f.clauses:
        out.append(" ".join(map(str, c)) + " 0\n")
    return "".join(out)


def parse_dimacs(text: str) -> tuple[int, list[tuple[int, ...]]]:
    num_vars = None
    clauses: list[tuple[int, ...]] = []
    cur: list[int] = []
    for line in text.splitlines():
        s = line.strip()
        if not s or s.startswith("c") or s.startswith("%"):
            continue
        if s.startswith("p"):
            parts = s.split()
            if len(parts) != 4 or parts[1] != "cnf":
                raise ValueError(f"bad DIMACS header: {s!r}")
            num_vars = int(parts[2])
            continue
        for tok in s.split():
            x = int(tok)
            if x == 0:
                clauses.append(tuple(cur))
                cur = []
            else:
                cur.append(x)
    if cur:
        clauses.append(tuple(cur))
    if num_vars is None:
        raise ValueError("missing DIMACS header")
    return num_vars, clauses
