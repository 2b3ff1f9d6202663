import random

import pytest
from hypothesis import given, settings, strategies as st

from mapfc import (
    Conflict,
    Instance,
    InvalidInstance,
    MalformedPlan,
    Unreachable,
    makespan,
    sum_of_costs,
    validate,
)
from mapfc.model import Bounds, pad_plan, shortest_path_lengths

from conftest import I1, path_graph, star
from oracles import all_walks, conflicts as brute_conflicts, cost


def test_shortest_path_examples():
    assert shortest_path_lengths(I1) == (2,)
    p3 = path_graph(3, [("v2", "v2")])
    assert shortest_path_lengths(p3) == (0,)
    assert shortest_path_lengths(star([("l1", "l2")])) == (2,)


def test_unreachable():
    inst = Instance.build(["a", "b", "c"], [("a", "b")], [("a", "c")])
    with pytest.raises(Unreachable):
        shortest_path_lengths(inst)


@pytest.mark.parametrize("names,edges,agents", [
    (["a", "b"], [("a", "a")], []),
    (["a", "b"], [("a", "b")], [("a", "b"), ("a", "a")]),
    (["a", "b"], [("a", "b")], [("a", "b"), ("b", "b")]),
    (["a", "b"], [("a", "z")], []),
])
def test_invalid_instances(names, edges, agents):
    with pytest.raises(InvalidInstance):
        Instance.build(names, edges, agents)


def test_validate_examples():
    # goals must differ, so the second agent continues past v2 to v1
    p3 = path_graph(3, [("v1", "v2"), ("v3", "v1")])
    out = validate(p3, [(0, 1, 1), (2, 1, 0)])
    assert out == [Conflict("vertex", (0, 1), (1,), 1)]

    p2 = path_graph(2, [("v1", "v2"), ("v2", "v1")])
    out = validate(p2, [(0, 1), (1, 0)])
    assert [(c.kind, c.timestep) for c in out] == [("edge", 0)]

    follow = path_graph(3, [("v1", "v2"), ("v2", "v3")])
    assert validate(follow, [(0, 1), (1, 2)]) == []
    # the stricter rule flags following, off by default
    assert [c.kind for c in validate(follow, [(0, 1), (1, 2)], vacant_only=True)] == ["follow"]


def test_parked_agent_blocks_goal():
    inst = path_graph(3, [("v1", "v3"), ("v2", "v2")])
    # agent 1 sits on v2 for the whole (padded) plan
    out = validate(inst, [(0, 1, 2), (1,)])
    assert [(c.kind, c.timestep) for c in out] == [("vertex", 1)]


def test_malformed_plans():
    with pytest.raises(MalformedPlan):
        validate(I1, [(0, 2)])  # jump
    with pytest.raises(MalformedPlan):
        validate(I1, [(1, 2)])  # wrong start
    with pytest.raises(MalformedPlan):
        validate(I1, [(0, 1)])  # wrong end
    with pytest.raises(MalformedPlan):
        validate(I1, [])


def test_sum_of_costs_examples():
    assert sum_of_costs(I1, [(0, 1, 2)]) == 2
    assert sum_of_costs(I1, [(0, 0, 1, 2)]) == 3
    inst = path_graph(3, [("v1", "v2")])
    assert sum_of_costs(inst, [(0, 0, 1)]) == 2
    g = path_graph(3, [("v2", "v2")])
    assert sum_of_costs(g, [(1, 1, 1)]) == 0
    # leaving the goal and coming back re-accrues the earlier steps
    assert sum_of_costs(g, [(1, 0, 1)]) == 2
    assert makespan([(0, 1, 2), (2, 2)]) == 2


def test_bounds():
    b = Bounds.for_soc((2, 3), 7)
    assert (b.soc_lb, b.delta, b.t_max, b.depth(0)) == (5, 2, 5, 4)
    with pytest.raises(ValueError):
        Bounds.for_soc((2, 3), 4)


def random_instance(rng, n, k):
    names = [f"u{i}" for i in range(n)]
    edges = {(i - 1, i) for i in range(1, n)}  # connected spine
    for _ in range(rng.randint(0, n)):
        a, b = rng.sample(range(n), 2)
        edges.add((min(a, b), max(a, b)))
    starts = rng.sample(range(n), k)
    goals = rng.sample(range(n), k)
    return Instance.build(names, [(names[a], names[b]) for a, b in edges],
                          [(names[s], names[g]) for s, g in zip(starts, goals)])


def random_plan(rng, inst, T):
    plan = []
    for a in inst.agents:
        walks = [w for w in all_walks(inst, a.start, T) if w[-1] == a.goal]
        if not walks:
            return None
        plan.append(rng.choice(walks))
    return plan


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10**6))
def test_validate_matches_brute_force(seed):
    rng = random.Random(seed)
    n = rng.randint(2, 7)
    inst = random_instance(rng, n, rng.randint(1, min(3, n)))
    plan = random_plan(rng, inst, rng.randint(1, 4))
    if plan is None or any(len(p) > 6 for p in plan):
        return
    padded = pad_plan(plan)
    got = sorted((c.timestep, c.kind, *c.agents) for c in validate(inst, plan))
    assert got == brute_conflicts(padded)
    # output order is (timestep, kind, agents) and deterministic
    out = validate(inst, plan)
    assert out == sorted(out, key=Conflict.sort_key) == validate(inst, plan)
    if not got:
        assert sum_of_costs(inst, plan) >= sum(shortest_path_lengths(inst))
    assert sum_of_costs(inst, plan) == sum(cost(p) for p in plan)
