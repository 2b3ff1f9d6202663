import random

import pytest

from mapfc import Instance, formats, sum_of_costs, validate
from mapfc.model import shortest_path_lengths
from mapfc.oracle import is_solvable, solve_joint

from conftest import I1, I2, I3, I4
from oracles import min_soc_fixed_horizon


def test_fixtures():
    assert solve_joint(I1).soc == 2
    assert solve_joint(I2).status == "unsolvable"
    assert solve_joint(I3).soc == 7
    assert solve_joint(I4).soc == 4
    assert is_solvable(I2) is False
    assert is_solvable(I1) is True


def test_cap():
    big = formats.generate_random(0, 8, 8, 0.1, 6)
    assert is_solvable(big, state_cap=100) in (True, None)
    assert solve_joint(big, state_cap=100).status == "cap"


def test_single_agent_equals_distance():
    for seed in range(15):
        inst = formats.generate_random(seed, 5, 5, 0.2, 1)
        r = solve_joint(inst)
        assert r.soc == shortest_path_lengths(inst)[0]


def tiny_two_agent(rng):
    n = rng.randint(3, 6)
    names = [f"u{i}" for i in range(n)]
    edges = {(i - 1, i) for i in range(1, n)}
    for _ in range(rng.randint(0, 3)):
        a, b = rng.sample(range(n), 2)
        edges.add((min(a, b), max(a, b)))
    s = rng.sample(range(n), 2)
    g = rng.sample(range(n), 2)
    return Instance.build(names, [(names[a], names[b]) for a, b in edges],
                          [(names[s[0]], names[g[0]]), (names[s[1]], names[g[1]])])


@pytest.mark.parametrize("seed", range(30))
def test_two_agents_against_dp(seed):
    inst = tiny_two_agent(random.Random(seed))
    r = solve_joint(inst)
    want = min_soc_fixed_horizon(inst, 2 * inst.n)
    if want is None:
        assert r.status == "unsolvable"
    else:
        assert r.status == "optimal" and r.soc == want
        assert validate(inst, r.plan) == []
        assert sum_of_costs(inst, r.plan) == want
