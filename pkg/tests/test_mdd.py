import random

import pytest

from mapfc import formats
from mapfc.mdd import DepthTooSmall, build_mdd, mdd_walks

from conftest import I1, path_graph
from oracles import all_walks


def walk_nodes(inst, agent, depth):
    a = inst.agents[agent]
    walks = [w for w in all_walks(inst, a.start, depth) if w[-1] == a.goal]
    nodes = {(v, t) for w in walks for t, v in enumerate(w)}
    arcs = {(t, w[t], w[t + 1]) for w in walks for t in range(depth)}
    return walks, nodes, arcs


def test_examples():
    m = build_mdd(I1, 0, 2)
    assert m.nodes == {(0, 0), (1, 1), (2, 2)}
    assert len(m.arcs) == 2 and mdd_walks(m) == 1
    m = build_mdd(I1, 0, 3)
    assert len(m.nodes) == 6
    assert m.layers[1] == (0, 1) and m.layers[2] == (1, 2)
    assert mdd_walks(m) == 3
    g = path_graph(3, [("v2", "v2")])
    m = build_mdd(g, 0, 0)
    assert m.nodes == {(1, 0)} and m.arcs == () and mdd_walks(m) == 1


def test_depth_too_small():
    with pytest.raises(DepthTooSmall):
        build_mdd(I1, 0, 1)


def test_dump():
    assert build_mdd(I1, 0, 2).dump(I1.names) == "0 v1\n1 v2\n2 v3\n0 v1 v2\n1 v2 v3\n"


def small_corpus():
    rng = random.Random(5)
    out = []
    for seed in range(60):
        w, h = rng.choice([(2, 3), (3, 3), (2, 5), (3, 2), (1, 6)])
        inst = formats.generate_random(seed, w, h, 0.2, 2)
        if inst.n <= 10:
            out.append(inst)
    return out


@pytest.mark.parametrize("inst", small_corpus())
def test_exact_against_walk_enumeration(inst):
    for agent in range(inst.k):
        a = inst.agents[agent]
        xi = inst.distances_from(a.start)[a.goal]
        for depth in range(xi, 7):
            m = build_mdd(inst, agent, depth)
            walks, nodes, arcs = walk_nodes(inst, agent, depth)
            assert m.nodes == nodes
            assert set(m.arcs) == arcs
            assert mdd_walks(m) == len(walks)


def test_goal_wait_extension():
    inst = formats.generate_random(3, 3, 3, 0.2, 1)
    a = inst.agents[0]
    xi = inst.distances_from(a.start)[a.goal]
    for d in range(xi, 6):
        big = build_mdd(inst, 0, d + 1)
        for w in all_walks(inst, a.start, d):
            if w[-1] == a.goal:
                ext = w + (a.goal,)
                assert all(big.contains(v, t) for t, v in enumerate(ext))
