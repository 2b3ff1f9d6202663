import numpy as np
import pytest

from mapfc import bnp, formats, validate
from mapfc.bnp import (
    Branch,
    BnbNode,
    Column,
    MasterSolution,
    NoFractionality,
    PathPool,
    TargetBranch,
    add_collision_cut,
    cheapest_path,
    detect_collisions,
    init_path_pool,
    pair_bound,
    price_columns,
    resolve_fractionality,
    solve_master,
    solve_mip,
    usage,
    vertex_key,
)
from mapfc.oracle import solve_joint

from conftest import I1, I2, I3, I4, path_graph
from helpers import Probe, root_column_generation
from oracles import min_soc_fixed_horizon

PRICING = ["python"] + (["cython"] if bnp.PRICING_KERNEL == "cython" else [])


def v(inst, name):
    return inst.index(name)


def hand_master(columns, values, k, mu=None, duals=None):
    return MasterSolution("optimal", None, columns, values, mu or [0.0] * k, duals or {}, None)


def test_init_pool():
    pool = init_path_pool(I1, 2)
    assert [c.path for c in pool.columns[0]] == [(0, 1, 2)] and pool.columns[0][0].cost == 2
    pool = init_path_pool(I3, 2)
    c = v(I3, "c")
    for i in range(2):
        (col,) = pool.columns[i]
        assert col.cost == 2 and col.path[1] == c
    still = path_graph(3, [("v2", "v2")])
    assert init_path_pool(still, 0).columns[0][0].cost == 0
    with pytest.raises(bnp.HorizonExhausted):
        init_path_pool(I1, 1)


def test_pool_rejects_duplicates():
    pool = PathPool(1)
    assert pool.add(Column(0, (0, 1, 2)))
    assert not pool.add(Column(0, (0, 1, 2, 2)))  # same path once trimmed
    assert len(pool) == 1


def test_master_examples():
    pool = PathPool(1)
    pool.add(Column(0, (0, 1, 2)))
    pool.add(Column(0, (0, 0, 1, 2)))
    m = solve_master(pool, [], horizon=3)
    assert m.objective == pytest.approx(2) and np.allclose(m.values, [1, 0])

    l1, l2, c = v(I3, "l1"), v(I3, "l2"), v(I3, "c")
    pool = PathPool(2)
    pool.add(Column(0, (l1, c, l2)))
    pool.add(Column(0, (l1, l1, c, l2)))
    pool.add(Column(1, (l2, c, l1)))
    pool.add(Column(1, (l2, l2, c, l1)))
    assert solve_master(pool, [], horizon=3).objective == pytest.approx(4)
    cuts = []
    assert add_collision_cut(cuts, vertex_key(c, 1))
    assert not add_collision_cut(cuts, vertex_key(c, 1))
    m = solve_master(pool, cuts, horizon=3)
    assert m.objective == pytest.approx(5)
    assert m.cut_duals[vertex_key(c, 1)] <= 0
    assert usage(m, 3)[vertex_key(c, 1)] <= 1 + 1e-6


def test_detect_collisions():
    a, b = Column(0, (0, 1)), Column(1, (2, 1, 0))
    m = hand_master([a, b], [1.0, 1.0], 2)
    assert vertex_key(1, 1) in detect_collisions(m, 2)
    apart = hand_master([Column(0, (0, 0)), Column(0, (0, 1)), Column(1, (2, 2))], [0.5, 0.5, 1.0], 2)
    assert detect_collisions(apart, 1) == []
    pool = init_path_pool(I3, 2)
    m = solve_master(pool, [], horizon=2)
    assert detect_collisions(m, 2) == [vertex_key(v(I3, "c"), 1)]


def test_pricing_examples():
    pool = PathPool(1)
    pool.add(Column(0, (0, 0, 1, 2)))
    m = solve_master(pool, [], horizon=3)
    assert m.mu[0] == pytest.approx(3)
    log = []
    assert price_columns(I1, pool, m, frozenset(), 3, log=log) == 1
    assert pool.all[-1].path == (0, 1, 2) and log[0] == pytest.approx(-1)

    pool = init_path_pool(I1, 3)
    m = solve_master(pool, [], horizon=3)
    assert price_columns(I1, pool, m, frozenset(), 3) == 0

    one = I3.with_agents(I3.agents[:1])
    c = v(I3, "c")
    pool = init_path_pool(one, 3)
    m = hand_master(pool.columns[0], [1.0], 1, mu=[12.0], duals={vertex_key(c, 1): -10.0})
    assert price_columns(one, pool, m, frozenset(), 3) == 1
    new = pool.all[-1].path
    assert new[1] != c and new[-1] == one.agents[0].goal


def test_resolve_fractionality():
    cols = [Column(0, (0, 1, 2)), Column(0, (0, 0, 1, 2))]
    kids = resolve_fractionality(hand_master(cols, [0.5, 0.5], 1), 3)
    req, forb = (next(iter(k.branches)) for k in kids)
    assert req.require and not forb.require and req.location == forb.location
    # agent 1 has usages 0.9 and 0.1, agent 0 sits at 0.5
    mixed = cols + [Column(1, (2, 2, 1, 0)), Column(1, (2, 1, 0))]
    kids = resolve_fractionality(hand_master(mixed, [0.5, 0.5, 0.9, 0.1], 2), 3)
    b = next(iter(kids[0].branches))
    assert b.agent == 0 and b.location[2] == 1
    with pytest.raises(NoFractionality):
        resolve_fractionality(hand_master(cols, [1.0, 0.0], 1), 3)


def test_node_consistency():
    loc = vertex_key(1, 1)
    with pytest.raises(ValueError):
        BnbNode(frozenset({Branch(0, loc, True), Branch(0, loc, False)}))


def test_branching_surgery():
    inst = path_graph(4, [("v1", "v4"), ("v4", "v1")])
    val, path = cheapest_path(inst, 0, 6, {}, {}, frozenset({Branch(0, vertex_key(1, 1), False)}))
    assert path[1] != 1 and val == 4
    # another agent required to stand on v2 at t=1 keeps agent 0 out
    val, path = cheapest_path(inst, 0, 6, {}, {}, frozenset({Branch(1, vertex_key(1, 1), True)}))
    assert path[1] != 1
    val, path = cheapest_path(inst, 0, 6, {}, {}, frozenset({TargetBranch(0, 3, 4, False)}))
    assert val == 5


@pytest.mark.parametrize("inst,soc", [(I1, 2), (I3, 7), (I4, 4)], ids=["I1", "I3", "I4"])
def test_solve_mip_fixtures(inst, soc):
    r = solve_mip(inst)
    assert r.status == "optimal" and r.soc == soc
    assert validate(inst, r.plan) == []
    if inst is I1:
        assert r.stats["cuts"] == 0 and r.stats["branches"] == 0
    assert all(rc < -bnp.RC_TOL for rc in r.stats["reduced_costs"])


def test_solve_mip_i2():
    assert solve_mip(I2).status == "unsolvable"
    assert solve_mip(I2, 27, precheck=False).status == "cap"


@pytest.mark.parametrize("seed", range(12))
def test_root_master_properties(seed):
    inst = formats.generate_random(seed, 4, 4, 0.2, 2 + seed % 3)
    opt = solve_joint(inst)
    horizon = len(opt.plan[0]) - 1
    probe = Probe()
    m = root_column_generation(inst, horizon, probe)
    assert m is not None
    # LP relaxation bound
    assert m.objective <= opt.soc + 1e-6
    assert probe.worst_usage <= 1 + 1e-6
    assert probe.worst_rc < -bnp.RC_TOL
    # convexity rows are tight for agents with positive costs
    for i, a in enumerate(inst.agents):
        if a.start != a.goal:
            total = sum(lam for col, lam in zip(m.columns, m.values) if col.agent == i)
            assert total == pytest.approx(1, abs=1e-6)
    # cuts never exclude a collision-free plan
    cols = [Column(i, p) for i, p in enumerate(opt.plan)]
    for key in m.cut_duals:
        assert sum(key in c.keys(horizon) for c in cols) <= 1


@pytest.mark.parametrize("impl", PRICING)
@pytest.mark.parametrize("seed", range(10))
def test_pair_bound_matches_dp(seed, impl):
    inst = formats.generate_random(seed, 3, 3, 0.2, 2)
    xi = [inst.distances_from(a.start)[a.goal] for a in inst.agents]
    for horizon in range(max(xi), max(xi) + 4):
        ri = bnp._restrictions(inst, 0, horizon, ())
        rj = bnp._restrictions(inst, 1, horizon, ())
        assert pair_bound(inst, 0, 1, horizon, ri, rj, impl=impl) == min_soc_fixed_horizon(inst, horizon)


def test_pricing_kernels_agree():
    if len(PRICING) < 2:
        pytest.skip("compiled pricing kernel not built")
    rng = np.random.default_rng(2)
    for seed in range(20):
        inst = formats.generate_random(seed, 5, 5, 0.2, 3)
        H = 12
        vpen = {(int(rng.integers(inst.n)), int(rng.integers(H + 1))): float(rng.random() * 3)
                for _ in range(15)}
        for i in range(inst.k):
            a = cheapest_path(inst, i, H, vpen, {}, impl="python")
            b = cheapest_path(inst, i, H, vpen, {}, impl="cython")
            assert a[0] == pytest.approx(b[0]) and a[1] == b[1]
