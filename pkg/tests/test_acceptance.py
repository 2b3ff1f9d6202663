"""Acceptance suite: one test per criterion, each reporting a PASS/FAIL line."""
import itertools
import random
import time
from pathlib import Path

import numpy as np
import pytest
from pysat.formula import CNF

import mapfc
from mapfc import Bounds, formats, sum_of_costs, validate
from mapfc.bnp import RC_TOL
from mapfc.cnf import decode, encode_eager, encode_plan, to_dimacs
from mapfc.mdd import build_mdd, mdd_walks
from mapfc.model import Unreachable, shortest_path_lengths, trim_plan
from mapfc.simplex import LinearProgram, solve_lp

from conftest import I1, I2, I3, I4, cycle4, path_graph, report_criterion, star
from helpers import Probe, root_column_generation
from oracles import (
    all_walks,
    brute_sat,
    conflicts,
    cost,
    kkt_residuals,
    min_soc_fixed_horizon,
    random_bounded_lp,
    vertex_enumeration,
)

DATA = Path(__file__).parent / "data"
SEEDS = range(200)
BACKENDS = ("eager-sat", "smt-cbs", "mip-bnp")


def corpus_instance(seed):
    return formats.generate_random(seed, 4, 4, 0.2, 2 + seed % 3)


@pytest.fixture(scope="module")
def corpus():
    """Every backend and the oracle on the 200 seeded instances, timed as one run."""
    t0 = time.perf_counter()
    out = []
    for seed in SEEDS:
        inst = corpus_instance(seed)
        row = {"seed": seed, "instance": inst, "oracle": mapfc.solve(inst, "oracle")}
        for b in BACKENDS:
            row[b] = mapfc.solve(inst, b)
        out.append(row)
    return out, time.perf_counter() - t0


def test_criterion_1_oracle_equivalence(corpus):
    rows, wall = corpus
    bad = []
    for row in rows:
        ref = row["oracle"]
        assert ref.status in ("optimal", "unsolvable")
        for b in BACKENDS:
            r = row[b]
            if (r.status, r.soc) != (ref.status, ref.soc):
                bad.append((row["seed"], b, r.status, r.soc, ref.soc))
            elif r.status == "optimal":
                assert validate(row["instance"], r.plan) == []
    unsolvable = sum(r["oracle"].status == "unsolvable" for r in rows)
    ok = not bad and wall < 300
    report_criterion(1, ok, f"{len(rows)} instances, {unsolvable} unsolvable, "
                            f"{len(bad)} mismatches, {wall:.1f}s")
    assert not bad, bad[:5]
    assert wall < 300


def test_criterion_2_fixtures():
    expected = {"I1": (I1, 2), "I4": (I4, 4), "I3": (I3, 7), "I2": (I2, None)}
    failures = []
    for name, (inst, soc) in expected.items():
        # oracles first: the reference search and the independent horizon DP
        ref = mapfc.solve(inst, "oracle")
        dp = min(filter(None, (min_soc_fixed_horizon(inst, h) for h in range(2 * inst.n + 1))), default=None)
        if ref.soc != soc or dp != soc or (soc is None) != (ref.status == "unsolvable"):
            failures.append((name, "oracle", ref.status, ref.soc, dp))
            continue
        for b in BACKENDS:
            r = mapfc.solve(inst, b)
            want = ("unsolvable", None) if soc is None else ("optimal", soc)
            if (r.status, r.soc) != want:
                failures.append((name, b, r.status, r.soc))
    report_criterion(2, not failures, "I1->2 I4->4 I3->7 I2->unsolvable" if not failures else str(failures))
    assert not failures


def tiny_instances():
    out = [I1, I3, I4,
           path_graph(2, [("v1", "v2")]),
           path_graph(3, [("v1", "v2"), ("v3", "v1")]),
           path_graph(4, [("v1", "v4")]),
           path_graph(3, [("v2", "v2"), ("v1", "v3")]),
           star([("l1", "l2"), ("l3", "c")]),
           cycle4([("v1", "v3"), ("v3", "v1")]),
           cycle4([("v1", "v2")])]
    for seed in range(80):
        w, h = random.Random(seed).choice([(2, 2), (2, 3), (3, 2), (1, 4), (3, 3)])
        try:
            out.append(formats.generate_random(seed, w, h, 0.2, 1 + seed % 2))
        except formats.InfeasibleParameters:
            pass
    return out


def conflict_free_plans(inst, bounds, soc):
    """Trimmed plans of cost <= soc and no collisions, by walk enumeration."""
    T = bounds.t_max
    per_agent = [[w for w in all_walks(inst, a.start, T) if w[-1] == a.goal] for a in inst.agents]
    out = set()
    for combo in itertools.product(*per_agent):
        if sum(cost(p) for p in combo) <= soc and not conflicts(list(combo)):
            out.add(trim_plan(combo))
    return out


def test_criterion_3_encoding_round_trip():
    checked = mismatches = 0
    for inst in tiny_instances():
        try:
            xi = shortest_path_lengths(inst)
        except Unreachable:
            continue
        for delta in range(4):
            bounds = Bounds.for_soc(xi, sum(xi) + delta)
            mdds = [build_mdd(inst, i, bounds.depth(i)) for i in range(inst.k)]
            f, vm = encode_eager(inst, mdds, bounds)
            if f.num_vars > 20:
                break
            checked += 1
            models = brute_sat(f.num_vars, f.clauses)
            decoded = set()
            for a in models:
                plan = trim_plan(decode(a, vm, inst))
                if validate(inst, plan) or sum_of_costs(inst, plan) > bounds.soc:
                    mismatches += 1  # unsound model
                decoded.add(plan)
            truth = conflict_free_plans(inst, bounds, bounds.soc)
            mismatches += len(decoded ^ truth)
            # every plan has exactly one x/e projection among the models
            base = len(vm.x_vars) + len(vm.e_vars)
            for plan in truth:
                vals = encode_plan(plan, vm, inst)
                hits = {a[1:base + 1] for a in models if a[1:base + 1] == vals[1:base + 1]}
                mismatches += len(hits) != 1
    ok = mismatches == 0 and checked >= 50
    report_criterion(3, ok, f"{checked} CNFs with <= 20 variables, {mismatches} mismatches")
    assert checked >= 50 and mismatches == 0


def test_criterion_4_laziness(corpus):
    rows, _ = corpus
    ratios, worse = [], []
    for row in rows:
        r = row["smt-cbs"]
        if r.status != "optimal":
            continue
        lazy, eager = r.stats["conflict_clauses"], r.stats["eager_collision_clauses"]
        if lazy > eager:
            worse.append(row["seed"])
        if eager:
            ratios.append(lazy / eager)
    mean = float(np.mean(ratios)) if ratios else float("nan")
    report_criterion(4, not worse, f"mean ratio {mean:.4f} over {len(ratios)} instances, "
                                   f"{len(worse)} above eager")
    assert not worse


def mdd_corpus():
    out = []
    for seed in range(120):
        w, h = random.Random(100 + seed).choice([(2, 3), (3, 3), (2, 5), (3, 2), (1, 6), (2, 4), (3, 4)])
        try:
            inst = formats.generate_random(seed, w, h, 0.2, 2)
        except formats.InfeasibleParameters:
            continue
        if inst.n <= 10:
            out.append(inst)
    out += [corpus_instance(s) for s in SEEDS if corpus_instance(s).n <= 10]
    return out


def test_criterion_5_mdd_exactness():
    checked = mismatches = 0
    for inst in mdd_corpus():
        for agent, a in enumerate(inst.agents):
            xi = inst.distances_from(a.start)[a.goal]
            if xi < 0 or xi > 6:
                continue
            for depth in range(xi, 7):
                m = build_mdd(inst, agent, depth)
                walks = [w for w in all_walks(inst, a.start, depth) if w[-1] == a.goal]
                nodes = {(v, t) for w in walks for t, v in enumerate(w)}
                checked += 1
                mismatches += set(m.nodes) != nodes or mdd_walks(m) != len(walks)
    report_criterion(5, mismatches == 0, f"{checked} MDDs, {mismatches} mismatches")
    assert checked > 0 and mismatches == 0


def test_criterion_6_lp_core():
    rng = np.random.default_rng(2024)
    worst_obj = worst_kkt = 0.0
    failures = optimal = 0
    for _ in range(500):
        c, A, senses, b = random_bounded_lp(rng)
        s = solve_lp(LinearProgram(c, A, senses, b))
        ref = vertex_enumeration(c, A, senses, b)
        if ref is None:
            failures += s.status != "infeasible"
            continue
        if s.status != "optimal":
            failures += 1
            continue
        optimal += 1
        worst_obj = max(worst_obj, abs(s.objective - ref[0]))
        worst_kkt = max(worst_kkt, *kkt_residuals(c, A, senses, b, s.x, s.y))
    ok = failures == 0 and worst_obj <= 1e-6 and worst_kkt <= 1e-7
    report_criterion(6, ok, f"500 LPs ({optimal} optimal), max |obj diff| {worst_obj:.1e}, "
                            f"max duality/CS residual {worst_kkt:.1e}")
    assert ok


def test_criterion_7_master_and_cuts(corpus):
    rows, _ = corpus
    probe = Probe()
    roots = 0
    for row in rows[:60]:
        ref = row["oracle"]
        if ref.status != "optimal":
            continue
        horizon = max(len(p) for p in ref.plan) - 1
        for h in (horizon, horizon + 1):
            root_column_generation(row["instance"], h, probe)
            roots += 1
    # the full solver's own pricing log on every corpus instance
    mip_rcs = [rc for row in rows if row["mip-bnp"].status == "optimal"
               for rc in row["mip-bnp"].stats["reduced_costs"]]
    worst_rc = max(probe.worst_rc, max(mip_rcs, default=float("-inf")))
    ok = probe.worst_usage <= 1 + 1e-6 and worst_rc < -RC_TOL and probe.cut_checks
    report_criterion(7, bool(ok), f"{len(probe.cut_checks)} cuts over {roots} root masters, "
                                  f"max usage {probe.worst_usage:.7f}; "
                                  f"{len(probe.priced) + len(mip_rcs)} priced columns, max rc {worst_rc:.2e}")
    assert ok


def test_criterion_8_formats(tmp_path):
    xi = shortest_path_lengths(I1)
    bounds = Bounds.for_soc(xi, sum(xi))
    f, vm = encode_eager(I1, [build_mdd(I1, 0, bounds.depth(0))], bounds)
    text = to_dimacs(f)
    parsed = CNF(from_string=text)
    total = len(vm.x_vars) + len(vm.e_vars) + len(vm.aux_vars)
    dimacs_ok = parsed.nv == total == f.num_vars and [tuple(c) for c in parsed.clauses] == [tuple(c) for c in f.clauses]

    def read(name):
        return (DATA / name).read_bytes().decode()

    golden = {
        "small.map": formats.write_map(formats.parse_map(read("small.map"))) == read("small.map"),
        "p3.map": formats.write_map(formats.parse_map(read("p3.map"))) == read("p3.map"),
        "small.scen": formats.write_scen(formats.parse_scen(read("small.scen"))) == read("small.scen"),
        "p3.scen": formats.write_scen(formats.parse_scen(read("p3.scen"))) == read("p3.scen"),
    }
    star_inst = formats.parse_graph(read("star.graph"))
    plan, _, _ = formats.parse_solution(read("star.sol"), star_inst)
    golden["star.sol"] = formats.write_solution(star_inst, plan) == read("star.sol")
    # a freshly solved plan written to disk reads back to the same bytes
    sol = tmp_path / "i3.sol"
    sol.write_text(formats.write_solution(I3, mapfc.solve(I3, "oracle").plan))
    again, _, _ = formats.parse_solution(sol.read_text(), I3)
    golden["i3.sol"] = formats.write_solution(I3, again) == sol.read_text()
    ok = dimacs_ok and all(golden.values())
    failed = [k for k, v in golden.items() if not v]
    report_criterion(8, ok, f"DIMACS header {parsed.nv} = x+e+aux {total}; "
                            f"{len(golden) - len(failed)}/{len(golden)} golden round trips byte-exact")
    assert ok, failed
