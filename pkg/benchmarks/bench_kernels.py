"""Compiled vs pure-Python kernels on identical inputs.

    python benchmarks/bench_kernels.py [--repeat N] [--end-to-end]

Each row times one hot kernel under both implementations and checks that
the two agree. ``--end-to-end`` also solves a slice of the random corpus in
two subprocesses, one with ``MAPFC_PURE=1``.
"""
import argparse
import os
import random
import subprocess
import sys
import time

import numpy as np

from mapfc import bnp, formats, sat
from mapfc import simplex
from mapfc.cnf import encode_eager
from mapfc.model import Bounds, shortest_path_lengths
from mapfc.sat_backends import _mdds


def best_of(fn, repeat):
    best = float("inf")
    out = None
    for _ in range(repeat):
        t = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t)
    return best, out


def cdcl_inputs():
    cases = []
    for seed in (3, 11, 29):
        inst = formats.generate_random(seed, 6, 6, 0.2, 5)
        xi = shortest_path_lengths(inst)
        b = Bounds.for_soc(xi, sum(xi) + 2)
        f, _ = encode_eager(inst, _mdds(inst, b), b)
        cases.append((f"eager cnf seed {seed}", f.num_vars, [tuple(c) for c in f.clauses]))
    rng = random.Random(7)
    n = 60
    clauses = [tuple(v * rng.choice((1, -1)) for v in rng.sample(range(1, n + 1), 3))
               for _ in range(int(4.26 * n))]
    cases.append(("random 3-sat n=60", n, clauses))
    return cases


def bench_cdcl(repeat):
    rows = []
    for name, nv, clauses in cdcl_inputs():
        res = {}
        for impl in ("cython", "python"):
            res[impl] = best_of(lambda: sat.solve_clauses(nv, clauses, impl=impl), repeat)
        agree = res["cython"][1][0] == res["python"][1][0]
        rows.append((f"cdcl: {name}", res["cython"][0], res["python"][0], agree))
    return rows


def bench_pricing(repeat):
    rows = []
    inst = formats.generate_random(5, 8, 8, 0.2, 4)
    offsets, targets, _ = bnp._csr(inst)
    H = 30
    rng = np.random.default_rng(0)
    vp = -rng.random((H + 1, inst.n)) * (rng.random((H + 1, inst.n)) < 0.2)
    ep = np.zeros((H, max(len(targets), 1)))
    a = inst.agents[0]
    allowed, first, last = bnp._restrictions(inst, 0, H, ())
    res = {}
    for impl in ("cython", "python"):
        k = bnp.pricing_kernel(impl)
        res[impl] = best_of(lambda: k.dp(inst.n, offsets, targets, H, first, last, a.start, a.goal,
                                         1.0, vp, ep, allowed), repeat)
    agree = abs(res["cython"][1][0] - res["python"][1][0]) < 1e-9
    rows.append(("pricing dp 8x8, H=30", res["cython"][0], res["python"][0], agree))

    inst = formats.generate_random(9, 5, 5, 0.2, 2)
    H = 14
    ri = bnp._restrictions(inst, 0, H, ())
    rj = bnp._restrictions(inst, 1, H, ())
    res = {}
    for impl in ("cython", "python"):
        res[impl] = best_of(lambda: bnp.pair_bound(inst, 0, 1, H, ri, rj, impl=impl), repeat)
    rows.append(("pair dp 5x5, H=14", res["cython"][0], res["python"][0],
                 res["cython"][1] == res["python"][1]))
    return rows


def bench_simplex(repeat):
    rng = np.random.default_rng(1)
    lps = []
    for _ in range(40):
        m, n = 30, 60
        A = rng.integers(0, 3, size=(m, n)).astype(float)
        lps.append(simplex.LinearProgram(rng.integers(1, 9, size=n).astype(float), A, [">="] * m,
                                         rng.integers(1, 4, size=m).astype(float)))
    res = {}
    for impl in ("cython", "python"):
        res[impl] = best_of(lambda: [simplex.solve_lp(lp, impl=impl) for lp in lps], repeat)
    agree = all(abs(p.objective - q.objective) < 1e-6 for p, q in zip(res["cython"][1], res["python"][1]))
    return [("simplex 40 LPs 30x60", res["cython"][0], res["python"][0], agree)]


E2E = """
import time
from mapfc import formats, solve
t = time.perf_counter()
for s in range({n}):
    inst = formats.generate_random(s, 4, 4, 0.2, 2 + s % 3)
    for b in ("eager-sat", "smt-cbs", "mip-bnp"):
        solve(inst, b)
print(time.perf_counter() - t)
"""


def bench_end_to_end(n):
    rows = []
    times = {}
    for impl, extra in (("cython", {}), ("python", {"MAPFC_PURE": "1"})):
        env = {k: v for k, v in os.environ.items() if k != "MAPFC_PURE"}
        env.update(extra)
        out = subprocess.run([sys.executable, "-c", E2E.format(n=n)], env=env, capture_output=True,
                             text=True, check=True)
        times[impl] = float(out.stdout.split()[-1])
    rows.append((f"end to end, {n} corpus instances", times["cython"], times["python"], None))
    return rows


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--repeat", type=int, default=3)
    p.add_argument("--end-to-end", action="store_true")
    p.add_argument("--instances", type=int, default=20, help="corpus slice for --end-to-end")
    args = p.parse_args(argv)
    if sat.KERNEL != "cython" or bnp.PRICING_KERNEL != "cython" or simplex.KERNEL != "cython":
        print("compiled kernels are not built (or MAPFC_PURE is set); nothing to compare")
        return 1
    rows = bench_cdcl(args.repeat) + bench_pricing(args.repeat) + bench_simplex(args.repeat)
    if args.end_to_end:
        rows += bench_end_to_end(args.instances)
    print(f"{'kernel':40s} {'cython s':>10s} {'python s':>10s} {'speedup':>8s}  agree")
    for name, tc, tp, agree in rows:
        mark = "-" if agree is None else ("yes" if agree else "NO")
        print(f"{name:40s} {tc:10.4f} {tp:10.4f} {tp / tc:8.1f}  {mark}")
    return 0 if all(r[3] is not False for r in rows) else 1


if __name__ == "__main__":
    sys.exit(main())
