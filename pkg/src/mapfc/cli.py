"""Command line: ``mapfc solve | bench | encode``.

Exit codes: 0 success or agreement, 1 format error, 2 cap exceeded,
3 cross-backend mismatch.
"""
from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import bench, formats
from .model import MapfError, Unreachable, shortest_path_lengths

EXIT_OK, EXIT_FORMAT, EXIT_CAP, EXIT_MISMATCH = 0, 1, 2, 3


def _read(path):
    try:
        return Path(path).read_text()
    except OSError as exc:
        raise formats.FormatError(f"cannot read {path}: {exc.strerror}") from None


def _load(args):
    map_text = _read(args.map)
    scen_text = _read(args.scen) if args.scen else None
    inst = formats.load_instance(map_text, scen_text, args.agents)
    if scen_text is not None and inst.k == 1:
        _check_single(inst, formats.parse_scen(scen_text))
    return inst


def _check_single(inst, scen):
    # sanity check only; scenario lengths are often octile, not 4-connected
    try:
        xi = shortest_path_lengths(inst)[0]
    except Unreachable:
        return
    want = float(scen.entries[0].optimal_length)
    if want and abs(want - xi) > 1e-9:
        print(f"warning: scenario optimal length {want:g} differs from 4-connected distance {xi}",
              file=sys.stderr)


def cmd_solve(args) -> int:
    from . import solve

    inst = _load(args)
    kw = {} if args.backend == "oracle" else {"soc_cap": args.soc_cap}
    r = solve(inst, args.backend, **kw)
    if r.status == "optimal":
        text = formats.write_solution(inst, r.plan)
    elif r.status == "unsolvable":
        text = "unsolvable\n"
    else:
        text = "cap\n"
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    if args.stats:
        print({k: v for k, v in r.stats.items() if k not in ("reduced_costs", "conflict_set")},
              file=sys.stderr)
    return EXIT_CAP if r.status == "cap" else EXIT_OK


def _corpus(args):
    if args.dir is None:
        return [(f"seed{s}", formats.generate_random(s, args.width, args.height, args.obstacles, 2 + s % 3))
                for s in range(args.seed, args.seed + args.count)]
    d = Path(args.dir)
    out = []
    for m in sorted(d.glob("*.map")):
        for sc in sorted(d.glob(m.stem + "*.scen")):
            out.append((sc.stem, formats.load_instance(_read(m), _read(sc), args.agents)))
    for g in sorted(d.glob("*.graph")):
        out.append((g.stem, formats.load_instance(_read(g), None, args.agents)))
    return out


def cmd_bench(args) -> int:
    backends = [b.strip() for b in args.backends.split(",") if b.strip()]
    report = bench.run_benchmark(_corpus(args), backends, args.soc_cap, jobs=args.jobs)
    text = report.to_csv()
    if args.csv:
        Path(args.csv).write_text(text)
    else:
        sys.stdout.write(text)
    lazy = report.mean_laziness()
    if lazy is not None:
        print(f"mean laziness ratio (conflict / eager collision clauses): {lazy:.4f}", file=sys.stderr)
    for name in report.mismatches:
        print(f"mismatch: {name}", file=sys.stderr)
    if report.mismatches:
        return EXIT_MISMATCH
    if any(r["status"] == "cap" for r in report.rows):
        return EXIT_CAP
    return EXIT_OK


def cmd_encode(args) -> int:
    from . import cnf
    from .model import Bounds
    from .sat_backends import _mdds

    inst = _load(args)
    xi = shortest_path_lengths(inst)
    if args.soc < sum(xi):
        print(f"soc {args.soc} is below the lower bound {sum(xi)}", file=sys.stderr)
        return EXIT_CAP
    bounds = Bounds.for_soc(xi, args.soc)
    f, vm = cnf.encode_eager(inst, _mdds(inst, bounds), bounds)
    Path(args.dimacs).write_text(cnf.to_dimacs(f, comments=args.comments))
    print(f"vars={f.num_vars} x={len(vm.x_vars)} e={len(vm.e_vars)} aux={len(vm.aux_vars)} "
          f"clauses={len(f.clauses)}", file=sys.stderr)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="mapfc", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    def instance_args(sp):
        sp.add_argument("--map", required=True, help="grid map or edge-list graph")
        sp.add_argument("--scen", help="scenario file (grid maps only)")
        sp.add_argument("--agents", type=int, help="use the first K agents")

    s = sub.add_parser("solve", help="solve one instance")
    instance_args(s)
    s.add_argument("--backend", default="eager-sat", choices=bench.BACKENDS)
    s.add_argument("--soc-cap", type=int, help="SoC cap (SAT) or horizon cap (MIP)")
    s.add_argument("--out", help="solution file (default stdout)")
    s.add_argument("--stats", action="store_true", help="print statistics to stderr")
    s.set_defaults(func=cmd_solve)

    b = sub.add_parser("bench", help="compare backends on a corpus")
    b.add_argument("--dir", help="directory of .map/.scen pairs and .graph files; "
                                 "without it a random 4x4 corpus is generated")
    b.add_argument("--backends", default=",".join(bench.BACKENDS))
    b.add_argument("--csv", help="output CSV (default stdout)")
    b.add_argument("--seed", type=int, default=0, help="first seed of the random corpus")
    b.add_argument("--count", type=int, default=20)
    b.add_argument("--width", type=int, default=4)
    b.add_argument("--height", type=int, default=4)
    b.add_argument("--obstacles", type=float, default=0.2)
    b.add_argument("--agents", type=int)
    b.add_argument("--soc-cap", type=int)
    b.add_argument("--jobs", type=int, default=1)
    b.set_defaults(func=cmd_bench)

    e = sub.add_parser("encode", help="export the eager CNF at one SoC bound")
    instance_args(e)
    e.add_argument("--soc", type=int, required=True)
    e.add_argument("--dimacs", required=True)
    e.add_argument("--comments", action="store_true", help="add clause-family comment lines")
    e.set_defaults(func=cmd_encode)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except formats.FormatError as exc:
        print(f"format error: {exc}", file=sys.stderr)
        return EXIT_FORMAT
    except Unreachable as exc:
        print(f"unsolvable: {exc}", file=sys.stderr)
        return EXIT_OK
    except MapfError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FORMAT


if __name__ == "__main__":
    sys.exit(main())
