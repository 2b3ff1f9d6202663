"""``python -m mapfc.sat FILE``: decide a DIMACS CNF, SAT-competition output."""
import sys

from ..cnf import parse_dimacs
from . import solve_clauses


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    if len(argv) != 1:
        print("usage: python -m mapfc.sat FILE.cnf", file=sys.stderr)
        return 1
    with open(argv[0]) as fh:
        try:
            num_vars, clauses = parse_dimacs(fh.read())
        except ValueError as exc:
            print(f"c {exc}", file=sys.stderr)
            return 1
    status, model, _ = solve_clauses(num_vars, clauses)
    if status is None:
        print("s UNKNOWN")
        return 0
    if not status:
        print("s UNSATISFIABLE")
        return 20
    print("s SATISFIABLE")
    print("v " + " ".join(map(str, model)) + " 0")
    return 10


if __name__ == "__main__":
    sys.exit(main())
