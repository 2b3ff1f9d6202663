import pytest

from mapfc import Instance


def path_graph(n, agents):
    names = [f"v{i}" for i in range(1, n + 1)]
    edges = [(names[i], names[i + 1]) for i in range(n - 1)]
    return Instance.build(names, edges, agents)


def star(agents):
    return Instance.build(["c", "l1", "l2", "l3"], [("c", "l1"), ("c", "l2"), ("c", "l3")], agents)


def cycle4(agents):
    names = ["v1", "v2", "v3", "v4"]
    return Instance.build(names, [("v1", "v2"), ("v2", "v3"), ("v3", "v4"), ("v4", "v1")], agents)


# the four hand fixtures
I1 = path_graph(3, [("v1", "v3")])
I2 = path_graph(3, [("v1", "v3"), ("v3", "v1")])
I3 = star([("l1", "l2"), ("l2", "l1")])
I4 = cycle4([("v1", "v2"), ("v2", "v1")])


@pytest.fixture
def fixtures():
    return {"I1": I1, "I2": I2, "I3": I3, "I4": I4}


# one line per acceptance criterion, printed after the run
CRITERIA: dict[int, str] = {}


def report_criterion(n, ok, detail=""):
    line = f"criterion {n}: {'PASS' if ok else 'FAIL'}" + (f"  {detail}" if detail else "")
    CRITERIA[n] = line
    print(line)
    return ok


def pytest_terminal_summary(terminalreporter):
    if CRITERIA:
        terminalreporter.section("acceptance criteria")
        for n in sorted(CRITERIA):
            terminalreporter.write_line(CRITERIA[n])
