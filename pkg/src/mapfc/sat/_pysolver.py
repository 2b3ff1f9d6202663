"""Pure-Python CDCL solver (fallback when the compiled kernel is missing).

Two watched literals, first-UIP learning, VSIDS with a lazy heap, phase
saving and Luby restarts. Literals are encoded as ``2*var + sign`` with
0-based variables.
"""
from __future__ import annotations

import heapq


def _luby(i: int) -> int:
    size, seq = 1, 0
    while size < i + 1:
        seq += 1
        size = 2 * size + 1
    x = i
    while size - 1 != x:
        size = (size - 1) >> 1
        seq -= 1
        x %= size
    return 1 << seq


def solve(num_vars: int, clauses, conflict_limit: int = -1):
    """Decide satisfiability.

    Returns ``(status, model, stats)`` where status is True/False, or None if
    ``conflict_limit`` was hit. ``model`` is a list of signed DIMACS literals.
    """
    n = num_vars
    value = [0] * (2 * n)  # per literal: 1 true, -1 false, 0 unassigned
    level = [0] * n
    reason = [-1] * n
    activity = [0.0] * n
    phase = [1] * n  # 1 -> try negative first
    watches: list[list[int]] = [[] for _ in range(2 * n)]
    db: list[list[int]] = []
    trail: list[int] = []
    trail_lim: list[int] = []
    stats = {"decisions": 0, "conflicts": 0, "propagations": 0, "restarts": 0}

    def enqueue(lit, why):
        value[lit] = 1
        value[lit ^ 1] = -1
        v = lit >> 1
        level[v] = len(trail_lim)
        reason[v] = why
        trail.append(lit)

    units = []
    for raw in clauses:
        seen = set()
        lits = []
        taut = False
        for x in raw:
            if x == 0:
                raise ValueError("literal 0 inside clause")
            v = abs(x) - 1
            if v >= n:
                raise ValueError(f"literal {x} exceeds variable count {n}")
            lit = 2 * v + (x < 0)
            if lit ^ 1 in seen:
                taut = True
                break
            if lit not in seen:
                seen.add(lit)
                lits.append(lit)
        if taut:
            continue
        if not lits:
            return False, None, stats
        if len(lits) == 1:
            units.append(lits[0])
            continue
        ci = len(db)
        db.append(lits)
        watches[lits[0]].append(ci)
        watches[lits[1]].append(ci)

    for lit in units:
        if value[lit] == -1:
            return False, None, stats
        if value[lit] == 0:
            enqueue(lit, -1)

    qhead = 0

    def propagate():
        nonlocal qhead
        while qhead < len(trail):
            p = trail[qhead]
            qhead += 1
            stats["propagations"] += 1
            false_lit = p ^ 1
            ws = watches[false_lit]
            i = j = 0
            end = len(ws)
            while i < end:
                ci = ws[i]
                i += 1
                c = db[ci]
                if c[0] == false_lit:
                    c[0], c[1] = c[1], c[0]
                first = c[0]
                if value[first] == 1:
                    ws[j] = ci
                    j += 1
                    continue
                for k in range(2, len(c)):
                    if value[c[k]] != -1:
                        c[1], c[k] = c[k], false_lit
                        watches[c[1]].append(ci)
                        break
                else:
                    ws[j] = ci
                    j += 1
                    if value[first] == -1:
                        while i < end:
                            ws[j] = ws[i]
                            j += 1
                            i += 1
                        del ws[j:]
                        qhead = len(trail)
                        return ci
                    enqueue(first, ci)
            del ws[j:]
        return -1

    heap = [(0.0, v) for v in range(n)]
    heapq.heapify(heap)
    var_inc = 1.0

    def bump(v):
        nonlocal var_inc
        activity[v] += var_inc
        if activity[v] > 1e100:
            for u in range(n):
                activity[u] *= 1e-100
            var_inc *= 1e-100
            heap[:] = [(-activity[u], u) for u in range(n) if value[2 * u] == 0]
            heapq.heapify(heap)
        elif value[2 * v] == 0:
            heapq.heappush(heap, (-activity[v], v))

    def cancel_until(lvl):
        nonlocal qhead
        if len(trail_lim) <= lvl:
            return
        stop = trail_lim[lvl]
        for idx in range(len(trail) - 1, stop - 1, -1):
            lit = trail[idx]
            v = lit >> 1
            value[lit] = 0
            value[lit ^ 1] = 0
            reason[v] = -1
            phase[v] = lit & 1
            heapq.heappush(heap, (-activity[v], v))
        del trail[stop:]
        del trail_lim[lvl:]
        qhead = len(trail)

    seen = [False] * n

    def analyze(confl):
        learnt = [0]
        counter = 0
        p = -1
        idx = len(trail) - 1
        cur = len(trail_lim)
        while True:
            c = db[confl]
            for q in (c if p < 0 else c[1:]):
                v = q >> 1
                if not seen[v] and level[v] > 0:
                    seen[v] = True
                    bump(v)
                    if level[v] >= cur:
                        counter += 1
                    else:
                        learnt.append(q)
            while not seen[trail[idx] >> 1]:
                idx -= 1
            p = trail[idx]
            v = p >> 1
            confl = reason[v]
            seen[v] = False
            counter -= 1
            idx -= 1
            if counter == 0:
                break
            # reason clauses keep the implied literal at position 0
            c = db[confl]
            if c[0] != p:
                pos = c.index(p)
                c[0], c[pos] = c[pos], c[0]
        learnt[0] = p ^ 1
        # drop literals implied by the rest of the clause
        keep = [learnt[0]]
        marked = {q >> 1 for q in learnt}
        for q in learnt[1:]:
            r = reason[q >> 1]
            if r < 0 or any((x >> 1) not in marked and level[x >> 1] > 0 for x in db[r] if x != q ^ 1):
                keep.append(q)
        for q in learnt[1:]:
            seen[q >> 1] = False
        if len(keep) == 1:
            return keep, 0
        best = max(range(1, len(keep)), key=lambda i: level[keep[i] >> 1])
        keep[1], keep[best] = keep[best], keep[1]
        return keep, level[keep[1] >> 1]

    if propagate() >= 0:
        return False, None, stats

    restart_idx = 0
    budget = 100 * _luby(restart_idx)
    since_restart = 0
    while True:
        confl = propagate()
        if confl >= 0:
            stats["conflicts"] += 1
            since_restart += 1
            if not trail_lim:
                return False, None, stats
            if 0 <= conflict_limit <= stats["conflicts"]:
                return None, None, stats
            learnt, back = analyze(confl)
            cancel_until(back)
            if len(learnt) == 1:
                enqueue(learnt[0], -1)
            else:
                ci = len(db)
                db.append(learnt)
                watches[learnt[0]].append(ci)
                watches[learnt[1]].append(ci)
                enqueue(learnt[0], ci)
            var_inc *= 1.0 / 0.95
            continue
        if since_restart >= budget:
            stats["restarts"] += 1
            restart_idx += 1
            budget = 100 * _luby(restart_idx)
            since_restart = 0
            cancel_until(0)
            continue
        v = -1
        while heap:
            _, u = heapq.heappop(heap)
            if value[2 * u] == 0:
                v = u
                break
        if v < 0:
            model = [(u + 1) if value[2 * u] == 1 else -(u + 1) for u in range(n)]
            return True, model, stats
        stats["decisions"] += 1
        trail_lim.append(len(trail))
        enqueue(2 * v + phase[v], -1)
