# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
# distutils: language = c++
"""Compiled CDCL kernel; same interface and search as ``_pysolver``.

The variable order uses an indexed binary heap instead of a lazy one.
"""
from libcpp.vector cimport vector


cdef int luby(int i):
    cdef int size = 1, seq = 0, x
    while size < i + 1:
        seq += 1
        size = 2 * size + 1
    x = i
    while size - 1 != x:
        size = (size - 1) >> 1
        seq -= 1
        x = x % size
    return 1 << seq


cdef class _Solver:
    cdef int n
    cdef vector[signed char] value
    cdef vector[int] level, reason, trail, trail_lim, heap, heap_pos
    cdef vector[double] activity
    cdef vector[char] phase, seen
    cdef vector[vector[int]] watches, db
    cdef size_t qhead
    cdef double var_inc
    cdef public long decisions, conflicts, propagations, restarts

    def __cinit__(self, int n):
        cdef int v
        self.n = n
        self.value.assign(2 * n, 0)
        self.level.assign(n, 0)
        self.reason.assign(n, -1)
        self.activity.assign(n, 0.0)
        self.phase.assign(n, 1)
        self.seen.assign(n, 0)
        self.watches.resize(2 * n)
        self.heap_pos.assign(n, -1)
        for v in range(n):
            self.heap_insert(v)
        self.qhead = 0
        self.var_inc = 1.0

    # indexed max-heap on activity
    cdef inline void heap_up(self, int i):
        cdef int v = self.heap[i], p
        while i > 0:
            p = (i - 1) >> 1
            if self.activity[self.heap[p]] >= self.activity[v]:
                break
            self.heap[i] = self.heap[p]
            self.heap_pos[self.heap[i]] = i
            i = p
        self.heap[i] = v
        self.heap_pos[v] = i

    cdef inline void heap_down(self, int i):
        cdef int v = self.heap[i], c, size = self.heap.size()
        while 2 * i + 1 < size:
            c = 2 * i + 1
            if c + 1 < size and self.activity[self.heap[c + 1]] > self.activity[self.heap[c]]:
                c += 1
            if self.activity[self.heap[c]] <= self.activity[v]:
                break
            self.heap[i] = self.heap[c]
            self.heap_pos[self.heap[i]] = i
            i = c
        self.heap[i] = v
        self.heap_pos[v] = i

    cdef inline void heap_insert(self, int v):
        if self.heap_pos[v] >= 0:
            return
        self.heap.push_back(v)
        self.heap_pos[v] = self.heap.size() - 1
        self.heap_up(self.heap.size() - 1)

    cdef inline int heap_pop(self):
        cdef int v = self.heap[0], last = self.heap.back()
        self.heap.pop_back()
        self.heap_pos[v] = -1
        if self.heap.size() > 0:
            self.heap[0] = last
            self.heap_pos[last] = 0
            self.heap_down(0)
        return v

    cdef inline void bump(self, int v):
        cdef int u
        self.activity[v] += self.var_inc
        if self.activity[v] > 1e100:
            for u in range(self.n):
                self.activity[u] *= 1e-100
            self.var_inc *= 1e-100
        if self.heap_pos[v] >= 0:
            self.heap_up(self.heap_pos[v])

    cdef inline void enqueue(self, int lit, int why):
        cdef int v = lit >> 1
        self.value[lit] = 1
        self.value[lit ^ 1] = -1
        self.level[v] = self.trail_lim.size()
        self.reason[v] = why
        self.trail.push_back(lit)

    cdef void attach(self, vector[int]& lits):
        cdef int ci = self.db.size()
        self.db.push_back(lits)
        self.watches[lits[0]].push_back(ci)
        self.watches[lits[1]].push_back(ci)

    cdef int propagate(self):
        cdef int p, false_lit, ci, first, tmp
        cdef size_t i, j, end, k
        cdef bint found
        cdef vector[int]* ws
        cdef vector[int]* c
        while self.qhead < self.trail.size():
            p = self.trail[self.qhead]
            self.qhead += 1
            self.propagations += 1
            false_lit = p ^ 1
            ws = &self.watches[false_lit]
            i = 0
            j = 0
            end = ws.size()
            while i < end:
                ci = ws[0][i]
                i += 1
                c = &self.db[ci]
                if c[0][0] == false_lit:
                    c[0][0] = c[0][1]
                    c[0][1] = false_lit
                first = c[0][0]
                if self.value[first] == 1:
                    ws[0][j] = ci
                    j += 1
                    continue
                found = False
                for k in range(2, c.size()):
                    if self.value[c[0][k]] != -1:
                        tmp = c[0][k]
                        c[0][1] = tmp
                        c[0][k] = false_lit
                        self.watches[tmp].push_back(ci)
                        found = True
                        break
                if found:
                    continue
                ws[0][j] = ci
                j += 1
                if self.value[first] == -1:
                    while i < end:
                        ws[0][j] = ws[0][i]
                        j += 1
                        i += 1
                    ws.resize(j)
                    self.qhead = self.trail.size()
                    return ci
                self.enqueue(first, ci)
            ws.resize(j)
        return -1

    cdef void cancel_until(self, int lvl):
        cdef int idx, lit, v, stop
        if <int>self.trail_lim.size() <= lvl:
            return
        stop = self.trail_lim[lvl]
        idx = self.trail.size() - 1
        while idx >= stop:
            lit = self.trail[idx]
            v = lit >> 1
            self.value[lit] = 0
            self.value[lit ^ 1] = 0
            self.reason[v] = -1
            self.phase[v] = lit & 1
            self.heap_insert(v)
            idx -= 1
        self.trail.resize(stop)
        self.trail_lim.resize(lvl)
        self.qhead = self.trail.size()

    cdef int analyze(self, int confl, vector[int]& out):
        cdef vector[int] learnt
        cdef int counter = 0, p = -1, idx = self.trail.size() - 1
        cdef int cur = self.trail_lim.size(), q, v, start, r, x, best, tmp
        cdef size_t a, pos
        cdef bint redundant
        cdef vector[int]* c
        learnt.push_back(0)
        while True:
            c = &self.db[confl]
            start = 0 if p < 0 else 1
            for a in range(start, c.size()):
                q = c[0][a]
                v = q >> 1
                if not self.seen[v] and self.level[v] > 0:
                    self.seen[v] = 1
                    self.bump(v)
                    if self.level[v] >= cur:
                        counter += 1
                    else:
                        learnt.push_back(q)
            while not self.seen[self.trail[idx] >> 1]:
                idx -= 1
            p = self.trail[idx]
            v = p >> 1
            confl = self.reason[v]
            self.seen[v] = 0
            counter -= 1
            idx -= 1
            if counter == 0:
                break
            c = &self.db[confl]
            if c[0][0] != p:
                for pos in range(c.size()):
                    if c[0][pos] == p:
                        c[0][pos] = c[0][0]
                        c[0][0] = p
                        break
        learnt[0] = p ^ 1
        # seen[] marks exactly the lower-level literals now; reuse it
        out.clear()
        out.push_back(learnt[0])
        for a in range(1, learnt.size()):
            q = learnt[a]
            r = self.reason[q >> 1]
            redundant = r >= 0
            if redundant:
                c = &self.db[r]
                for pos in range(c.size()):
                    x = c[0][pos]
                    if x != (q ^ 1) and not self.seen[x >> 1] and self.level[x >> 1] > 0:
                        redundant = False
                        break
            if not redundant:
                out.push_back(q)
        for a in range(1, learnt.size()):
            self.seen[learnt[a] >> 1] = 0
        if out.size() == 1:
            return 0
        best = 1
        for a in range(2, out.size()):
            if self.level[out[a] >> 1] > self.level[out[best] >> 1]:
                best = a
        tmp = out[1]
        out[1] = out[best]
        out[best] = tmp
        return self.level[out[1] >> 1]

    cdef int search(self, long conflict_limit):
        cdef int confl, back, v, restart_idx = 0
        cdef long budget = 100 * luby(0), since = 0
        cdef vector[int] learnt
        if self.propagate() >= 0:
            return 0
        while True:
            confl = self.propagate()
            if confl >= 0:
                self.conflicts += 1
                since += 1
                if self.trail_lim.size() == 0:
                    return 0
                if 0 <= conflict_limit <= self.conflicts:
                    return -1
                back = self.analyze(confl, learnt)
                self.cancel_until(back)
                if learnt.size() == 1:
                    self.enqueue(learnt[0], -1)
                else:
                    self.attach(learnt)
                    self.enqueue(learnt[0], self.db.size() - 1)
                self.var_inc *= 1.0 / 0.95
                continue
            if since >= budget:
                self.restarts += 1
                restart_idx += 1
                budget = 100 * luby(restart_idx)
                since = 0
                self.cancel_until(0)
                continue
            v = -1
            while self.heap.size() > 0:
                v = self.heap_pop()
                if self.value[2 * v] == 0:
                    break
                v = -1
            if v < 0:
                return 1
            self.decisions += 1
            self.trail_lim.push_back(self.trail.size())
            self.enqueue(2 * v + self.phase[v], -1)


def solve(int num_vars, clauses, long conflict_limit=-1):
    """Decide satisfiability; see ``mapfc.sat._pysolver.solve``."""
    cdef _Solver s = _Solver(num_vars)
    cdef vector[int] lits
    cdef vector[int] units
    cdef int x, v, lit, u
    cdef bint taut
    stats = {"decisions": 0, "conflicts": 0, "propagations": 0, "restarts": 0}
    for raw in clauses:
        lits.clear()
        taut = False
        seen = set()
        for x in raw:
            if x == 0:
                raise ValueError("literal 0 inside clause")
            v = abs(x) - 1
            if v >= num_vars:
                raise ValueError(f"literal {x} exceeds variable count {num_vars}")
            lit = 2 * v + (x < 0)
            if (lit ^ 1) in seen:
                taut = True
                break
            if lit not in seen:
                seen.add(lit)
                lits.push_back(lit)
        if taut:
            continue
        if lits.size() == 0:
            return False, None, stats
        if lits.size() == 1:
            units.push_back(lits[0])
            continue
        s.attach(lits)
    for u in range(units.size()):
        lit = units[u]
        if s.value[lit] == -1:
            return False, None, stats
        if s.value[lit] == 0:
            s.enqueue(lit, -1)
    status = s.search(conflict_limit)
    stats.update(decisions=s.decisions, conflicts=s.conflicts,
                 propagations=s.propagations, restarts=s.restarts)
    if status == 0:
        return False, None, stats
    if status < 0:
        return None, None, stats
    model = [(v + 1) if s.value[2 * v] == 1 else -(v + 1) for v in range(num_vars)]
    return True, model, stats
