# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled time-expanded shortest path used by column pricing."""
import numpy as np
cimport numpy as cnp

cnp.import_array()


def dp(int n, int[::1] offsets, int[::1] targets, int horizon, int first, int last, int start, int goal,
       double step_cost, double[:, ::1] vpen, double[:, ::1] epen, unsigned char[:, ::1] allowed):
    """See ``mapfc._pricing_py.dp``."""
    cdef double inf = float("inf")
    cdef cnp.ndarray[double, ndim=2] best_a = np.full((horizon + 1, n), inf)
    cdef cnp.ndarray[int, ndim=2] par_a = np.full((horizon + 1, n), -1, dtype=np.intc)
    cdef double[:, ::1] best = best_a
    cdef int[:, ::1] par = par_a
    cdef int t, u, v, a, arr
    cdef double cu, c, val, tail, choice_val = inf
    cdef int choice = -1
    if not allowed[0, start]:
        return None
    best[0, start] = vpen[0, start]
    for t in range(horizon):
        for u in range(n):
            cu = best[t, u]
            if cu == inf:
                continue
            # waiting first, then the neighbours in order
            for a in range(offsets[u] - 1, offsets[u + 1]):
                if a < offsets[u]:
                    v = u
                else:
                    v = targets[a]
                if not allowed[t + 1, v]:
                    continue
                c = cu + step_cost + vpen[t + 1, v]
                if v != u:
                    c += epen[t, a]
                if c < best[t + 1, v] - 1e-12 or (abs(c - best[t + 1, v]) <= 1e-12 and u < par[t + 1, v]):
                    best[t + 1, v] = c
                    par[t + 1, v] = u
    # tail[t] = penalties for sitting on the goal from t to the horizon
    tails = np.zeros(horizon + 2)
    oks = np.ones(horizon + 2, dtype=np.uint8)
    cdef double[::1] tl = tails
    cdef unsigned char[::1] ok = oks
    for t in range(horizon, -1, -1):
        tl[t] = tl[t + 1] + vpen[t, goal]
        ok[t] = ok[t + 1] and allowed[t, goal]
    # each walk is charged at its exact final arrival: entering the goal at arr
    # from a neighbour and staying for good
    cdef int entry, choice_entry = -1
    for arr in range(max(first, 0), min(horizon, last) + 1):
        if not ok[arr]:
            continue
        if arr == 0:
            if start != goal:
                continue
            val = best[0, goal]
            entry = -1
        else:
            val = inf
            entry = -1
            for a in range(offsets[goal], offsets[goal + 1]):
                u = targets[a]
                cu = best[arr - 1, u]
                if cu == inf:
                    continue
                c = cu + step_cost + epen[arr - 1, a]
                if c < val - 1e-12:
                    val = c
                    entry = u
            if entry < 0:
                continue
            val += vpen[arr, goal]
        val += tl[arr + 1]
        if choice < 0 or val < choice_val - 1e-12:
            choice_val = val
            choice = arr
            choice_entry = entry
    if choice < 0:
        return None
    path = [goal]
    if choice > 0:
        v = choice_entry
        path.append(v)
        for t in range(choice - 1, 0, -1):
            v = par[t, v]
            path.append(v)
    path.reverse()
    return choice_val, tuple(path)


def pair_dp(int n, int[::1] offsets, int[::1] targets, int horizon, int s0, int g0, int s1, int g1,
            unsigned char[:, ::1] allowed0, unsigned char[:, ::1] allowed1,
            unsigned char[::1] settle0, unsigned char[::1] settle1):
    """See ``mapfc._pricing_py.pair_dp``."""
    cdef int big = 1 << 30
    cdef cnp.ndarray[int, ndim=3] cur_a = np.full((4, n, n), big, dtype=np.intc)
    cdef cnp.ndarray[int, ndim=3] nxt_a = np.full((4, n, n), big, dtype=np.intc)
    cdef int[:, :, ::1] cur = cur_a
    cdef int[:, :, ::1] nxt = nxt_a
    cdef int[:, :, ::1] tmp
    cdef int t, f, fa, fb, u, v, u2, v2, a, b, c, inc, lo_a, hi_a, lo_b, hi_b
    cdef bint alive
    if s0 == s1 or not allowed0[0, s0] or not allowed1[0, s1]:
        return -1
    cur[0, s0, s1] = 0
    for t in range(horizon + 1):
        # settling: flag bit 1 for agent 0, bit 2 for agent 1
        if settle0[t]:
            for f in (0, 2):
                for v in range(n):
                    if cur[f, g0, v] < cur[f | 1, g0, v]:
                        cur[f | 1, g0, v] = cur[f, g0, v]
        if settle1[t]:
            for f in (0, 1):
                for u in range(n):
                    if cur[f, u, g1] < cur[f | 2, u, g1]:
                        cur[f | 2, u, g1] = cur[f, u, g1]
        if t == horizon:
            break
        nxt[:, :, :] = big
        alive = False
        for f in range(4):
            fa = f & 1
            fb = (f >> 1) & 1
            inc = 2 - fa - fb
            for u in range(n):
                for v in range(n):
                    c = cur[f, u, v]
                    if c >= big:
                        continue
                    # arc index offsets[u] - 1 stands for waiting
                    lo_a = offsets[u] - 1
                    hi_a = lo_a + 1 if fa else offsets[u + 1]
                    lo_b = offsets[v] - 1
                    hi_b = lo_b + 1 if fb else offsets[v + 1]
                    for a in range(lo_a, hi_a):
                        u2 = u if a < offsets[u] else targets[a]
                        if not allowed0[t + 1, u2]:
                            continue
                        for b in range(lo_b, hi_b):
                            v2 = v if b < offsets[v] else targets[b]
                            if not allowed1[t + 1, v2] or u2 == v2 or (u2 == v and v2 == u):
                                continue
                            if c + inc < nxt[f, u2, v2]:
                                nxt[f, u2, v2] = c + inc
                                alive = True
        if not alive:
            return -1
        tmp = cur
        cur = nxt
        nxt = tmp
    c = cur[3, g0, g1]
    return -1 if c >= big else c
