"""Pure-Python time-expanded shortest path (fallback for ``_pricing``)."""
from __future__ import annotations

INF = float("inf")


def dp(n, offsets, targets, horizon, first, last, start, goal, step_cost, vpen, epen, allowed):
    """Cheapest walk from ``start`` that sits on ``goal`` from its arrival on.

    ``offsets``/``targets`` hold the adjacency in CSR form; ``vpen[t][v]`` and
    ``epen[t][a]`` are penalties for occupying v at t and for using arc a
    between t and t + 1; ``allowed[t][v]`` masks the time-expanded graph.
    Arrival must lie in ``[first, last]``. Returns ``(value, path)`` or None.
    """
    vpen = [list(map(float, row)) for row in vpen]
    epen = [list(map(float, row)) for row in epen]
    allowed = [list(map(bool, row)) for row in allowed]
    offsets = list(offsets)
    targets = list(targets)
    if not allowed[0][start]:
        return None
    best = [INF] * n
    best[start] = vpen[0][start]
    layers = [best]
    parents = [[-1] * n]
    for t in range(horizon):
        prev = layers[-1]
        nxt = [INF] * n
        par = [-1] * n
        ok = allowed[t + 1]
        vp = vpen[t + 1]
        ep = epen[t]
        for u in range(n):
            cu = prev[u]
            if cu == INF:
                continue
            for a in range(offsets[u] - 1, offsets[u + 1]):
                v = u if a < offsets[u] else targets[a]
                if not ok[v]:
                    continue
                c = cu + step_cost + vp[v]
                if v != u:
                    c += ep[a]
                if c < nxt[v] - 1e-12:
                    nxt[v] = c
                    par[v] = u
        layers.append(nxt)
        parents.append(par)
    tail = [0.0] * (horizon + 2)
    tail_ok = [True] * (horizon + 2)
    for t in range(horizon, -1, -1):
        tail[t] = tail[t + 1] + vpen[t][goal]
        tail_ok[t] = tail_ok[t + 1] and allowed[t][goal]
    # each walk is charged at its exact final arrival: entering the goal at arr
    # from a neighbour and staying for good
    choice = None
    for arr in range(max(first, 0), min(horizon, last) + 1):
        if not tail_ok[arr]:
            continue
        if arr == 0:
            if start != goal:
                continue
            val, entry = layers[0][goal], -1
        else:
            val, entry = INF, -1
            prev = layers[arr - 1]
            for a in range(offsets[goal], offsets[goal + 1]):
                u = targets[a]
                if prev[u] == INF:
                    continue
                c = prev[u] + step_cost + epen[arr - 1][a]
                if c < val - 1e-12:
                    val, entry = c, u
            if entry < 0:
                continue
            val += vpen[arr][goal]
        val += tail[arr + 1]
        if choice is None or val < choice[0] - 1e-12:
            choice = (val, arr, entry)
    if choice is None:
        return None
    val, arr, entry = choice
    path = [goal]
    if arr > 0:
        v = entry
        path.append(v)
        for t in range(arr - 1, 0, -1):
            v = parents[t][v]
            path.append(v)
    path.reverse()
    return val, tuple(path)


def pair_dp(n, offsets, targets, horizon, s0, g0, s1, g1, allowed0, allowed1, settle0, settle1):
    """Least joint cost of two agents, or -1.

    Layered min-plus recursion over joint positions and "settled" flags. An
    agent may settle on its goal at t when ``settle[t]``; it then stays there,
    and each unsettled agent pays one unit per step. Joint moves that meet on
    a vertex or swap along an edge are dropped.
    """
    import numpy as np

    offsets = np.asarray(offsets)
    targets = np.asarray(targets, dtype=np.intp)
    src = np.concatenate([np.arange(n), np.repeat(np.arange(n), np.diff(offsets))])
    dst = np.concatenate([np.arange(n), targets])
    allowed = (np.asarray(allowed0, dtype=bool), np.asarray(allowed1, dtype=bool))
    settle = (np.asarray(settle0, dtype=bool), np.asarray(settle1, dtype=bool))
    if s0 == s1 or not allowed[0][0, s0] or not allowed[1][0, s1]:
        return -1
    C = np.full((2, 2, n, n), INF)
    C[0, 0, s0, s1] = 0.0
    still = (np.array([g0]), np.array([g1]))
    for t in range(horizon + 1):
        if settle[0][t]:
            C[1, :, g0, :] = np.minimum(C[1, :, g0, :], C[0, :, g0, :])
        if settle[1][t]:
            C[:, 1, :, g1] = np.minimum(C[:, 1, :, g1], C[:, 0, :, g1])
        if t == horizon:
            break
        moves = []
        for ok in allowed:
            keep = ok[t + 1, dst]
            moves.append((src[keep], dst[keep]))
        nxt = np.full_like(C, INF)
        for fa in (0, 1):
            for fb in (0, 1):
                cur = C[fa, fb]
                if not np.isfinite(cur).any():
                    continue
                sa, da = (still[0], still[0]) if fa else moves[0]
                sb, db = (still[1], still[1]) if fb else moves[1]
                W = cur[np.ix_(sa, sb)] + (2 - fa - fb)
                W[da[:, None] == db[None, :]] = INF
                W[(da[:, None] == sb[None, :]) & (sa[:, None] == db[None, :])] = INF
                rows = np.broadcast_to(da[:, None], W.shape)
                cols = np.broadcast_to(db[None, :], W.shape)
                np.minimum.at(nxt[fa, fb], (rows, cols), W)
        C = nxt
        if not np.isfinite(C).any():
            return -1
    best = C[1, 1, g0, g1]
    return -1 if not np.isfinite(best) else int(round(best))
