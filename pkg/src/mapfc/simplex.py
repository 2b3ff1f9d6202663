"""Dense two-phase primal simplex with dual extraction.

Solves ``min c.x  s.t.  A_i.x (<=|>=|=) b_i,  x >= 0``. Pricing is Dantzig's
rule until ``3 * (rows + cols)`` pivots have been made, then Bland's rule.
"""
from __future__ import annotations

import os
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .model import MapfError

try:
    if os.environ.get("MAPFC_PURE"):
        raise ImportError("pure mode requested")
    from . import _simplex as _native
except ImportError:  # pragma: no cover - depends on the build
    _native = None

KERNEL = "cython" if _native is not None else "python"

FEAS_TOL = 1e-9
OPT_TOL = 1e-7
PIVOT_TOL = 1e-9

SENSES = ("<=", ">=", "=")


class NumericalBreakdown(MapfError):
    pass


@dataclass
class LinearProgram:
    c: Sequence[float]
    A: Sequence[Sequence[float]] = ()
    senses: Sequence[str] = ()
    b: Sequence[float] = ()
    names: Sequence[str] | None = None

    def __post_init__(self):
        n = len(self.c)
        if not (len(self.A) == len(self.senses) == len(self.b)):
            raise ValueError("A, senses and b must have one entry per row")
        if isinstance(self.A, np.ndarray):
            if self.A.size and self.A.shape[1] != n:
                raise ValueError("row length differs from the number of variables")
        else:
            for row in self.A:
                if len(row) != n:
                    raise ValueError("row length differs from the number of variables")
        for s in self.senses:
            if s not in SENSES:
                raise ValueError(f"unknown row sense {s!r}")
        if not (np.all(np.isfinite(np.asarray(self.c, float)))
                and np.all(np.isfinite(np.asarray(self.A, float)))
                and np.all(np.isfinite(np.asarray(self.b, float)))):
            raise ValueError("coefficients must be finite")

    @property
    def shape(self) -> tuple[int, int]:
        return len(self.b), len(self.c)

    def to_text(self) -> str:
        """CPLEX-LP-like dump for debugging."""
        m, n = self.shape
        names = list(self.names) if self.names is not None else [f"x{j}" for j in range(n)]

        def expr(coefs):
            terms = [f"{'+' if v >= 0 else '-'} {abs(v):g} {names[j]}" for j, v in enumerate(coefs) if v != 0]
            return " ".join(terms) if terms else "0"

        lines = ["Minimize", f" obj: {expr(self.c)}", "Subject To"]
        for i in range(m):
            lines.append(f" r{i}: {expr(self.A[i])} {self.senses[i]} {self.b[i]:g}")
        lines.append("Bounds")
        lines += [f" {name} >= 0" for name in names]
        lines.append("End")
        return "\n".join(lines) + "\n"


@dataclass
class LpSolution:
    status: str  # "optimal", "infeasible" or "unbounded"
    x: np.ndarray | None = None
    y: np.ndarray | None = None
    objective: float | None = None
    iterations: int = 0
    basis: list[int] = field(default_factory=list)


class _Tableau:
    def __init__(self, T: np.ndarray, basis: list[int], eligible: np.ndarray, native=None):
        self.T = T
        self.basis = basis
        self.eligible = eligible
        self.iterations = 0
        self.native = native

    def pivot(self, r: int, j: int):
        if self.native is not None:
            b = np.array(self.basis, dtype=np.intc)
            self.native.pivot(self.T, b, r, j)
            self.basis[:] = b.tolist()
            self.iterations += 1
            return
        T = self.T
        T[r] /= T[r, j]
        col = T[:, j].copy()
        col[r] = 0.0
        rows = np.nonzero(col)[0]
        if rows.size:
            block = T[rows] - np.outer(col[rows], T[r])
            block[np.abs(block) < 1e-14] = 0.0
            T[rows] = block
        self.basis[r] = j
        self.iterations += 1

    def run(self, bland_after: int) -> str:
        T = self.T
        m = T.shape[0] - 1
        hard_cap = 50 * T.shape[1] * max(m, 1) + 1000
        if self.native is not None:
            b = np.array(self.basis, dtype=np.intc)
            code, self.iterations = self.native.run(
                T, b, self.eligible.astype(np.uint8), self.iterations, bland_after, hard_cap,
                OPT_TOL, PIVOT_TOL, FEAS_TOL)
            self.basis[:] = b.tolist()
            if code == 2:
                raise NumericalBreakdown("pivot below tolerance")
            if code == 3:
                raise NumericalBreakdown("pivot limit exceeded under Bland's rule")
            return "optimal" if code == 0 else "unbounded"
        while True:
            red = T[-1, :-1]
            cand = np.where(self.eligible & (red < -OPT_TOL))[0]
            if cand.size == 0:
                return "optimal"
            bland = self.iterations >= bland_after
            j = int(cand[0]) if bland else int(cand[np.argmin(red[cand])])
            col = T[:m, j]
            rows = np.where(col > PIVOT_TOL)[0]
            if rows.size == 0:
                return "unbounded"
            # round-off can leave a degenerate rhs slightly negative
            ratios = np.maximum(T[rows, -1], 0.0) / col[rows]
            best = ratios.min()
            ties = rows[ratios <= best + FEAS_TOL]
            if bland:
                # smallest basic index on ties (Bland's leaving rule)
                r = int(min(ties, key=lambda i: self.basis[i]))
            else:
                # largest pivot element, which keeps round-off in check
                r = int(ties[np.argmax(col[ties])])
            if abs(T[r, j]) < PIVOT_TOL:
                raise NumericalBreakdown(f"pivot {T[r, j]:.3g} below tolerance")
            self.pivot(r, j)
            if self.iterations > hard_cap:
                raise NumericalBreakdown("pivot limit exceeded under Bland's rule")


def solve_lp(lp: LinearProgram, *, impl: str | None = None) -> LpSolution:
    """Two-phase simplex; ``impl`` picks the pivoting kernel ("cython"/"python")."""
    if impl is None:
        impl = KERNEL
    if impl == "cython" and _native is None:
        raise ImportError("compiled simplex kernel is not available")
    native = _native if impl == "cython" else None
    m, n = lp.shape
    c = np.array(lp.c, dtype=float)
    A = np.array(lp.A, dtype=float).reshape(m, n)
    b = np.array(lp.b, dtype=float).reshape(m)
    senses = list(lp.senses)
    neg = b < 0
    flip = np.where(neg, -1.0, 1.0)
    if neg.any():
        A[neg] = -A[neg]
        b[neg] = -b[neg]
        for i in np.nonzero(neg)[0]:
            senses[i] = {"<=": ">=", ">=": "<=", "=": "="}[senses[i]]

    n_slack = sum(1 for s in senses if s != "=")
    n_art = sum(1 for s in senses if s != "<=")
    N = n + n_slack + n_art
    T = np.zeros((m + 1, N + 1))
    T[:m, :n] = A
    T[:m, -1] = b
    basis = [0] * m
    unit_col = [0] * m  # column that starts as e_i, for reading B^-1
    is_art = np.zeros(N, dtype=bool)
    s_col, a_col = n, n + n_slack
    for i, s in enumerate(senses):
        if s == "<=":
            T[i, s_col] = 1.0
            basis[i] = unit_col[i] = s_col
            s_col += 1
        else:
            if s == ">=":
                T[i, s_col] = -1.0
                s_col += 1
            T[i, a_col] = 1.0
            is_art[a_col] = True
            basis[i] = unit_col[i] = a_col
            a_col += 1

    bland_after = 3 * (m + N)
    tab = _Tableau(T, basis, np.ones(N, dtype=bool), native)
    if n_art:
        T[-1, :] = 0.0
        T[-1, :N][is_art] = 1.0
        T[-1] -= T[:m][is_art[basis]].sum(axis=0)
        tab.run(bland_after)
        if -T[-1, -1] > FEAS_TOL * max(1.0, float(np.abs(b).max(initial=0.0))):
            return LpSolution("infeasible", iterations=tab.iterations)
        for r in range(m):
            if is_art[tab.basis[r]]:
                nz = np.where(~is_art & (np.abs(T[r, :N]) > 1e-9))[0]
                if nz.size:
                    tab.pivot(r, int(nz[0]))
        tab.eligible = ~is_art

    cost = np.zeros(N)
    cost[:n] = c
    T[-1, :] = 0.0
    T[-1, :N] = cost
    if m:
        T[-1] -= cost[tab.basis] @ T[:m]
    status = tab.run(bland_after)
    if status == "unbounded":
        return LpSolution("unbounded", iterations=tab.iterations)

    x_full = np.zeros(N)
    x_full[tab.basis] = T[:m, -1]
    x = np.clip(x_full[:n], 0.0, None)
    cB = cost[tab.basis] if m else np.zeros(0)
    y = (cB @ T[:m, unit_col] if m else np.zeros(0)) * flip
    return LpSolution("optimal", x, y, float(c @ x), tab.iterations, list(tab.basis))
