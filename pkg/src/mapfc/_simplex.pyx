# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled tableau pivoting for ``mapfc.simplex``.

Mirrors ``_Tableau.pivot`` and ``_Tableau.run`` operation by operation so
that both kernels follow the same pivot sequence.
"""
from libc.math cimport fabs, fmax


cdef void _pivot(double[:, ::1] T, int[::1] basis, int r, int j) noexcept nogil:
    cdef Py_ssize_t rows = T.shape[0], cols = T.shape[1], i, c
    cdef double p = T[r, j], f, x
    for c in range(cols):
        T[r, c] = T[r, c] / p
    for i in range(rows):
        if i == r:
            continue
        f = T[i, j]
        if f == 0.0:
            continue
        for c in range(cols):
            x = T[i, c] - f * T[r, c]
            if fabs(x) < 1e-14:
                x = 0.0
            T[i, c] = x
    basis[r] = j


def pivot(double[:, ::1] T, int[::1] basis, int r, int j):
    _pivot(T, basis, r, j)


def run(double[:, ::1] T, int[::1] basis, unsigned char[::1] eligible, long iterations,
        long bland_after, long hard_cap, double opt_tol, double pivot_tol, double feas_tol):
    """Returns ``(status, iterations)``; status 0 optimal, 1 unbounded, 2 tiny pivot, 3 pivot limit."""
    cdef Py_ssize_t m = T.shape[0] - 1, ncols = T.shape[1] - 1, j, i, r, best_j, tie
    cdef double red, best_red, ratio, best_ratio
    cdef bint bland
    cdef int status = 0
    with nogil:
        while True:
            bland = iterations >= bland_after
            best_j = -1
            best_red = 0.0
            for j in range(ncols):
                if not eligible[j]:
                    continue
                red = T[m, j]
                if red < -opt_tol:
                    if bland:
                        best_j = j
                        break
                    if best_j < 0 or red < best_red:
                        best_j = j
                        best_red = red
            if best_j < 0:
                status = 0
                break
            j = best_j
            best_ratio = 0.0
            r = -1
            for i in range(m):
                if T[i, j] > pivot_tol:
                    # round-off can leave a degenerate rhs slightly negative
                    ratio = fmax(T[i, ncols], 0.0) / T[i, j]
                    if r < 0 or ratio < best_ratio:
                        best_ratio = ratio
                        r = i
            if r < 0:
                status = 1
                break
            # ties within feas_tol: smallest basic index under Bland's rule,
            # otherwise the largest pivot element
            tie = -1
            for i in range(m):
                if T[i, j] > pivot_tol and fmax(T[i, ncols], 0.0) / T[i, j] <= best_ratio + feas_tol:
                    if tie < 0:
                        tie = i
                    elif bland:
                        if basis[i] < basis[tie]:
                            tie = i
                    elif T[i, j] > T[tie, j]:
                        tie = i
            r = tie
            if fabs(T[r, j]) < pivot_tol:
                status = 2
                break
            _pivot(T, basis, r, j)
            iterations += 1
            if iterations > hard_cap:
                status = 3
                break
    return status, iterations
