# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled batch kernels. Contract identical to ``_kernels_py``."""

import numpy as np
cimport numpy as cnp
from libc.stdlib cimport malloc, free
from libc.string cimport memset

cnp.import_array()

ctypedef cnp.float64_t f64
ctypedef cnp.int64_t i64


def sample_rows(const f64[:, ::1] P, const i64[::1] stable, const f64[::1] u):
    cdef Py_ssize_t n = P.shape[0], m = P.shape[1], i, j
    cdef f64 tot, acc, x
    out = np.empty(n, dtype=np.int64)
    cdef i64[::1] choices = out
    for i in range(n):
        if stable[i] >= 0:
            choices[i] = stable[i]
            continue
        tot = 0.0
        for j in range(m):
            tot += P[i, j]
        x = u[i] * tot
        acc = 0.0
        choices[i] = m - 1
        for j in range(m):
            acc += P[i, j]
            if acc > x:
                choices[i] = j
                break
    return out


cdef inline void _all_but(f64[:, ::1] rows, Py_ssize_t i, i64 r) noexcept nogil:
    cdef Py_ssize_t j, n = rows.shape[1]
    cdef f64 w = 1.0 / (n - 1)
    for j in range(n):
        rows[i, j] = w
    rows[i, r] = 0.0


def zero_known_rows(f64[:, ::1] rows, const i64[::1] starts, const i64[::1] lens,
                    const i64[::1] choices, const i64[::1] own, bint literal):
    cdef Py_ssize_t m = rows.shape[0], n = rows.shape[1], i, j, t
    cdef Py_ssize_t nkeep
    cdef f64 rem, total, removed, p, s
    if m == 0:
        return
    cdef unsigned char* visited = <unsigned char*> malloc(n)
    if visited == NULL:
        raise MemoryError()
    try:
        with nogil:
            for i in range(m):
                memset(visited, 0, n)
                for t in range(lens[i]):
                    visited[choices[(starts[i] + t) % n]] = 1
                nkeep = 0
                rem = 0.0
                total = 0.0
                for j in range(n):
                    total += rows[i, j]
                    if not visited[j]:
                        nkeep += 1
                        rem += rows[i, j]
                if nkeep == 0:
                    _all_but(rows, i, own[i])
                elif rem <= 0.0:
                    for j in range(n):
                        rows[i, j] = 0.0 if visited[j] else 1.0 / nkeep
                elif literal:
                    removed = total - rem
                    s = 0.0
                    for j in range(n):
                        if visited[j]:
                            rows[i, j] = 0.0
                        else:
                            p = rows[i, j]
                            rows[i, j] = p * (1.0 + removed * p / rem)
                            s += rows[i, j]
                    for j in range(n):
                        rows[i, j] = rows[i, j] / s
                else:
                    for j in range(n):
                        rows[i, j] = 0.0 if visited[j] else rows[i, j] / rem
    finally:
        free(visited)


def group_rows(f64[:, ::1] rows, const i64[::1] own, const i64[::1] served, i64 gsize, bint literal):
    cdef Py_ssize_t m = rows.shape[0], n = rows.shape[1], i, j, lo, hi, nidle
    cdef f64 P, Q, p, s
    with nogil:
        for i in range(m):
            lo = (own[i] // gsize) * gsize
            hi = lo + gsize
            if hi > n:
                hi = n
            P = 0.0
            Q = 0.0
            nidle = 0
            for j in range(lo, hi):
                if served[j] < 0:
                    Q += rows[i, j]
                    nidle += 1
                else:
                    P += rows[i, j]
            if nidle == 0:
                continue
            for j in range(lo, hi):
                if served[j] >= 0:
                    rows[i, j] = 0.0
                    continue
                p = rows[i, j]
                if literal:
                    rows[i, j] = p * (1.0 + P * p / Q) if Q > 0.0 else 1.0 / nidle
                elif Q > 0.0:
                    rows[i, j] = p * (1.0 + P / Q)
                else:
                    rows[i, j] = p + P / nidle
            if literal:
                s = 0.0
                for j in range(n):
                    s += rows[i, j]
                for j in range(n):
                    rows[i, j] = rows[i, j] / s


def info_rows(f64[:, ::1] rows, const i64[::1] own, const unsigned char[::1] reported, double pi, bint literal):
    cdef Py_ssize_t m = rows.shape[0], n = rows.shape[1], i, j
    cdef Py_ssize_t nrep = 0
    cdef i64 r
    cdef f64 p_own, rest, total, mass, p, rm, bl, s, scale
    cdef bint degenerate
    for j in range(n):
        if reported[j]:
            nrep += 1
    with nogil:
        for i in range(m):
            r = own[i]
            p_own = rows[i, r]
            total = 0.0
            mass = 0.0
            for j in range(n):
                total += rows[i, j]
                if reported[j]:
                    mass += rows[i, j]
            rest = (1.0 - p_own) if literal else (total - p_own)
            degenerate = rest <= 0.0 or p_own >= 1.0
            if literal and not degenerate:
                scale = 1.0 + p_own / (1.0 - p_own)
            s = 0.0
            for j in range(n):
                p = rows[i, j]
                if j == r:
                    rm = 0.0
                elif degenerate:
                    rm = 1.0 / (n - 1)
                elif literal:
                    rm = p * scale
                else:
                    rm = p / rest
                if nrep == 0:
                    bl = rm
                elif not reported[j]:
                    bl = 0.0
                elif mass > 0.0:
                    bl = p / mass
                else:
                    bl = 1.0 / nrep
                rows[i, j] = pi * bl + (1.0 - pi) * rm
                s += rows[i, j]
            for j in range(n):
                rows[i, j] = rows[i, j] / s
