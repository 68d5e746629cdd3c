# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled twins of the numpy kernels in ``_kernels_py``.

moving_rms uses a Kahan-compensated rolling sum so the O(N) update does not
drift from the per-window sums the fallback computes.
"""

from libc.math cimport sqrt

import numpy as np

cimport numpy as cnp

cnp.import_array()

BACKEND_NAME = "compiled"


def moving_rms(samples, int window):
    """Root-mean-square over a trailing window, zero-padded before t=0.

    Kahan-compensated rolling sum. Exact-zero terms are skipped so they
    never perturb the compensation state: a delayed input then replays the
    identical update sequence, making the output exactly shift-equivariant.
    """
    if window < 1:
        raise ValueError("window must be >= 1")
    cdef cnp.ndarray[cnp.float64_t, ndim=1] x = np.ascontiguousarray(
        samples, dtype=np.float64
    )
    cdef Py_ssize_t n = x.shape[0]
    cdef cnp.ndarray[cnp.float64_t, ndim=1] out = np.empty(n, dtype=np.float64)
    if n == 0:
        return out
    cdef double acc = 0.0, comp = 0.0, term, y, t
    cdef double w = <double> window
    cdef Py_ssize_t i
    for i in range(n):
        term = x[i] * x[i]
        if term != 0.0:
            y = term - comp
            t = acc + y
            comp = (t - acc) - y
            acc = t
        if i >= window:
            term = x[i - window] * x[i - window]
            if term != 0.0:
                y = -term - comp
                t = acc + y
                comp = (t - acc) - y
                acc = t
        out[i] = sqrt((acc if acc > 0.0 else 0.0) / w)
    return out


def binary_runs(mask):
    """Maximal runs of ones in a 0/1 array as (starts, ends), end exclusive."""
    cdef cnp.ndarray[cnp.uint8_t, ndim=1] b = np.ascontiguousarray(
        mask, dtype=np.uint8
    )
    cdef Py_ssize_t n = b.shape[0]
    cdef list starts = []
    cdef list ends = []
    cdef Py_ssize_t i
    cdef bint inside = False
    for i in range(n):
        if b[i] and not inside:
            starts.append(i)
            inside = True
        elif not b[i] and inside:
            ends.append(i)
            inside = False
    if inside:
        ends.append(n)
    return (
        np.asarray(starts, dtype=np.int64),
        np.asarray(ends, dtype=np.int64),
    )


def merge_runs(starts, ends, long long max_gap, long long min_length):
    """Merge runs separated by a gap < max_gap, then drop runs < min_length."""
    cdef cnp.ndarray[cnp.int64_t, ndim=1] s = np.ascontiguousarray(
        starts, dtype=np.int64
    )
    cdef cnp.ndarray[cnp.int64_t, ndim=1] e = np.ascontiguousarray(
        ends, dtype=np.int64
    )
    cdef Py_ssize_t n = s.shape[0]
    if n == 0:
        return s.copy(), e.copy()
    cdef cnp.ndarray[cnp.int64_t, ndim=1] ms = np.empty(n, dtype=np.int64)
    cdef cnp.ndarray[cnp.int64_t, ndim=1] me = np.empty(n, dtype=np.int64)
    cdef Py_ssize_t count = 0, i
    ms[0] = s[0]
    me[0] = e[0]
    for i in range(1, n):
        if s[i] - me[count] < max_gap:
            me[count] = e[i]
        else:
            count += 1
            ms[count] = s[i]
            me[count] = e[i]
    count += 1
    cdef cnp.ndarray keep = (me[:count] - ms[:count]) >= min_length
    return ms[:count][keep], me[:count][keep]
