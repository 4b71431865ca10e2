#cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled sampling kernels, stream-compatible with irgtail._purepy.

The draw protocol (order and count of uniform/Poisson consumption from the
caller's Generator) is documented in _purepy and frozen by
tests/test_backend.py; both backends must change together or not at all.
"""

import numpy as np

cimport numpy as cnp
from cpython.pycapsule cimport PyCapsule_GetPointer
from libc.math cimport floor, log, log1p
from numpy.random cimport bitgen_t
from numpy.random.c_distributions cimport random_poisson, random_standard_uniform

cnp.import_array()


cdef inline Py_ssize_t _upper_bound(const double* a, Py_ssize_t n, double x) noexcept nogil:
    # index of the first element strictly greater than x, as
    # np.searchsorted(a, x, side="right")
    cdef Py_ssize_t lo = 0, hi = n, mid
    while lo < hi:
        mid = (lo + hi) >> 1
        if a[mid] <= x:
            lo = mid + 1
        else:
            hi = mid
    return lo


cdef bitgen_t* _bitgen(object rng):
    return <bitgen_t*> PyCapsule_GetPointer(rng.bit_generator.capsule, "BitGenerator")


def nr_sample(object rng, double[::1] w, double[::1] cumw, double L,
              double nonloop_rate, double[::1] loop_rates,
              bint want_edges, long retry_cap):
    """Mirror of _purepy.nr_sample; see that docstring for the contract."""
    cdef bitgen_t* bg = _bitgen(rng)
    cdef Py_ssize_t n = w.shape[0]
    cdef double w_cum_total = cumw[n - 1]
    cdef const double* cw = &cumw[0]
    cdef Py_ssize_t count, m, t, i
    cdef double u
    cdef long rounds = 0
    cdef cnp.int64_t[::1] ei, ej, loops, bad_view

    with rng.bit_generator.lock:
        count = <Py_ssize_t> random_poisson(bg, nonloop_rate)
        ei_arr = np.empty(count, dtype=np.int64)
        ej_arr = np.empty(count, dtype=np.int64)
        ei = ei_arr
        ej = ej_arr
        for m in range(count):
            u = random_standard_uniform(bg)
            ei[m] = _upper_bound(cw, n, u * w_cum_total)
            u = random_standard_uniform(bg)
            ej[m] = _upper_bound(cw, n, u * w_cum_total)
        bad_arr = np.flatnonzero(ei_arr == ej_arr)
        while bad_arr.size:
            rounds += 1
            if rounds > retry_cap:
                raise RuntimeError(f"pair collision redraws exceeded cap {retry_cap}")
            bad_view = bad_arr
            for t in range(bad_view.shape[0]):
                m = bad_view[t]
                u = random_standard_uniform(bg)
                ei[m] = _upper_bound(cw, n, u * w_cum_total)
                u = random_standard_uniform(bg)
                ej[m] = _upper_bound(cw, n, u * w_cum_total)
            bad_arr = bad_arr[ei_arr[bad_arr] == ej_arr[bad_arr]]
        loop_arr = np.empty(n, dtype=np.int64)
        loops = loop_arr
        for m in range(n):
            loops[m] = random_poisson(bg, loop_rates[m])

    deg_arr = np.zeros(n, dtype=np.int64)
    cdef cnp.int64_t[::1] deg = deg_arr
    for m in range(count):
        deg[ei[m]] += 1
        deg[ej[m]] += 1
    for m in range(n):
        deg[m] += loops[m]
    if not want_edges:
        return deg_arr, None, None, loop_arr
    for m in range(count):
        if ei[m] > ej[m]:
            i = ei[m]
            ei[m] = ej[m]
            ej[m] = i
    return deg_arr, ei_arr, ej_arr, loop_arr


def cl_sample(object rng, double[::1] w, double L, bint want_edges):
    """Mirror of _purepy.cl_sample; see that docstring for the contract."""
    cdef bitgen_t* bg = _bitgen(rng)
    cdef Py_ssize_t n = w.shape[0]
    cdef double total = L
    cdef Py_ssize_t u_idx, v
    cdef double wu, p, q, r, r2, ratio
    deg_arr = np.zeros(n, dtype=np.int64)
    cdef cnp.int64_t[::1] deg = deg_arr
    ei = []
    ej = []

    with rng.bit_generator.lock:
        for u_idx in range(n):
            wu = w[u_idx]
            v = u_idx
            p = wu * w[v] / total
            if p > 1.0:
                p = 1.0
            while v < n:
                if p <= 0.0:
                    break
                if p < 1.0:
                    r = random_standard_uniform(bg)
                    if r <= 0.0:
                        break  # log(0) gives an infinite skip: off the row
                    ratio = log(r) / log1p(-p)
                    if ratio >= <double> (n - v):
                        break
                    v += <Py_ssize_t> floor(ratio)
                q = wu * w[v] / total
                if q > 1.0:
                    q = 1.0
                r2 = random_standard_uniform(bg)
                if r2 < q / p:
                    deg[u_idx] += 1
                    if v != u_idx:
                        deg[v] += 1
                    if want_edges:
                        ei.append(u_idx)
                        ej.append(v)
                p = q
                v += 1

    if not want_edges:
        return deg_arr, None, None
    return (deg_arr, np.asarray(ei, dtype=np.int64), np.asarray(ej, dtype=np.int64))
