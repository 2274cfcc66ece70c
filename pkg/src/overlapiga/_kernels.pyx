# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled B-spline evaluation kernels (see ``_kernels_py`` for the reference)."""
import numpy as np
cimport numpy as cnp

cnp.import_array()


def find_spans(knots, int p, x):
    cdef const double[::1] kv = np.ascontiguousarray(knots, dtype=np.float64)
    cdef const double[::1] xs = np.ascontiguousarray(np.atleast_1d(x), dtype=np.float64)
    cdef Py_ssize_t npts = xs.shape[0]
    cdef Py_ssize_t n = kv.shape[0] - p - 1
    out = np.empty(npts, dtype=np.intp)
    cdef Py_ssize_t[::1] spans = out
    cdef Py_ssize_t q, lo, hi, mid
    cdef double u
    for q in range(npts):
        u = xs[q]
        if u >= kv[n]:
            spans[q] = n - 1
            continue
        if u <= kv[p]:
            spans[q] = p
            continue
        lo = p
        hi = n
        while hi - lo > 1:
            mid = (lo + hi) // 2
            if u < kv[mid]:
                hi = mid
            else:
                lo = mid
        spans[q] = lo
    return out


def basis_ders(knots, int p, x, spans, int nders):
    cdef const double[::1] kv = np.ascontiguousarray(knots, dtype=np.float64)
    cdef const double[::1] xs = np.ascontiguousarray(np.atleast_1d(x), dtype=np.float64)
    cdef const Py_ssize_t[::1] sp = np.ascontiguousarray(spans, dtype=np.intp)
    cdef Py_ssize_t npts = xs.shape[0]
    result = np.zeros((npts, nders + 1, p + 1))
    cdef double[:, :, ::1] out = result
    cdef double[:, ::1] ndu = np.zeros((p + 1, p + 1))
    cdef double[::1] left = np.zeros(p + 1)
    cdef double[::1] right = np.zeros(p + 1)
    cdef double[:, ::1] a = np.zeros((2, p + 1))
    cdef Py_ssize_t q, j, r, k, s1, s2, rk, pk, j1, j2, span
    cdef double saved, temp, d, u, fac
    for q in range(npts):
        u = xs[q]
        span = sp[q]
        ndu[0, 0] = 1.0
        for j in range(1, p + 1):
            left[j] = u - kv[span + 1 - j]
            right[j] = kv[span + j] - u
            saved = 0.0
            for r in range(j):
                ndu[j, r] = right[r + 1] + left[j - r]
                temp = ndu[r, j - 1] / ndu[j, r]
                ndu[r, j] = saved + right[r + 1] * temp
                saved = left[j - r] * temp
            ndu[j, j] = saved
        for j in range(p + 1):
            out[q, 0, j] = ndu[j, p]
        for r in range(p + 1):
            s1 = 0
            s2 = 1
            a[0, 0] = 1.0
            for k in range(1, nders + 1):
                d = 0.0
                rk = r - k
                pk = p - k
                if r >= k:
                    a[s2, 0] = a[s1, 0] / ndu[pk + 1, rk]
                    d = a[s2, 0] * ndu[rk, pk]
                if rk >= -1:
                    j1 = 1
                else:
                    j1 = -rk
                if r - 1 <= pk:
                    j2 = k - 1
                else:
                    j2 = p - r
                for j in range(j1, j2 + 1):
                    a[s2, j] = (a[s1, j] - a[s1, j - 1]) / ndu[pk + 1, rk + j]
                    d += a[s2, j] * ndu[rk + j, pk]
                if r <= pk:
                    a[s2, k] = -a[s1, k - 1] / ndu[pk + 1, r]
                    d += a[s2, k] * ndu[r, pk]
                out[q, k, r] = d
                j = s1
                s1 = s2
                s2 = j
        fac = p
        for k in range(1, nders + 1):
            for j in range(p + 1):
                out[q, k, j] *= fac
            fac *= p - k
    return result
