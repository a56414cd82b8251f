# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels; semantics identical to _core._pure (see its docstring)."""

from libc.math cimport exp, log, log1p, INFINITY

import numpy as np

cdef double LN2 = 0.6931471805599453


cdef inline double _lae(double x, double y) nogil:
    # branch structure mirrors numpy's logaddexp so backends agree closely
    cdef double d
    if x == y:
        return x + LN2
    d = x - y
    if d > 0.0:
        return x + log1p(exp(-d))
    return y + log1p(exp(d))


def renewal_logrec(head_log, Py_ssize_t T, bint has_tail, double tail_u, double tail_r):
    head_arr = np.ascontiguousarray(head_log, dtype=np.float64)
    cdef const double[::1] head = head_arr
    out_arr = np.full(T + 1, -np.inf, dtype=np.float64)
    cdef double[::1] out = out_arr
    cdef Py_ssize_t s0 = head.shape[0]
    cdef Py_ssize_t t, s, smax
    cdef double acc, w, prev, term, carried
    cdef double lng = -INFINITY
    out[0] = 0.0
    with nogil:
        for t in range(1, T + 1):
            acc = -INFINITY
            smax = t if t < s0 else s0
            for s in range(1, smax + 1):
                w = head[s - 1]
                prev = out[t - s]
                if w != -INFINITY and prev != -INFINITY:
                    if acc == -INFINITY:
                        acc = w + prev
                    else:
                        acc = _lae(acc, w + prev)
            if has_tail and t >= s0 + 1:
                prev = out[t - s0 - 1]
                term = tail_u + tail_r * (s0 + 1) + prev if prev != -INFINITY else -INFINITY
                carried = tail_r + lng if lng != -INFINITY else -INFINITY
                if term == -INFINITY:
                    lng = carried
                elif carried == -INFINITY:
                    lng = term
                else:
                    lng = _lae(term, carried)
                if lng != -INFINITY:
                    if acc == -INFINITY:
                        acc = lng
                    else:
                        acc = _lae(acc, lng)
            out[t] = acc
    return out_arr


def free_log_conv(ln_zc, ln_surv):
    zc_arr = np.ascontiguousarray(ln_zc, dtype=np.float64)
    sv_arr = np.ascontiguousarray(ln_surv, dtype=np.float64)
    cdef const double[::1] zc = zc_arr
    cdef const double[::1] sv = sv_arr
    cdef Py_ssize_t T = zc.shape[0] - 1
    out_arr = np.empty(T + 1, dtype=np.float64)
    cdef double[::1] out = out_arr
    cdef Py_ssize_t t, tau
    cdef double acc, term
    with nogil:
        for t in range(T + 1):
            acc = sv[t]
            for tau in range(1, t + 1):
                term = zc[tau] + sv[t - tau]
                if term != -INFINITY:
                    acc = _lae(acc, term) if acc != -INFINITY else term
            out[t] = acc
    return out_arr


def shift_logaddexp_1d(double[::1] acc, const double[::1] src, Py_ssize_t shift, double const):
    cdef Py_ssize_t n = acc.shape[0]
    cdef Py_ssize_t lo = shift if shift > 0 else 0
    cdef Py_ssize_t hi = n + shift if shift < 0 else n
    cdef Py_ssize_t i
    cdef double v
    with nogil:
        for i in range(lo, hi):
            v = src[i - shift]
            if v != -INFINITY:
                if acc[i] == -INFINITY:
                    acc[i] = v + const
                else:
                    acc[i] = _lae(acc[i], v + const)


def shift_logaddexp_2d(double[:, ::1] acc, const double[:, ::1] src, Py_ssize_t si, Py_ssize_t sj, double const):
    cdef Py_ssize_t n = acc.shape[0], m = acc.shape[1]
    cdef Py_ssize_t ilo = si if si > 0 else 0
    cdef Py_ssize_t ihi = n + si if si < 0 else n
    cdef Py_ssize_t jlo = sj if sj > 0 else 0
    cdef Py_ssize_t jhi = m + sj if sj < 0 else m
    cdef Py_ssize_t i, j
    cdef double v
    with nogil:
        for i in range(ilo, ihi):
            for j in range(jlo, jhi):
                v = src[i - si, j - sj]
                if v != -INFINITY:
                    if acc[i, j] == -INFINITY:
                        acc[i, j] = v + const
                    else:
                        acc[i, j] = _lae(acc[i, j], v + const)


def logsumexp_arr(x):
    x_arr = np.ascontiguousarray(x, dtype=np.float64).ravel()
    cdef const double[::1] xv = x_arr
    cdef Py_ssize_t n = xv.shape[0], i
    cdef double m = -INFINITY, total = 0.0
    if n == 0:
        return -INFINITY
    with nogil:
        for i in range(n):
            if xv[i] > m:
                m = xv[i]
    if m == -INFINITY:
        return -INFINITY
    with nogil:
        for i in range(n):
            total += exp(xv[i] - m)
    return m + log(total)
