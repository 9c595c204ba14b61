# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled inner loops. Signatures mirror ``_pykernels``."""
import numpy as np
cimport numpy as cnp
from libc.string cimport memcpy, memset, memcmp

cnp.import_array()


def tau(const double[:, ::1] a):
    cdef Py_ssize_t n = a.shape[0]
    cdef Py_ssize_t i, j, k
    cdef double s, best = 1.0, x, y
    if n < 2:
        return 0.0
    for i in range(n):
        for j in range(i + 1, n):
            s = 0.0
            for k in range(n):
                x = a[i, k]
                y = a[j, k]
                s += x if x < y else y
            if s < best:
                best = s
    s = 1.0 - best
    if s < 0.0:
        return 0.0
    return s


cdef inline void _bool_product(const unsigned char* p, const unsigned char* q,
                               unsigned char* out, Py_ssize_t n) noexcept nogil:
    # out = p * q over the boolean semiring
    cdef Py_ssize_t i, j, k
    memset(out, 0, n * n)
    for i in range(n):
        for k in range(n):
            if p[i * n + k]:
                for j in range(n):
                    if q[k * n + j]:
                        out[i * n + j] = 1


def scan_windows(const unsigned char[:, :, ::1] masks, Py_ssize_t start,
                 Py_ssize_t confirm, bint backward):
    cdef Py_ssize_t T = masks.shape[0]
    cdef Py_ssize_t n = masks.shape[1]
    cdef Py_ssize_t nn = n * n
    cdef Py_ssize_t t = start, reached = -1, i, count = 0, cap = 64
    cdef unsigned char[::1] cur = np.zeros(nn, dtype=np.uint8)
    cdef unsigned char[::1] nxt = np.zeros(nn, dtype=np.uint8)
    cdef unsigned char[::1] tmp
    cuts_arr = np.empty(cap, dtype=np.int64)
    pats_arr = np.empty((cap, nn), dtype=np.uint8)
    cdef cnp.int64_t[::1] cuts = cuts_arr
    cdef unsigned char[:, ::1] pats = pats_arr
    for i in range(n):
        cur[i * n + i] = 1
    while t < T:
        if backward:
            _bool_product(&masks[t, 0, 0], &cur[0], &nxt[0], n)
        else:
            _bool_product(&cur[0], &masks[t, 0, 0], &nxt[0], n)
        t += 1
        if reached < 0 or memcmp(&nxt[0], &cur[0], nn) != 0:
            reached = t
        tmp = cur
        cur = nxt
        nxt = tmp
        if t - reached >= confirm:
            if count == cap:
                cap *= 2
                cuts_arr = np.resize(cuts_arr, cap)
                pats_arr = np.resize(pats_arr, (cap, nn))
                cuts = cuts_arr
                pats = pats_arr
            cuts[count] = reached
            memcpy(&pats[count, 0], &cur[0], nn)
            count += 1
            t = reached
            reached = -1
            memset(&cur[0], 0, nn)
            for i in range(n):
                cur[i * n + i] = 1
    return (cuts_arr[:count].copy(),
            pats_arr[:count].reshape(count, n, n).astype(bool))


def product_stack(const double[:, :, ::1] stack, bint backward):
    cdef Py_ssize_t T = stack.shape[0]
    cdef Py_ssize_t n = stack.shape[1]
    cdef Py_ssize_t t, i, j, k
    cdef double s
    acc_arr = np.eye(n)
    tmp_arr = np.empty((n, n))
    cdef double[:, ::1] acc = acc_arr
    cdef double[:, ::1] tmp = tmp_arr
    cdef double[:, ::1] swap
    for t in range(T):
        for i in range(n):
            for j in range(n):
                s = 0.0
                if backward:
                    for k in range(n):
                        s += stack[t, i, k] * acc[k, j]
                else:
                    for k in range(n):
                        s += acc[i, k] * stack[t, k, j]
                tmp[i, j] = s
        swap = acc
        acc = tmp
        tmp = swap
    return np.asarray(acc).copy()


def propagate(const double[:, :, ::1] stack, const double[::1] x0):
    cdef Py_ssize_t T = stack.shape[0]
    cdef Py_ssize_t n = stack.shape[1]
    cdef Py_ssize_t t, i, k
    cdef double s
    out_arr = np.empty((T + 1, n))
    cdef double[:, ::1] out = out_arr
    for i in range(n):
        out[0, i] = x0[i]
    for t in range(T):
        for i in range(n):
            s = 0.0
            for k in range(n):
                s += stack[t, i, k] * out[t, k]
            out[t + 1, i] = s
    return out_arr
