# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled implementations of the evaluation kernels.

Same contract as hyperinf._kernels.pure; selected at import time when the
extension built successfully.
"""
import numpy as np

cimport numpy as cnp

cnp.import_array()

BACKEND = "fast"


def row_products(cnp.int64_t[:, ::1] idx, cnp.float64_t[::1] v):
    cdef Py_ssize_t r, t, nrows = idx.shape[0], m = idx.shape[1]
    cdef double p
    out_arr = np.empty(nrows)
    cdef cnp.float64_t[::1] out = out_arr
    for r in range(nrows):
        p = 1.0
        for t in range(m):
            p *= v[idx[r, t]]
        out[r] = p
    return out_arr


def row_grad_accumulate(cnp.int64_t[:, ::1] idx, cnp.float64_t[::1] w,
                        cnp.float64_t[::1] v):
    cdef Py_ssize_t r, t, s, nrows = idx.shape[0], m = idx.shape[1]
    cdef double p
    out_arr = np.zeros(v.shape[0])
    cdef cnp.float64_t[::1] out = out_arr
    for r in range(nrows):
        for t in range(m):
            p = w[r]
            for s in range(m):
                if s != t:
                    p *= v[idx[r, s]]
            out[idx[r, t]] += p
    return out_arr


def zeta_edge_values(cnp.float64_t[:, ::1] w_edges,
                     cnp.float64_t[:, ::1] patterns, int mpow):
    cdef Py_ssize_t e, c, t, k
    cdef Py_ssize_t ne = w_edges.shape[0], m = w_edges.shape[1]
    cdef Py_ssize_t npat = patterns.shape[0]
    cdef double dot, acc, pw
    out_arr = np.empty(ne)
    cdef cnp.float64_t[::1] out = out_arr
    for e in range(ne):
        acc = 0.0
        for c in range(npat):
            dot = 0.0
            for t in range(m):
                dot += patterns[c, t] * w_edges[e, t]
            pw = 1.0
            for k in range(mpow):
                pw *= dot
            acc += pw
        out[e] = acc
    return out_arr


def zeta_edge_grad(cnp.float64_t[:, ::1] w_edges,
                   cnp.float64_t[:, ::1] patterns, int mpow):
    cdef Py_ssize_t e, c, t, k
    cdef Py_ssize_t ne = w_edges.shape[0], m = w_edges.shape[1]
    cdef Py_ssize_t npat = patterns.shape[0]
    cdef double dot, pw
    out_arr = np.zeros((ne, m))
    cdef cnp.float64_t[:, ::1] out = out_arr
    for e in range(ne):
        for c in range(npat):
            dot = 0.0
            for t in range(m):
                dot += patterns[c, t] * w_edges[e, t]
            pw = mpow
            for k in range(mpow - 1):
                pw *= dot
            for t in range(m):
                out[e, t] += pw * patterns[c, t]
    return out_arr
