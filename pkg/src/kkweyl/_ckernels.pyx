# cython: language_level=3, boundscheck=False, wraparound=False, initializedcheck=False, cdivision=True
"""Compiled truncated-polynomial kernels. Mirrors :mod:`kkweyl._pykernels`."""

import numpy as np
cimport numpy as cnp

cnp.import_array()


def mul_rows(const double[:, ::1] a, const double[:, ::1] b,
             const cnp.intp_t[::1] I, const cnp.intp_t[::1] J,
             const cnp.intp_t[::1] K, Py_ssize_t nout):
    cdef Py_ssize_t nrows = a.shape[0]
    cdef Py_ssize_t ntrip = I.shape[0]
    cdef Py_ssize_t r, t
    out = np.zeros((nrows, nout), dtype=np.float64)
    cdef double[:, ::1] o = out
    with nogil:
        for r in range(nrows):
            for t in range(ntrip):
                o[r, K[t]] += a[r, I[t]] * b[r, J[t]]
    return out


def contract_rows(const double[:, ::1] a, const double[:, ::1] b,
                  const cnp.intp_t[::1] pa, const cnp.intp_t[::1] pb,
                  const cnp.intp_t[::1] po, Py_ssize_t nrows_out,
                  const cnp.intp_t[::1] I, const cnp.intp_t[::1] J,
                  const cnp.intp_t[::1] K, Py_ssize_t nout):
    cdef Py_ssize_t npair = pa.shape[0]
    cdef Py_ssize_t ntrip = I.shape[0]
    cdef Py_ssize_t p, t, ra, rb, ro
    out = np.zeros((nrows_out, nout), dtype=np.float64)
    cdef double[:, ::1] o = out
    with nogil:
        for p in range(npair):
            ra = pa[p]
            rb = pb[p]
            ro = po[p]
            for t in range(ntrip):
                o[ro, K[t]] += a[ra, I[t]] * b[rb, J[t]]
    return out
