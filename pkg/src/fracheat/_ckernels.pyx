# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled CSR kernels for the Chebyshev filter recurrence."""
import numpy as np
cimport numpy as cnp
from libc.stdlib cimport malloc, free

cnp.import_array()


cdef void _spmm_shift(const int* indptr, const int* indices, const double* data,
                      const double* T1, const double* T0, double* T2, double* out,
                      Py_ssize_t n, Py_ssize_t c, double alpha, double beta, double gamma,
                      double ck, double* acc) noexcept nogil:
    # T2 = alpha * L @ T1 + beta * T1 + gamma * T0 ; out += ck * T2   (row-major n x c blocks)
    cdef Py_ssize_t i, p, q, base
    cdef double w, v, a
    if c == 1:
        for i in range(n):
            a = 0.0
            for p in range(indptr[i], indptr[i + 1]):
                a += data[p] * T1[indices[p]]
            v = alpha * a + beta * T1[i] + gamma * T0[i]
            T2[i] = v
            out[i] += ck * v
        return
    for i in range(n):
        for q in range(c):
            acc[q] = 0.0
        for p in range(indptr[i], indptr[i + 1]):
            w = data[p]
            base = indices[p] * c
            for q in range(c):
                acc[q] += w * T1[base + q]
        base = i * c
        for q in range(c):
            v = alpha * acc[q] + beta * T1[base + q] + gamma * T0[base + q]
            T2[base + q] = v
            out[base + q] += ck * v


def cheb_series(indptr, indices, data, M, coeffs, double scale):
    """Sum ``c_k T_k(scale * L - I) M`` for a CSR matrix ``L``.

    Returns ``(result, n_products)``; ``n_products`` counts sparse
    matrix-block products and equals ``len(coeffs) - 1``.
    """
    cdef const int[::1] ip = np.ascontiguousarray(indptr, dtype=np.int32)
    cdef const int[::1] ix = np.ascontiguousarray(indices, dtype=np.int32)
    cdef const double[::1] dv = np.ascontiguousarray(data, dtype=np.float64)
    cdef const double[::1] cv = np.ascontiguousarray(coeffs, dtype=np.float64)
    Min = np.ascontiguousarray(M, dtype=np.float64)
    squeeze = Min.ndim == 1
    if squeeze:
        Min = Min[:, None]
    cdef Py_ssize_t n = Min.shape[0]
    cdef Py_ssize_t c = Min.shape[1]
    cdef Py_ssize_t m = cv.shape[0] - 1
    cdef Py_ssize_t k
    result = Min * cv[0]
    cdef double[:, ::1] out = result
    if m == 0 or n == 0 or c == 0:
        return (result[:, 0] if squeeze else result), int(m)
    if ix.shape[0] == 0:
        # L = 0: T_k(-I) = (-1)^k I
        result += Min * float(np.sum(np.asarray(cv)[1:] * (-1.0) ** np.arange(1, m + 1)))
        return (result[:, 0] if squeeze else result), int(m)
    a0 = Min.copy()
    a1 = np.empty_like(Min)
    a2 = np.empty_like(Min)
    cdef double[:, ::1] v0 = a0
    cdef double[:, ::1] v1 = a1
    cdef double[:, ::1] v2 = a2
    cdef double* T0 = &v0[0, 0]
    cdef double* T1 = &v1[0, 0]
    cdef double* T2 = &v2[0, 0]
    cdef double* tmp
    cdef double* po = &out[0, 0]
    cdef double* acc = <double*> malloc(max(c, 1) * sizeof(double))
    if acc == NULL:
        raise MemoryError()
    try:
        with nogil:
            # T1 = scale * L @ T0 - T0
            _spmm_shift(&ip[0], &ix[0], &dv[0], T0, T0, T1, po, n, c, scale, -1.0, 0.0, cv[1], acc)
            for k in range(2, m + 1):
                _spmm_shift(&ip[0], &ix[0], &dv[0], T1, T0, T2, po, n, c, 2.0 * scale, -2.0, -1.0, cv[k], acc)
                tmp = T0
                T0 = T1
                T1 = T2
                T2 = tmp
    finally:
        free(acc)
    return (result[:, 0] if squeeze else result), int(m)


def csr_matmat(indptr, indices, data, M):
    """``L @ M`` for CSR ``L`` and a dense vector or block ``M``."""
    cdef const int[::1] ip = np.ascontiguousarray(indptr, dtype=np.int32)
    cdef const int[::1] ix = np.ascontiguousarray(indices, dtype=np.int32)
    cdef const double[::1] dv = np.ascontiguousarray(data, dtype=np.float64)
    Min = np.ascontiguousarray(M, dtype=np.float64)
    squeeze = Min.ndim == 1
    if squeeze:
        Min = Min[:, None]
    cdef const double[:, ::1] X = Min
    res = np.zeros((ip.shape[0] - 1, Min.shape[1]))
    cdef double[:, ::1] Y = res
    cdef Py_ssize_t i, p, j, q
    cdef Py_ssize_t c = X.shape[1]
    cdef double w
    with nogil:
        for i in range(Y.shape[0]):
            for p in range(ip[i], ip[i + 1]):
                j = ix[p]
                w = dv[p]
                for q in range(c):
                    Y[i, q] += w * X[j, q]
    return res[:, 0] if squeeze else res
