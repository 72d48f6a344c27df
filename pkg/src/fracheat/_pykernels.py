"""Reference (scipy) implementations of the compiled kernels in ``_ckernels``."""
import numpy as np
import scipy.sparse as sp


def _csr(indptr, indices, data, n):
    return sp.csr_matrix((data, indices, indptr), shape=(n, n))


def cheb_series(indptr, indices, data, M, coeffs, scale):
    M = np.asarray(M, dtype=np.float64)
    coeffs = np.asarray(coeffs, dtype=np.float64)
    L = _csr(indptr, indices, data, M.shape[0])
    m = coeffs.shape[0] - 1
    out = coeffs[0] * M
    if m == 0:
        return out, 0
    T0 = M
    T1 = scale * (L @ T0) - T0
    out = out + coeffs[1] * T1
    for k in range(2, m + 1):
        T2 = 2.0 * scale * (L @ T1) - 2.0 * T1 - T0
        out += coeffs[k] * T2
        T0, T1 = T1, T2
    return out, m


def csr_matmat(indptr, indices, data, M):
    M = np.asarray(M, dtype=np.float64)
    return _csr(indptr, indices, data, len(indptr) - 1) @ M
