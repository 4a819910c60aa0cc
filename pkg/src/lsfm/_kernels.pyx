# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled versions of the loops in ``lsfm._kernels_py``."""
import numpy as np
cimport numpy as cnp
from libc.math cimport erfc, ceil, fabs, sqrt

cnp.import_array()

cdef double SQRT2 = sqrt(2.0)


cdef inline double _cell_average(double dist, double sigma, double tau) nogil:
    cdef double half = 0.5 * tau
    cdef double s
    dist = fabs(dist)
    if sigma > 0:
        s = SQRT2 * sigma
        return 0.5 * (erfc((dist - half) / s) - erfc((dist + half) / s)) / tau
    if dist < half:
        return 1.0 / tau
    return 0.0


def cell_average(dist, sigma, double tau):
    d = np.broadcast_arrays(np.asarray(dist, dtype=np.float64),
                            np.asarray(sigma, dtype=np.float64))
    cdef double[::1] dd = np.ascontiguousarray(d[0]).ravel()
    cdef double[::1] ss = np.ascontiguousarray(d[1]).ravel()
    out = np.empty(dd.shape[0])
    cdef double[::1] o = out
    cdef Py_ssize_t n
    for n in range(dd.shape[0]):
        o[n] = _cell_average(dd[n], ss[n], tau)
    return out.reshape(d[0].shape)


def band_halfwidth(sigma, double tau, double cutoff):
    return np.ceil(cutoff * np.asarray(sigma) / tau).astype(np.int64)


def field_values(double[::1] sigma_row, double[::1] att_row, Py_ssize_t l,
                 Py_ssize_t N, double tau, double cutoff):
    out = np.zeros((N, N))
    cdef double[:, ::1] v = out
    cdef Py_ssize_t i, k, nb, lo, hi
    for k in range(N):
        if att_row[k] <= 0:
            continue
        nb = <Py_ssize_t>ceil(cutoff * sigma_row[k] / tau)
        lo = l - nb if l - nb > 0 else 0
        hi = l + nb + 1 if l + nb + 1 < N else N
        for i in range(lo, hi):
            v[i, k] = _cell_average((i - l) * tau, sigma_row[k], tau) * att_row[k]
    return out


def assemble_side(double[:, ::1] sigma, double[:, ::1] att, double[:, ::1] weight,
                  double tau, double cutoff):
    cdef Py_ssize_t N = sigma.shape[0]
    cdef Py_ssize_t l, k, i, nb, lo, hi, r, cap = 0, pos = 0
    cdef double val
    with nogil:
        for l in range(N):
            for k in range(N):
                if att[l, k] > 0:
                    nb = <Py_ssize_t>ceil(cutoff * sigma[l, k] / tau)
                    lo = l - nb if l - nb > 0 else 0
                    hi = l + nb + 1 if l + nb + 1 < N else N
                    cap += hi - lo
    data_arr = np.empty(cap)
    idx_arr = np.empty(cap, dtype=np.int64)
    ptr_arr = np.zeros(N * N + 1, dtype=np.int64)
    cdef double[::1] data = data_arr
    cdef cnp.int64_t[::1] indices = idx_arr
    cdef cnp.int64_t[::1] indptr = ptr_arr
    with nogil:
        for l in range(N):
            for k in range(N):
                r = l * N + k
                if att[l, k] > 0:
                    nb = <Py_ssize_t>ceil(cutoff * sigma[l, k] / tau)
                    lo = l - nb if l - nb > 0 else 0
                    hi = l + nb + 1 if l + nb + 1 < N else N
                    for i in range(lo, hi):
                        val = _cell_average((i - l) * tau, sigma[l, k], tau) * att[l, k] * weight[i, k]
                        if val != 0:
                            data[pos] = val
                            indices[pos] = k * N + i
                            pos += 1
                indptr[r + 1] = pos
    return data_arr[:pos].copy(), idx_arr[:pos].copy(), ptr_arr
