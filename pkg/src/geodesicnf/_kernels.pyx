# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled inner kernels: short complex convolutions for Fourier coefficients."""

import numpy as np
cimport numpy as cnp

cnp.import_array()


def convolve_complex(const cnp.complex128_t[::1] a,
                     const cnp.complex128_t[::1] b):
    """Full linear convolution of two complex amplitude arrays."""
    cdef Py_ssize_t na = a.shape[0]
    cdef Py_ssize_t nb = b.shape[0]
    cdef Py_ssize_t n = na + nb - 1
    out_arr = np.zeros(n, dtype=np.complex128)
    cdef cnp.complex128_t[::1] out = out_arr
    cdef Py_ssize_t i, j
    cdef cnp.complex128_t ai
    for i in range(na):
        ai = a[i]
        if ai.real == 0.0 and ai.imag == 0.0:
            continue
        for j in range(nb):
            out[i + j] = out[i + j] + ai * b[j]
    return out_arr
