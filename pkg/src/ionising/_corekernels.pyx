# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
# cython: language_level=3
"""Compiled implementations of the hot numerical kernels.

Twin of _pykernels: same three functions, same signatures and semantics.
Index arrays (rows, cols) must be np.intp; everything else float64 C-contiguous.
"""

import numpy as np

cimport cython
from libc.math cimport sqrt

BACKEND = "compiled"


def response_tensor(const double[:, ::1] eta, const double[::1] mode_freqs, const double[::1] detunings):
    """F[i, j, n] = sum_m eta[i, m] eta[j, m] w_m / (mu_n^2 - w_m^2)."""
    cdef Py_ssize_t n_ions = eta.shape[0]
    cdef Py_ssize_t n_modes = eta.shape[1]
    cdef Py_ssize_t n_tones = detunings.shape[0]
    f_arr = np.empty((n_ions, n_ions, n_tones))
    weight_arr = np.empty((n_modes, n_tones))
    cdef double[:, :, ::1] f = f_arr
    cdef double[:, ::1] weight = weight_arr
    cdef Py_ssize_t i, j, m, n
    cdef double acc, w

    for m in range(n_modes):
        w = mode_freqs[m]
        for n in range(n_tones):
            weight[m, n] = w / (detunings[n] * detunings[n] - w * w)
    for i in range(n_ions):
        for j in range(i, n_ions):
            for n in range(n_tones):
                acc = 0.0
                for m in range(n_modes):
                    acc += eta[i, m] * eta[j, m] * weight[m, n]
                f[i, j, n] = acc
                f[j, i, n] = acc
    return f_arr


def coupling_from_rabi(const double[:, ::1] omega, const double[:, :, ::1] f_tensor):
    """J[i, j] = sum_n omega[i, n] omega[j, n] F[i, j, n], zero diagonal."""
    cdef Py_ssize_t n_ions = omega.shape[0]
    cdef Py_ssize_t n_tones = omega.shape[1]
    j_arr = np.zeros((n_ions, n_ions))
    cdef double[:, ::1] j_mat = j_arr
    cdef Py_ssize_t i, j, n
    cdef double acc

    for i in range(n_ions):
        for j in range(i + 1, n_ions):
            acc = 0.0
            for n in range(n_tones):
                acc += omega[i, n] * omega[j, n] * f_tensor[i, j, n]
            j_mat[i, j] = acc
            j_mat[j, i] = acc
    return j_arr


def pair_residual_jac(
    const double[:, ::1] omega,
    const double[:, :, ::1] f_tensor,
    const double[:, ::1] target,
    const Py_ssize_t[::1] rows,
    const Py_ssize_t[::1] cols,
):
    """Pairwise constraint residuals and Jacobian; see _pykernels.pair_residual_jac."""
    cdef Py_ssize_t n_ions = omega.shape[0]
    cdef Py_ssize_t n_tones = omega.shape[1]
    cdef Py_ssize_t n_pairs = rows.shape[0]
    res_arr = np.empty(n_pairs)
    jac_arr = np.zeros((n_pairs, n_ions * n_tones))
    cdef double[::1] res = res_arr
    cdef double[:, ::1] jac = jac_arr
    cdef Py_ssize_t p, i, j, n, row_i, row_j
    cdef double acc, fij

    for p in range(n_pairs):
        i = rows[p]
        j = cols[p]
        row_i = i * n_tones
        row_j = j * n_tones
        acc = 0.0
        for n in range(n_tones):
            fij = f_tensor[i, j, n]
            acc += omega[i, n] * omega[j, n] * fij
            jac[p, row_i + n] = fij * omega[j, n]
        for n in range(n_tones):
            jac[p, row_j + n] = f_tensor[i, j, n] * omega[i, n]
        res[p] = acc - target[i, j]
    return res_arr, jac_arr
