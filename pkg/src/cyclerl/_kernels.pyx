# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled dense-network kernels.

Same contract and parameter layout as cyclerl.nn._pykernels; matrix products
go through BLAS (scipy.linalg.cython_blas), bias/activation passes are fused
C loops. Selected at import time by cyclerl.nn.backend when available.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport sqrt, tanh
from scipy.linalg.cython_blas cimport dgemm

cnp.import_array()

ACT_TANH = 0
ACT_RELU = 1


cdef inline void _linear_rowmajor(double* h, double* w, double* z,
                                  int n, int fan_in, int fan_out) noexcept nogil:
    # z (n, fan_out) = h (n, fan_in) @ w(fan_out, fan_in)^T, all row-major.
    cdef char ta = b'T'
    cdef char tb = b'N'
    cdef double one = 1.0
    cdef double zero = 0.0
    dgemm(&ta, &tb, &fan_out, &n, &fan_in, &one, w, &fan_in, h, &fan_in,
          &zero, z, &fan_out)


def mlp_forward(dims, int act, double[::1] params, double[:, ::1] x):
    """Batch forward pass; returns [x, h1, ..., y] like the numpy kernel."""
    cdef int n_layers = len(dims) - 1
    cdef int n = x.shape[0]
    cdef Py_ssize_t off = 0
    cdef int layer, fan_in, fan_out, i, j
    cdef double v
    cdef double[:, ::1] h = x
    cdef double[:, ::1] z
    cdef cnp.ndarray z_arr

    acts = [np.asarray(x)]
    for layer in range(n_layers):
        fan_in = dims[layer]
        fan_out = dims[layer + 1]
        z_arr = np.empty((n, fan_out), dtype=np.float64)
        z = z_arr
        _linear_rowmajor(&h[0, 0], &params[off], &z[0, 0], n, fan_in, fan_out)
        off += <Py_ssize_t> fan_out * fan_in
        if layer < n_layers - 1 and act == ACT_RELU:
            for i in range(n):
                for j in range(fan_out):
                    v = z[i, j] + params[off + j]
                    z[i, j] = v if v > 0.0 else 0.0
        else:
            for i in range(n):
                for j in range(fan_out):
                    z[i, j] = z[i, j] + params[off + j]
            if layer < n_layers - 1:
                # numpy's tanh is vectorized; the scalar libm loop is not
                np.tanh(z_arr, out=z_arr)
        off += fan_out
        acts.append(z_arr)
        h = z
    return acts


def mlp_backward(dims, int act, double[::1] params, acts, double[:, ::1] gy,
                 bint need_param_grad=True):
    """Reverse-mode pass for <output, gy>; returns (gparams, gx)."""
    cdef int n_layers = len(dims) - 1
    cdef int n = gy.shape[0]
    cdef int layer, fan_in, fan_out, i, j
    cdef double acc, hv
    cdef char t_n = b'N'
    cdef char t_t = b'T'
    cdef double one = 1.0
    cdef double zero = 0.0

    offsets = []
    cdef Py_ssize_t off = 0
    for layer in range(n_layers):
        offsets.append(off)
        off += <Py_ssize_t> dims[layer + 1] * dims[layer] + dims[layer + 1]

    cdef cnp.ndarray gparams_arr = None
    cdef double[::1] gparams
    if need_param_grad:
        gparams_arr = np.zeros(params.shape[0], dtype=np.float64)
        gparams = gparams_arr

    cdef double[:, ::1] g = gy
    cdef double[:, ::1] h_prev, h, g_prev
    cdef cnp.ndarray g_prev_arr
    for layer in range(n_layers - 1, -1, -1):
        fan_in = dims[layer]
        fan_out = dims[layer + 1]
        off = offsets[layer]
        h_prev = acts[layer]
        if need_param_grad:
            # gw (fan_out, fan_in) = g^T @ h_prev
            dgemm(&t_n, &t_t, &fan_in, &fan_out, &n, &one,
                  &h_prev[0, 0], &fan_in, &g[0, 0], &fan_out,
                  &zero, &gparams[off], &fan_in)
            for j in range(fan_out):
                acc = 0.0
                for i in range(n):
                    acc += g[i, j]
                gparams[off + <Py_ssize_t> fan_out * fan_in + j] = acc
        # g_prev (n, fan_in) = g @ w
        g_prev_arr = np.empty((n, fan_in), dtype=np.float64)
        g_prev = g_prev_arr
        dgemm(&t_n, &t_n, &fan_in, &n, &fan_out, &one,
              &params[off], &fan_in, &g[0, 0], &fan_out,
              &zero, &g_prev[0, 0], &fan_in)
        if layer > 0:
            h = acts[layer]
            if act == ACT_TANH:
                for i in range(n):
                    for j in range(fan_in):
                        hv = h[i, j]
                        g_prev[i, j] *= 1.0 - hv * hv
            else:
                for i in range(n):
                    for j in range(fan_in):
                        if h[i, j] <= 0.0:
                            g_prev[i, j] = 0.0
        g = g_prev
    return gparams_arr, g_prev_arr


def adam_update(double[::1] params, double[::1] grad, double[::1] m,
                double[::1] v, long t, double lr, double beta1, double beta2,
                double eps):
    """One bias-corrected Adam step, in place (t counts this update)."""
    cdef Py_ssize_t i, size = params.shape[0]
    cdef double c1 = 1.0 - beta1 ** t
    cdef double c2 = 1.0 - beta2 ** t
    cdef double g
    with nogil:
        for i in range(size):
            g = grad[i]
            m[i] = beta1 * m[i] + (1.0 - beta1) * g
            v[i] = beta2 * v[i] + (1.0 - beta2) * g * g
            params[i] -= lr * (m[i] / c1) / (sqrt(v[i] / c2) + eps)
