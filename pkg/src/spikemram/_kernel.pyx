# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled charge-accumulation kernel.  Same contract as ``_kernel_py``."""
import numpy as np
cimport numpy as cnp
from libc.math cimport expm1

cnp.import_array()

cdef enum:
    RISE = 1


def accumulate(const cnp.int64_t[::1] times, const cnp.int8_t[::1] kinds,
               const cnp.int64_t[::1] rows, const double[:, ::1] G,
               bint nonideal, double v_read, double c_rt, snapshots=False):
    if snapshots:
        raise NotImplementedError("snapshots are produced by the Python kernel")
    cdef Py_ssize_t n = times.shape[0]
    cdef Py_ssize_t cols = G.shape[1]
    cdef Py_ssize_t i, c, row
    cdef long long active = 0
    cdef cnp.int64_t t, dt, t_prev = times[0] if n > 0 else 0
    cdef double fdt, scale
    gact_arr = np.zeros(cols)
    out_arr = np.zeros(cols)
    cdef double[::1] gact = gact_arr
    cdef double[::1] out = out_arr
    with nogil:
        for i in range(n):
            t = times[i]
            dt = t - t_prev
            if dt > 0 and active > 0:
                if nonideal:
                    scale = <double>dt * 1e-15 / c_rt
                    for c in range(cols):
                        out[c] = out[c] - (v_read - out[c]) * expm1(-(gact[c] * scale))
                else:
                    fdt = <double>dt
                    for c in range(cols):
                        out[c] = out[c] + gact[c] * fdt
            t_prev = t
            row = rows[i]
            if kinds[i] == RISE:
                for c in range(cols):
                    gact[c] = gact[c] + G[row, c]
                active += 1
            else:
                for c in range(cols):
                    gact[c] = gact[c] - G[row, c]
                active -= 1
                if active == 0:
                    for c in range(cols):
                        gact[c] = 0.0
    return out_arr
