# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled quadrature kernel.

Same contract as ``hardylab._kernels_py.weighted_piece_sum``: Gauss sums of
``|u|^a |u'|^b t^s A1^-k A2^-m mult(t)`` over linear pieces with Kahan
accumulation across pieces in array order.  The inner loop is pure C and
releases the GIL so suite evaluation can thread.
"""

from libc.math cimport fabs, log, pow

BACKEND_NAME = "cython"


def weighted_piece_sum(double[::1] lo, double[::1] hi, double[::1] ulo,
                       double[::1] slope, double[::1] mlo, double[::1] mslope,
                       double a, double b, double s, double k, double m,
                       double log_r, double[::1] gauss_x, double[::1] gauss_w):
    cdef Py_ssize_t n_pieces = lo.shape[0]
    cdef Py_ssize_t n_gauss = gauss_x.shape[0]
    cdef Py_ssize_t i, j
    cdef double half, t, u, w, val, acc, a1v, slope_abs
    cdef double total = 0.0, comp = 0.0, y, tmp

    if n_pieces == 0:
        return 0.0

    with nogil:
        for i in range(n_pieces):
            half = 0.5 * (hi[i] - lo[i])
            slope_abs = fabs(slope[i])
            acc = 0.0
            for j in range(n_gauss):
                t = lo[i] + half * (gauss_x[j] + 1.0)
                if s != 0.0:
                    val = pow(t, s)
                else:
                    val = 1.0
                if k != 0.0 or m != 0.0:
                    a1v = log_r - log(t)
                    if k != 0.0:
                        val = val * pow(a1v, -k)
                    if m != 0.0:
                        val = val * pow(log(a1v), -m)
                if a != 0.0:
                    u = ulo[i] + slope[i] * (t - lo[i])
                    val = val * pow(fabs(u), a)
                if b != 0.0:
                    val = val * pow(slope_abs, b)
                val = val * (mlo[i] + mslope[i] * (t - lo[i]))
                acc = acc + gauss_w[j] * val
            y = acc * half - comp
            tmp = total + y
            comp = (tmp - total) - y
            total = tmp
    return total
