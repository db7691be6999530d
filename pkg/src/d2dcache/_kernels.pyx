"""Compiled inner loop of the Monte Carlo engine.

Must stay numerically in step with ``_kernels_py.interference_sums``:
same operation order, same Neumaier compensation.
"""
import numpy as np

from libc.math cimport sqrt, cos, sin, pow, fabs, M_PI


def interference_sums(const long long[::1] counts,
                      const double[::1] u_rad,
                      const double[::1] u_ang,
                      const double[::1] off_x,
                      const double[::1] off_y,
                      const double[::1] fading,
                      double window_radius,
                      double sigma,
                      double tx_power,
                      double alpha):
    cdef Py_ssize_t n_real = counts.shape[0]
    cdef Py_ssize_t i, j, k = 0
    cdef double s, c, t, term, rho, phi, x, y, d2
    cdef double expo = -0.5 * alpha
    cdef double two_pi = 2.0 * M_PI
    cdef bint quartic = alpha == 4.0
    out = np.empty(n_real, dtype=np.float64)
    cdef double[::1] res = out
    with nogil:
        for i in range(n_real):
            s = 0.0
            c = 0.0
            for j in range(counts[i]):
                rho = window_radius * sqrt(u_rad[k])
                phi = two_pi * u_ang[k]
                x = rho * cos(phi) + sigma * off_x[k]
                y = rho * sin(phi) + sigma * off_y[k]
                d2 = x * x + y * y
                if quartic:
                    term = tx_power * fading[k] / (d2 * d2)
                else:
                    term = tx_power * fading[k] * pow(d2, expo)
                t = s + term
                if fabs(s) >= fabs(term):
                    c = c + ((s - t) + term)
                else:
                    c = c + ((term - t) + s)
                s = t
                k += 1
            res[i] = s + c
    return out
