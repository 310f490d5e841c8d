# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled versions of the kernels in ``_kernels_py``; same signatures."""

import numpy as np
cimport numpy as cnp
from libc.math cimport sin, cos, sinh, cosh, exp, fabs, floor, M_PI

cnp.import_array()

cdef double NEGLIGIBLE = 2.0 ** -60


cdef inline double complex cexp_(double complex u) nogil:
    cdef double e = exp(u.real)
    return e * cos(u.imag) + 1j * (e * sin(u.imag))


cdef inline double complex csin_(double complex u) nogil:
    return sin(u.real) * cosh(u.imag) + 1j * (cos(u.real) * sinh(u.imag))


cdef inline double cabs_(double complex u) nogil:
    return (u.real * u.real + u.imag * u.imag) ** 0.5


cdef inline long round_half_even(double v) nogil:
    # Python's round(): ties go to the even neighbour.
    cdef double f = floor(v)
    cdef double d = v - f
    if d > 0.5:
        return <long>f + 1
    if d < 0.5:
        return <long>f
    if (<long>f) % 2 == 0:
        return <long>f
    return <long>f + 1


cdef double complex theta_core(double complex z, double complex tau,
                               double complex[:] qpow, double[:] qabs,
                               double complex norm) nogil:
    cdef long s = round_half_even(z.imag / tau.imag)
    cdef double complex w = z - s * tau
    cdef long r = round_half_even(w.real)
    cdef double complex z0 = w - r
    cdef double complex x = cexp_(2j * M_PI * z0)
    cdef double complex xi = 1.0 / x
    cdef double m = cabs_(x)
    cdef double mi = cabs_(xi)
    cdef double complex prod = 1.0
    cdef double complex val
    cdef Py_ssize_t j
    if mi > m:
        m = mi
    for j in range(qpow.shape[0]):
        if qabs[j] * m < NEGLIGIBLE:
            break
        prod = prod * ((1.0 - qpow[j] * x) * (1.0 - qpow[j] * xi))
    val = csin_(M_PI * z0) / M_PI * prod * norm
    if r != 0 or s != 0:
        val = val * cexp_(-1j * M_PI * s * s * tau - 2j * M_PI * s * z0)
        if (r + s) % 2 != 0:
            val = -val
    return val


def theta_eval(z, double complex tau, double complex[:] qpow, double[:] qabs,
               double complex norm):
    return theta_core(<double complex>complex(z), tau, qpow, qabs, norm)


def theta_many(zs, double complex tau, double complex[:] qpow, double[:] qabs,
               double complex norm):
    arr = np.ascontiguousarray(zs, dtype=complex)
    out = np.empty_like(arr)
    cdef double complex[:] src = arr.reshape(-1)
    cdef double complex[:] dst = out.reshape(-1)
    cdef Py_ssize_t i
    with nogil:
        for i in range(src.shape[0]):
            dst[i] = theta_core(src[i], tau, qpow, qabs, norm)
    return out


def sym_sum(A, B, perms):
    cdef double complex[:, :] a = np.ascontiguousarray(A, dtype=complex)
    cdef double complex[:, :] b = np.ascontiguousarray(B, dtype=complex)
    cdef cnp.intp_t[:, :] p = np.ascontiguousarray(perms, dtype=np.intp)
    cdef Py_ssize_t m = p.shape[0]
    cdef Py_ssize_t k = p.shape[1]
    cdef Py_ssize_t s, r, i, j
    cdef double complex total = 0.0
    cdef double complex term
    cdef double biggest = 0.0
    cdef double mag
    with nogil:
        for s in range(m):
            term = 1.0
            for r in range(k):
                term = term * a[p[s, r], r]
            for i in range(k):
                for j in range(i + 1, k):
                    term = term * b[p[s, i], p[s, j]]
            total = total + term
            mag = cabs_(term)
            if mag > biggest:
                biggest = mag
    return complex(total), biggest
