# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels for the infinite products.

Mirrors ``ellhyp._fallback`` exactly; the products are accumulated in the
same order so both paths agree to rounding.
"""
import numpy as np
cimport numpy as cnp
from libc.math cimport fabs

cdef extern from "complex.h" nogil:
    double cabs(double complex)

cnp.import_array()


cdef inline double _max(double a, double b) nogil:
    return a if a > b else b


def qpoch(z, double complex p, double eps):
    cdef cnp.ndarray[cnp.complex128_t, ndim=1] zz = np.ascontiguousarray(z, dtype=np.complex128).reshape(-1)
    cdef Py_ssize_t n = zz.shape[0], i
    cdef cnp.ndarray[cnp.complex128_t, ndim=1] out = np.empty(n, dtype=np.complex128)
    cdef double ap = cabs(p), bound = eps * (1.0 - ap), az, apj
    cdef double pr = p.real, pi = p.imag
    cdef double ar, ai, tr, ti, zr, zi, t
    with nogil:
        for i in range(n):
            # real arithmetic: C99 complex multiply goes through a slow NaN-safe helper
            zr = zz[i].real
            zi = zz[i].imag
            az = cabs(zz[i])
            ar, ai = 1.0, 0.0
            apj = 1.0
            while az * apj >= bound:
                tr = 1.0 - zr
                ti = -zi
                t = ar * tr - ai * ti
                ai = ar * ti + ai * tr
                ar = t
                t = zr * pr - zi * pi
                zi = zr * pi + zi * pr
                zr = t
                apj = apj * ap
                if apj == 0:
                    break
            out[i].real = ar
            out[i].imag = ai
    return out


def theta(z, double complex p, double eps):
    cdef cnp.ndarray[cnp.complex128_t, ndim=1] zz = np.ascontiguousarray(z, dtype=np.complex128).reshape(-1)
    return qpoch(zz, p, eps) * qpoch(p / zz, p, eps)


def gamma_product(z, double complex p, double complex q, double eps):
    cdef cnp.ndarray[cnp.complex128_t, ndim=1] zz = np.ascontiguousarray(z, dtype=np.complex128).reshape(-1)
    cdef Py_ssize_t n = zz.shape[0], i
    cdef cnp.ndarray[cnp.complex128_t, ndim=1] out = np.empty(n, dtype=np.complex128)
    if n == 0:
        return out, np.inf
    cdef double ap = cabs(p), aq = cabs(q)
    cdef double complex pq = p * q
    cdef double scale = 0.0, zmin = 1e300, a
    for i in range(n):
        a = cabs(zz[i])
        scale = _max(scale, a)
        if a < zmin:
            zmin = a
    scale = _max(scale, cabs(pq) / zmin)
    cdef double cut = eps * (1.0 - ap) * (1.0 - aq) / _max(scale, 1.0) / 4.0
    # lattice monomials p^j q^k above the cut, same order as the numpy path
    cdef list ws = []
    cdef double complex pj = 1.0, w
    while cabs(pj) >= cut:
        w = pj
        while cabs(w) >= cut:
            ws.append(w)
            w = w * q
            if w == 0:
                break
        pj = pj * p
        if pj == 0:
            break
    cdef cnp.ndarray[cnp.complex128_t, ndim=1] W = np.array(ws, dtype=np.complex128)
    cdef Py_ssize_t m = W.shape[0], k
    cdef double mind2 = 1e300, d2
    cdef double zr_, zi_, rr, ri_, wr, wi, nr, ni, dr, di, xr, xi, t
    with nogil:
        for i in range(n):
            zr_ = zz[i].real
            zi_ = zz[i].imag
            rr = (pq / zz[i]).real
            ri_ = (pq / zz[i]).imag
            nr, ni, dr, di = 1.0, 0.0, 1.0, 0.0
            for k in range(m):
                wr = W[k].real
                wi = W[k].imag
                xr = 1.0 - (zr_ * wr - zi_ * wi)
                xi = -(zr_ * wi + zi_ * wr)
                d2 = xr * xr + xi * xi
                if d2 < mind2:
                    mind2 = d2
                t = dr * xr - di * xi
                di = dr * xi + di * xr
                dr = t
                xr = 1.0 - (rr * wr - ri_ * wi)
                xi = -(rr * wi + ri_ * wr)
                t = nr * xr - ni * xi
                ni = nr * xi + ni * xr
                nr = t
            out[i] = (nr + 1j * ni) / (dr + 1j * di)
    return out, mind2 ** 0.5
