# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled inner loops: renormalised transfer products and Sturm counts.

Arithmetic order mirrors ``_pykernels`` operation for operation so both
backends agree to rounding of ``log`` alone.
"""
import numpy as np
cimport numpy as cnp
from libc.math cimport log, sqrt, fabs

cnp.import_array()

cdef double RENORM = 2.0 ** 512
cdef double PIVMIN = 2.2250738585072014e-308


cdef inline double _opnorm(double ar, double ai, double br, double bi,
                           double cr, double ci, double dr, double di) nogil:
    cdef double s = fabs(ar)
    if fabs(ai) > s: s = fabs(ai)
    if fabs(br) > s: s = fabs(br)
    if fabs(bi) > s: s = fabs(bi)
    if fabs(cr) > s: s = fabs(cr)
    if fabs(ci) > s: s = fabs(ci)
    if fabs(dr) > s: s = fabs(dr)
    if fabs(di) > s: s = fabs(di)
    if s == 0.0:
        return 0.0
    ar = ar / s; ai = ai / s; br = br / s; bi = bi / s
    cr = cr / s; ci = ci / s; dr = dr / s; di = di / s
    cdef double fro = ar * ar + ai * ai + br * br + bi * bi + cr * cr + ci * ci + dr * dr + di * di
    cdef double detr = (ar * dr - ai * di) - (br * cr - bi * ci)
    cdef double deti = (ar * di + ai * dr) - (br * ci + bi * cr)
    cdef double det2 = detr * detr + deti * deti
    cdef double disc = fro * fro - 4.0 * det2
    if disc < 0.0:
        disc = 0.0
    return s * sqrt(0.5 * (fro + sqrt(disc)))


cdef double _orbit_log_norm(const double* vre, const double* vim, Py_ssize_t m,
                            double er, double ei) nogil:
    cdef double ar = 1.0, ai = 0.0, br = 0.0, bi = 0.0
    cdef double cr = 0.0, ci = 0.0, dr = 1.0, di = 0.0
    cdef double tr, ti, nar, nai, nbr, nbi, nrm
    cdef double acc = 0.0
    cdef Py_ssize_t j
    for j in range(m):
        tr = er - vre[j]
        ti = ei - vim[j]
        nar = (tr * ar - ti * ai) - cr
        nai = (tr * ai + ti * ar) - ci
        nbr = (tr * br - ti * bi) - dr
        nbi = (tr * bi + ti * br) - di
        cr = ar; ci = ai; dr = br; di = bi
        ar = nar; ai = nai; br = nbr; bi = nbi
        if fabs(ar) + fabs(ai) + fabs(br) + fabs(bi) > RENORM:
            nrm = _opnorm(ar, ai, br, bi, cr, ci, dr, di)
            ar = ar / nrm; ai = ai / nrm; br = br / nrm; bi = bi / nrm
            cr = cr / nrm; ci = ci / nrm; dr = dr / nrm; di = di / nrm
            acc = acc + log(nrm)
    return acc + log(_opnorm(ar, ai, br, bi, cr, ci, dr, di))


def grid_log_norms(const double[:, ::1] vre, const double[:, ::1] vim,
                   double er, double ei, Py_ssize_t m, const Py_ssize_t[::1] starts):
    """``log ||M_m||`` for every row and every window ``[s, s + m)`` of its columns.

    Returns an array of shape ``(len(starts), n_rows)``.
    """
    cdef Py_ssize_t n = vre.shape[0]
    cdef Py_ssize_t width = vre.shape[1]
    cdef Py_ssize_t ns = starts.shape[0]
    cdef Py_ssize_t s, i, st
    for s in range(ns):
        if starts[s] < 0 or starts[s] + m > width:
            raise ValueError("window outside the sampled orbit")
    out_arr = np.empty((ns, n), dtype=np.float64)
    cdef double[:, ::1] out = out_arr
    with nogil:
        for s in range(ns):
            st = starts[s]
            for i in range(n):
                out[s, i] = _orbit_log_norm(&vre[i, st], &vim[i, st], m, er, ei)
    return out_arr


cdef enum:
    SB = 16   # energies swept together so independent divisions can overlap


def sturm_counts(const double[::1] diag, const double[::1] energies):
    """Number of eigenvalues strictly below each energy (unit off-diagonals)."""
    cdef Py_ssize_t n = diag.shape[0]
    cdef Py_ssize_t ne = energies.shape[0]
    out_arr = np.empty(ne, dtype=np.int64)
    cdef long long[::1] out = out_arr
    cdef Py_ssize_t e0, j, k, nb
    cdef double dk
    cdef double E[SB]
    cdef double delta[SB]
    cdef double tiny[SB]
    cdef long long cnt[SB]
    e0 = 0
    with nogil:
        while e0 < ne:
            nb = ne - e0 if ne - e0 < SB else SB
            for j in range(nb):
                E[j] = energies[e0 + j]
                tiny[j] = PIVMIN * (1.0 + fabs(E[j]))
                delta[j] = diag[0] - E[j]
                if delta[j] == 0.0:
                    delta[j] = tiny[j]
                cnt[j] = 1 if delta[j] < 0.0 else 0
            for k in range(1, n):
                dk = diag[k]
                for j in range(nb):
                    delta[j] = (dk - E[j]) - 1.0 / delta[j]
                    if delta[j] == 0.0:
                        delta[j] = tiny[j]
                    cnt[j] += delta[j] < 0.0
            for j in range(nb):
                out[e0 + j] = cnt[j]
            e0 += SB
    return out_arr
