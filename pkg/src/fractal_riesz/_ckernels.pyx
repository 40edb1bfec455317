# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled versions of the kernels in _kernels_py.py (same signatures)."""
import numpy as np
cimport numpy as cnp
from libc.math cimport cos, sin, sqrt, hypot, M_PI

cnp.import_array()


cdef inline void _step(const double[:, ::1] sinv, const double[:, ::1] bv, const double[::1] pr_,
                       double* u, double* nt, Py_ssize_t d,
                       double* pre, double* pim, double* err, double ef) noexcept nogil:
    cdef Py_ssize_t r, s, b
    cdef double acc, ang, mr = 0.0, mi = 0.0, a, bb
    cdef bint zero = True
    for s in range(d):
        if u[s] != 0.0:
            zero = False
    if zero:
        for s in range(d):
            nt[s] = 0.0
        return
    for r in range(d):
        acc = 0.0
        for s in range(d):
            acc += sinv[r, s] * u[s]
        nt[r] = acc
    for b in range(bv.shape[0]):
        ang = 0.0
        for s in range(d):
            ang += bv[b, s] * nt[s]
        ang = 2.0 * M_PI * ang
        mr += pr_[b] * cos(ang)
        mi += pr_[b] * sin(ang)
    err[0] += hypot(pre[0], pim[0]) * ef
    a = pre[0] * mr - pim[0] * mi
    bb = pre[0] * mi + pim[0] * mr
    pre[0] = a
    pim[0] = bb


cdef int _product(const double[:, :, ::1] dig, Py_ssize_t i, Py_ssize_t j, bint pair,
                  const double[:, ::1] sinv, const double[:, ::1] bv, const double[::1] probs,
                  double tail_factor, double tail_tol, double zero_tol, double ef,
                  long max_factors, double* vre, double* vim, double* verr, long* nfac,
                  double* t, double* u) noexcept nogil:
    """Returns 1 on convergence, 0 if the factor cap was hit."""
    cdef Py_ssize_t K = dig.shape[1], d = dig.shape[2], k, s
    cdef double pre = 1.0, pim = 0.0, err = 0.0, bound, nrm
    cdef long nf = 0
    for s in range(d):
        t[s] = 0.0
    for k in range(K):
        for s in range(d):
            if pair:
                u[s] = t[s] + (dig[i, k, s] - dig[j, k, s])
            else:
                u[s] = t[s] + dig[i, k, s]
        _step(sinv, bv, probs, u, t, d, &pre, &pim, &err, ef)
        nf += 1
        if hypot(pre, pim) < zero_tol:
            vre[0] = 0.0
            vim[0] = 0.0
            verr[0] = hypot(pre, pim) + err
            nfac[0] = nf
            return 1
    while True:
        nrm = 0.0
        for s in range(d):
            nrm += t[s] * t[s]
        bound = tail_factor * sqrt(nrm)
        if bound <= tail_tol or nf >= max_factors:
            vre[0] = pre
            vim[0] = pim
            verr[0] = err + hypot(pre, pim) * bound
            nfac[0] = nf
            return 1 if bound <= tail_tol else 0
        for s in range(d):
            u[s] = t[s]
        _step(sinv, bv, probs, u, t, d, &pre, &pim, &err, ef)
        nf += 1
        if hypot(pre, pim) < zero_tol:
            vre[0] = 0.0
            vim[0] = 0.0
            verr[0] = hypot(pre, pim) + err
            nfac[0] = nf
            return 1


def digit_product(digits, sinv, bvecs, probs, double lip, double c, double kappa, double tail_tol,
                  double zero_tol, double ef, long max_factors):
    cdef const double[:, :, ::1] dig = np.ascontiguousarray(digits, dtype=np.float64)[None, :, :]
    cdef const double[:, ::1] si = np.ascontiguousarray(sinv, dtype=np.float64)
    cdef const double[:, ::1] bv = np.ascontiguousarray(bvecs, dtype=np.float64)
    cdef const double[::1] pr = np.ascontiguousarray(probs, dtype=np.float64)
    cdef double tail_factor = lip * kappa * c / (1.0 - c)
    cdef double vre, vim, verr
    cdef double[::1] t = np.zeros(si.shape[0])
    cdef double[::1] u = np.zeros(si.shape[0])
    cdef long nf = 0
    cdef int ok
    ok = _product(dig, 0, 0, False, si, bv, pr, tail_factor, tail_tol, zero_tol, ef, max_factors,
                  &vre, &vim, &verr, &nf, &t[0], &u[0])
    return complex(vre, vim), verr, nf, bool(ok)


def gram_products(digits, sinv, bvecs, probs, double lip, double c, double kappa, double tail_tol,
                  double zero_tol, double ef, long max_factors, chunk=None):
    cdef const double[:, :, ::1] dig = np.ascontiguousarray(digits, dtype=np.float64)
    cdef const double[:, ::1] si = np.ascontiguousarray(sinv, dtype=np.float64)
    cdef const double[:, ::1] bv = np.ascontiguousarray(bvecs, dtype=np.float64)
    cdef const double[::1] pr = np.ascontiguousarray(probs, dtype=np.float64)
    cdef Py_ssize_t n = dig.shape[0], i, j
    cdef double tail_factor = lip * kappa * c / (1.0 - c)
    G = np.eye(n, dtype=np.complex128)
    E = np.zeros((n, n))
    cdef double[:, ::1] gre = np.eye(n)
    cdef double[:, ::1] gim = np.zeros((n, n))
    cdef double[:, ::1] ge = E
    cdef double[::1] t = np.zeros(si.shape[0])
    cdef double[::1] u = np.zeros(si.shape[0])
    cdef double vre, vim, verr
    cdef long nf = 0
    cdef int allok = 1
    with nogil:
        for i in range(n):
            for j in range(i + 1, n):
                if not _product(dig, i, j, True, si, bv, pr, tail_factor, tail_tol, zero_tol, ef,
                                max_factors, &vre, &vim, &verr, &nf, &t[0], &u[0]):
                    allok = 0
                gre[i, j] = vre
                gim[i, j] = vim
                gre[j, i] = vre
                gim[j, i] = -vim
                ge[i, j] = verr
                ge[j, i] = verr
    G.real = np.asarray(gre)
    G.imag = np.asarray(gim)
    return G, E, bool(allok)
