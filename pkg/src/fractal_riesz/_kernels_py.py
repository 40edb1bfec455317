"""Pure-Python/numpy implementation of the infinite-product kernels.

Both kernels evaluate

    prod_{k>=1} m(S^{-k} x),   x = sum_i S^i D[i]

from a digit array D by the recursion t_k = S^{-1}(t_{k-1} + D[k-1]).
t_k agrees with S^{-k} x modulo Z^d while digits remain, and equals it
exactly once they are exhausted, so the geometric tail bound applies to
the final state. Must stay numerically interchangeable with _ckernels.pyx.
"""
from __future__ import annotations

import math

import numpy as np

TWO_PI = 2.0 * math.pi


def digit_product(digits, sinv, bvecs, probs, lip, c, kappa, tail_tol, zero_tol, ef, max_factors):
    """Scalar kernel. Returns (value, err, n_factors, converged)."""
    digits = np.asarray(digits, dtype=np.float64)
    d = sinv.shape[0]
    sinv_l = sinv.tolist()
    b_l = bvecs.tolist()
    p_l = probs.tolist()
    t = [0.0] * d
    pr, pi = 1.0, 0.0
    err = 0.0
    nf = 0
    tail_factor = lip * kappa * c / (1.0 - c)

    def step(u):
        nonlocal pr, pi, err, nf
        nf += 1
        if not any(u):
            # m(0) = 1 exactly: no rounding charged
            return u
        nt = [sum(sinv_l[r][s] * u[s] for s in range(d)) for r in range(d)]
        mr = mi = 0.0
        for bv, pb in zip(b_l, p_l):
            ang = TWO_PI * sum(bv[s] * nt[s] for s in range(d))
            mr += pb * math.cos(ang)
            mi += pb * math.sin(ang)
        err += math.hypot(pr, pi) * ef
        pr, pi = pr * mr - pi * mi, pr * mi + pi * mr
        return nt

    for k in range(digits.shape[0]):
        t = step([t[s] + digits[k, s] for s in range(d)])
        if math.hypot(pr, pi) < zero_tol:
            return 0j, math.hypot(pr, pi) + err, nf, True
    while True:
        bound = tail_factor * math.sqrt(sum(v * v for v in t))
        if bound <= tail_tol:
            return complex(pr, pi), err + math.hypot(pr, pi) * bound, nf, True
        if nf >= max_factors:
            return complex(pr, pi), err + math.hypot(pr, pi) * bound, nf, False
        t = step(t)
        if math.hypot(pr, pi) < zero_tol:
            return 0j, math.hypot(pr, pi) + err, nf, True


def _pairs_chunk(digits, ii, jj, sinv, bvecs, probs, tail_factor, tail_tol, zero_tol, ef,
                 max_factors):
    npair = ii.size
    K, d = digits.shape[1], digits.shape[2]
    t = np.zeros((npair, d))
    P = np.ones(npair, dtype=np.complex128)
    err = np.zeros(npair)
    out_val = np.zeros(npair, dtype=np.complex128)
    out_err = np.zeros(npair)
    alive = np.ones(npair, dtype=bool)
    nfac = np.zeros(npair, dtype=np.int64)
    st = sinv.T
    bt = TWO_PI * bvecs.T

    def advance(u, mask):
        nonlocal P, err
        nfac[mask] += 1
        mask = mask & u.any(axis=1)
        nt = u @ st
        f = np.exp(1j * (nt @ bt)) @ probs
        err = np.where(mask, err + np.abs(P) * ef, err)
        P = np.where(mask, P * f, P)
        return np.where(mask[:, None], nt, u)

    def kill(mask):
        # freeze pairs whose running product fell below zero_tol
        dead = alive & mask & (np.abs(P) < zero_tol)
        out_val[dead] = 0.0
        out_err[dead] = np.abs(P[dead]) + err[dead]
        alive[dead] = False

    for k in range(K):
        if not alive.any():
            break
        t = advance(t + (digits[ii, k, :] - digits[jj, k, :]), alive)
        kill(alive)
    converged = np.ones(npair, dtype=bool)
    while alive.any():
        bound = tail_factor * np.sqrt(np.einsum("ij,ij->i", t, t))
        done = alive & (bound <= tail_tol)
        capped = alive & ~done & (nfac >= max_factors)
        fin = done | capped
        out_val[fin] = P[fin]
        out_err[fin] = err[fin] + np.abs(P[fin]) * bound[fin]
        converged[capped] = False
        alive &= ~fin
        if not alive.any():
            break
        t = advance(t, alive)
        kill(alive)
    return out_val, out_err, converged


def gram_products(digits, sinv, bvecs, probs, lip, c, kappa, tail_tol, zero_tol, ef, max_factors,
                  chunk=65536):
    """Upper-triangle products mu_hat(x_i - x_j) for digit arrays of shape (n, K, d).

    Returns (G, E, ok): Hermitian complex matrix, entrywise error bounds,
    and whether every entry met the tail tolerance within max_factors.
    """
    digits = np.asarray(digits, dtype=np.float64)
    n = digits.shape[0]
    G = np.eye(n, dtype=np.complex128)
    E = np.zeros((n, n))
    iu, ju = np.triu_indices(n, 1)
    tail_factor = lip * kappa * c / (1.0 - c)
    ok = True
    for s in range(0, iu.size, chunk):
        ii, jj = iu[s:s + chunk], ju[s:s + chunk]
        val, er, conv = _pairs_chunk(digits, ii, jj, sinv, bvecs, probs, tail_factor, tail_tol, zero_tol, ef,
                                     max_factors)
        ok = ok and bool(conv.all())
        G[ii, jj] = val
        G[jj, ii] = np.conj(val)
        E[ii, jj] = er
        E[jj, ii] = er
    return G, E, ok
