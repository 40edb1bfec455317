"""Exact integer/rational matrix helpers.

Matrices are tuples of tuples of Python ints so that powers of S never
overflow. Everything here is small-d linear algebra; no attempt is made
at asymptotic efficiency.
"""
from __future__ import annotations

from fractions import Fraction
from typing import Sequence

IntMatrix = tuple[tuple[int, ...], ...]
IntVector = tuple[int, ...]


def as_int_matrix(rows: Sequence[Sequence[int]]) -> IntMatrix:
    return tuple(tuple(int(v) for v in row) for row in rows)


def identity(d: int) -> IntMatrix:
    return tuple(tuple(int(i == j) for j in range(d)) for i in range(d))


def transpose(a: IntMatrix) -> IntMatrix:
    return tuple(zip(*a))


def matmul(a, b):
    cols = list(zip(*b))
    return tuple(tuple(sum(x * y for x, y in zip(row, col)) for col in cols) for row in a)


def matvec(a, v):
    return tuple(sum(x * y for x, y in zip(row, v)) for row in a)


def matpow(a: IntMatrix, n: int) -> IntMatrix:
    if n < 0:
        raise ValueError("negative power")
    result = identity(len(a))
    base = a
    while n:
        if n & 1:
            result = matmul(result, base)
        base = matmul(base, base)
        n >>= 1
    return result


def det(a) -> int:
    """Bareiss fraction-free determinant (exact for integer input)."""
    m = [list(row) for row in a]
    n = len(m)
    sign = 1
    prev = 1
    for k in range(n - 1):
        if m[k][k] == 0:
            for i in range(k + 1, n):
                if m[i][k] != 0:
                    m[k], m[i] = m[i], m[k]
                    sign = -sign
                    break
            else:
                return 0
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                m[i][j] = (m[i][j] * m[k][k] - m[i][k] * m[k][j]) // prev
        prev = m[k][k]
    return sign * m[n - 1][n - 1]


def adjugate(a: IntMatrix) -> IntMatrix:
    n = len(a)
    if n == 1:
        return ((1,),)
    cof = []
    for i in range(n):
        row = []
        for j in range(n):
            minor = [r[:j] + r[j + 1:] for k, r in enumerate(a) if k != i]
            row.append((-1) ** (i + j) * det(minor))
        cof.append(tuple(row))
    return transpose(tuple(cof))


def inverse_fraction(a: IntMatrix) -> tuple[tuple[Fraction, ...], ...]:
    dt = det(a)
    if dt == 0:
        raise ZeroDivisionError("singular matrix")
    adj = adjugate(a)
    return tuple(tuple(Fraction(v, dt) for v in row) for row in adj)


def solve_is_integral(a: IntMatrix, v: Sequence[int]) -> bool:
    """True iff a^{-1} v lies in Z^d (a nonsingular integer matrix)."""
    dt = det(a)
    w = matvec(adjugate(a), v)
    return all(x % dt == 0 for x in w)


def norm1(a) -> Fraction:
    """Max absolute column sum."""
    return max(sum(abs(Fraction(x)) for x in col) for col in zip(*a))


def norm_inf(a) -> Fraction:
    """Max absolute row sum."""
    return max(sum(abs(Fraction(x)) for x in row) for row in a)


def frob_sq(a) -> Fraction:
    return sum(Fraction(x) ** 2 for row in a for x in row)


def _sqrt_upper(q: Fraction) -> float:
    """A float >= sqrt(q) (q a nonnegative rational)."""
    import math

    s = math.sqrt(float(q))
    # float(q) and sqrt are each correctly rounded; step up until certified
    while Fraction(s) * Fraction(s) < q:
        s = math.nextafter(s, math.inf)
    return s


def two_norm_upper(a) -> float:
    """Certified upper bound on the spectral norm of a rational matrix.

    min of sqrt(||a||_1 ||a||_inf) and the Frobenius norm, both computed
    in exact rational arithmetic before a single upward-rounded sqrt.
    """
    interp = norm1(a) * norm_inf(a)
    return _sqrt_upper(min(interp, frob_sq(a)))


def floor_div_vec(w: Sequence[int], q: int) -> IntVector:
    return tuple(x // q for x in w)


def floor_digits(s: IntMatrix, x: Sequence[int], small: int, max_steps: int = 10**7):
    """S-adic floor expansion of an integer vector.

    Returns (digits, top) with x = sum_i S^i digits[i] + S^n top, where each
    digit lies in S [0,1)^d and every coordinate of ``top`` has absolute
    value at most ``small``. Digits are produced until the quotient becomes
    small, which happens after O(log |x|) steps because S is expansive.
    """
    dt = det(s)
    adj = adjugate(s)
    q = tuple(int(v) for v in x)
    digits = []
    while max((abs(v) for v in q), default=0) > small:
        if len(digits) >= max_steps:
            raise RuntimeError("radix expansion did not shrink")
        nq = floor_div_vec(matvec(adj, q), dt)
        sq = matvec(s, nq)
        digits.append(tuple(a - b for a, b in zip(q, sq)))
        q = nq
    return digits, q
