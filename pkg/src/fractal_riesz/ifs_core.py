"""Affine IFS data, the symbol m, and the Fourier transform of the invariant measure.

The invariant measure of x -> R^{-1}(x + b), b in B, with weights p_b has

    mu_hat(x) = prod_{k>=1} m(S^{-k} x),   m(x) = sum_b p_b exp(2 pi i b.x),

where S = R^T. Every norm reported here is a certified upper bound
computed in exact rational arithmetic; floating point is only used to
evaluate m itself, with explicit rounding budgets.
"""
from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from pathlib import Path
from typing import Sequence

import numpy as np

from . import _exact
from .errors import (
    BadProbabilities,
    IfsError,
    MissingZeroDigit,
    NonExpansive,
    NotContractive,
    TolUnreachable,
)
from .kernels import digit_product

EPS = 2.0**-53
MAX_POWER = 64
DEFAULT_MAX_FACTORS = 10**6


@dataclass(frozen=True)
class CertifiedComplex:
    value: complex
    err: float

    def __abs__(self):
        return abs(self.value)


@dataclass(frozen=True)
class Contraction:
    """Certified bound ||S^{-k}||_2 <= kappa * c**k for all k >= 0."""

    c: float
    kappa: float = 1.0
    power: int = 1

    def norm_power(self, k: int) -> float:
        return self.kappa * self.c**k

    def geometric_tail(self, p: int) -> float:
        """Upper bound for sum_{i>=1} ||S^{-ip}||."""
        cp = self.c**p
        return self.kappa * cp / (1.0 - cp)


@dataclass(frozen=True)
class IfsSpec:
    dim: int
    R: tuple
    B: tuple
    probs: tuple = field(default=())

    @property
    def S(self):
        return _exact.transpose(self.R)

    @cached_property
    def s_inv_exact(self):
        return _exact.inverse_fraction(self.S)

    @cached_property
    def s_inv(self) -> np.ndarray:
        return np.array([[float(v) for v in row] for row in self.s_inv_exact])

    @cached_property
    def b_array(self) -> np.ndarray:
        return np.array(self.B, dtype=np.float64).reshape(len(self.B), self.dim)

    @cached_property
    def p_array(self) -> np.ndarray:
        return np.array(self.probs, dtype=np.float64)

    @cached_property
    def contraction(self) -> Contraction:
        return contraction_bound(self)

    @cached_property
    def lipschitz(self) -> float:
        return lipschitz_m(self)

    def to_dict(self) -> dict:
        return {
            "dim": self.dim,
            "R": [list(r) for r in self.R],
            "B": [list(b) for b in self.B],
            "p": list(self.probs),
        }


def make_ifs(R, B, p=None) -> IfsSpec:
    """Build and validate a spec from plain Python data (scalars allowed for d=1)."""
    if isinstance(R, (int, np.integer)):
        R = [[int(R)]]
    R = _exact.as_int_matrix(R)
    d = len(R)
    digits = []
    for b in B:
        if isinstance(b, (int, np.integer)):
            b = [b]
        digits.append(tuple(int(v) for v in b))
    if p is None:
        p = [1.0 / len(digits)] * len(digits)
    return validate_ifs(IfsSpec(dim=d, R=R, B=tuple(digits), probs=tuple(float(v) for v in p)))


def ifs_from_dict(raw: dict) -> IfsSpec:
    return make_ifs(raw["R"], raw["B"], raw.get("p"))


def load_ifs(path) -> IfsSpec:
    return ifs_from_dict(json.loads(Path(path).read_text()))


def spec_hash(spec: IfsSpec) -> str:
    blob = json.dumps(spec.to_dict(), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode()).hexdigest()


def validate_ifs(raw: IfsSpec) -> IfsSpec:
    d = raw.dim
    if d < 1 or len(raw.R) != d or any(len(row) != d for row in raw.R):
        raise IfsError(f"R must be a {d}x{d} matrix")
    if any(len(b) != d for b in raw.B):
        raise IfsError("every digit must have length dim")
    if len(set(raw.B)) != len(raw.B):
        raise IfsError("digits must be distinct")
    if len(raw.B) < 2:
        raise IfsError("need at least two digits")
    if tuple([0] * d) not in raw.B:
        raise MissingZeroDigit("0 must be one of the digits")
    if len(raw.probs) != len(raw.B):
        raise BadProbabilities("one weight per digit required")
    if any(not (0.0 < q < 1.0) for q in raw.probs):
        raise BadProbabilities("weights must lie in (0, 1)")
    if abs(math.fsum(raw.probs) - 1.0) > 1e-12:
        raise BadProbabilities(f"weights sum to {math.fsum(raw.probs)!r}, not 1")
    if _exact.det(raw.R) == 0:
        raise NonExpansive("R is singular")
    spec = IfsSpec(dim=d, R=_exact.as_int_matrix(raw.R), B=tuple(raw.B), probs=tuple(raw.probs))
    try:
        spec.contraction
    except NotContractive as exc:
        raise NonExpansive(str(exc)) from None
    return spec


def contraction_bound(spec: IfsSpec) -> Contraction:
    """Certified geometric bound on the powers of S^{-1}.

    Tries ||S^{-m}|| < 1 for m = 1..64 using the exact l1/linf/Frobenius
    bound; for m > 1 the per-step rate is c = ||S^{-m}||^{1/m} and kappa
    absorbs the first m - 1 powers.
    """
    sinv = spec.s_inv_exact
    d = spec.dim
    power = _exact.identity(d)
    norms = [1.0]
    for m in range(1, MAX_POWER + 1):
        power = _exact.matmul(power, sinv)
        gamma = _exact.two_norm_upper(power)
        if gamma < 1.0:
            if m == 1:
                return Contraction(c=gamma, kappa=1.0, power=1)
            c = math.nextafter(math.nextafter(gamma ** (1.0 / m), 2.0), 2.0)
            kappa = max(n / c**j for j, n in enumerate(norms))
            return Contraction(c=c, kappa=math.nextafter(kappa, math.inf), power=m)
        norms.append(gamma)
    raise NotContractive(
        f"certified norm of S^-m is >= 1 for every power m = 1..{MAX_POWER} "
        f"(last bound {gamma:.6g} at m={MAX_POWER})"
    )


def contraction_upper(spec: IfsSpec) -> float:
    """Certified upper bound c on the rate of ||S^{-k}||; c < 1."""
    return spec.contraction.c


def operator_norm_upper(matrix) -> float:
    return _exact.two_norm_upper(_exact.as_int_matrix(matrix))


def lipschitz_m(spec: IfsSpec) -> float:
    return 2.0 * math.pi * math.fsum(p * math.sqrt(sum(v * v for v in b))
                                     for b, p in zip(spec.B, spec.probs))


def symbol_m(spec: IfsSpec, x):
    """m(x); x may be a single point or an (n, d) array of points."""
    arr = np.asarray(x, dtype=np.float64)
    single = arr.ndim <= 1 and not (spec.dim == 1 and arr.ndim == 1 and arr.size > 1)
    pts = arr.reshape(-1, spec.dim)
    vals = np.exp(2j * np.pi * (pts @ spec.b_array.T)) @ spec.p_array
    return complex(vals[0]) if single else vals


def abs_m_grid(spec: IfsSpec, pts: np.ndarray) -> np.ndarray:
    return np.abs(np.exp(2j * np.pi * (pts @ spec.b_array.T)) @ spec.p_array)


def factor_error(spec: IfsSpec, digit_bound: float) -> float:
    """Per-factor rounding budget for the digit recursion.

    digit_bound bounds the Euclidean norm of any digit fed to the
    recursion (or of x itself on the float path).
    """
    ct = spec.contraction
    d = spec.dim
    s_abs = max(1.0, float(np.sqrt((spec.s_inv**2).sum())))
    t_bound = ct.kappa * ct.c * digit_bound / (1.0 - ct.c)
    local = (d + 2.01) * EPS * s_abs * (t_bound + digit_bound)
    eta = ct.kappa * local / (1.0 - ct.c)
    return spec.lipschitz * (eta + (d + 2) * EPS * t_bound) + (2 * len(spec.B) + 8) * EPS


def small_quotient(spec: IfsSpec) -> int:
    ct = spec.contraction
    return int(math.ceil(ct.kappa * math.sqrt(spec.dim) / (1.0 - ct.c))) + 1


def radix_digits(spec: IfsSpec, x: Sequence[int]) -> list[tuple[int, ...]]:
    """Digits D with x = sum_i S^i D[i], all entries small integers."""
    digits, top = _exact.floor_digits(spec.S, x, small_quotient(spec))
    if any(top):
        digits.append(tuple(top))
    return digits


def _is_integer_vector(x) -> bool:
    if isinstance(x, np.ndarray):
        return np.issubdtype(x.dtype, np.integer)
    return all(isinstance(v, (int, np.integer)) and not isinstance(v, bool) for v in x)


def _as_vector(spec: IfsSpec, x):
    if isinstance(x, (int, float, np.integer, np.floating)):
        x = [x]
    if isinstance(x, np.ndarray):
        x = x.reshape(-1)
        x = [int(v) for v in x] if np.issubdtype(x.dtype, np.integer) else [float(v) for v in x]
    x = list(x)
    if len(x) != spec.dim:
        raise ValueError(f"expected a vector of length {spec.dim}")
    return x


def mu_hat(spec: IfsSpec, x, tol: float = 1e-10, max_factors: int = DEFAULT_MAX_FACTORS
           ) -> CertifiedComplex:
    """Fourier transform of the invariant measure with a certified error.

    Integer inputs (arbitrarily large) are reduced exactly through their
    S-adic digits; real inputs are iterated directly in floating point.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    vec = _as_vector(spec, x)
    if _is_integer_vector(vec):
        digits = radix_digits(spec, [int(v) for v in vec])
        arr = np.array(digits, dtype=np.float64).reshape(len(digits), spec.dim)
    else:
        arr = np.array([vec], dtype=np.float64)
    if not arr.size or not np.any(arr):
        return CertifiedComplex(1.0 + 0j, 0.0)
    dbound = float(np.max(np.sqrt((arr**2).sum(axis=1))))
    ef = factor_error(spec, dbound)
    ct = spec.contraction
    value, err, nf, ok = digit_product(arr, spec.s_inv, spec.b_array, spec.p_array,
                                       spec.lipschitz, ct.c, ct.kappa, tol / 2, tol / 4, ef,
                                       max_factors)
    if not ok:
        raise TolUnreachable(f"tail bound above {tol / 2:g} after {max_factors} factors")
    if err > tol:
        raise TolUnreachable(f"rounding budget {err:.3g} exceeds tol {tol:g}")
    return CertifiedComplex(complex(value), float(err))


def sample_measure(spec: IfsSpec, count: int, depth: int, seed: int) -> np.ndarray:
    """Draws sum_{j<=depth} R^{-j} b_j with b_j i.i.d. from the weights."""
    if count < 1 or depth < 1:
        raise ValueError("count and depth must be >= 1")
    rng = np.random.default_rng(seed)
    idx = rng.choice(len(spec.B), size=(count, depth), p=spec.p_array / spec.p_array.sum())
    rinv = spec.s_inv.T
    pts = np.zeros((count, spec.dim))
    b = spec.b_array
    for j in range(depth - 1, -1, -1):
        pts = (pts + b[idx[:, j]]) @ rinv.T
    return pts


def attractor_radius(spec: IfsSpec) -> float:
    """Radius of a ball about 0 containing the attractor."""
    bmax = max(math.sqrt(sum(v * v for v in b)) for b in spec.B)
    ct = spec.contraction
    return ct.geometric_tail(1) * bmax


def exact_s_inv_power(spec: IfsSpec, p: int):
    """S^{-p} as a matrix of Fractions."""
    inv = _exact.inverse_fraction(_exact.matpow(spec.S, p))
    return inv


def fraction_vec_to_float(v) -> np.ndarray:
    return np.array([float(Fraction(x)) for x in v])
