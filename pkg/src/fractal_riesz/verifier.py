"""Independent certification of a constructed spectrum.

Gram entries are recomputed from the integer frequencies alone (through
their S-adic digits), so nothing here trusts the word bookkeeping of the
construction except where a statement is explicitly about words (the
decay audit compares against rho^{d(lambda, lambda')}).
"""
from __future__ import annotations

import bisect
import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .digit_search import DigitSystem
from .errors import TooLarge
from .ifs_core import IfsSpec, factor_error, make_ifs, operator_norm_upper, radix_digits
from .kernels import gram_products
from .spectrum import Schedule, Spectrum, SpectrumPoint, distance_matrix, schur_constant, schur_tail

EPS = 2.0**-53
MAX_GRAM = 2048


@dataclass
class EigBounds:
    """Extreme eigenvalues: computed values plus certified outer enclosures."""

    min: float
    max: float
    min_lower: float
    max_upper: float
    gersh_lower: float
    gersh_upper: float

    def __iter__(self):
        return iter((self.min, self.max))


@dataclass
class GramReport:
    size: int
    gram: np.ndarray
    gram_err: np.ndarray
    schur_C: float = float("nan")
    schur_tail: float = float("nan")
    eig_min: float = float("nan")
    eig_max: float = float("nan")
    eig: EigBounds | None = None
    bessel_bound: float = float("nan")
    riesz_ok: bool = False
    worst_pair_violation: float = float("nan")
    converged: bool = True

    @property
    def basis_bounds(self) -> tuple[float, float]:
        lo = self.eig.min_lower if self.eig else self.eig_min
        hi = self.eig.max_upper if self.eig else self.eig_max
        return math.sqrt(max(lo, 0.0)), math.sqrt(hi)

    def summary(self) -> dict:
        out = {
            "size": self.size,
            "schur_C": self.schur_C,
            "schur_tail": self.schur_tail,
            "eig_min": self.eig_min,
            "eig_max": self.eig_max,
            "bessel_bound": self.bessel_bound,
            "riesz_ok": self.riesz_ok,
            "worst_pair_violation": self.worst_pair_violation,
            "max_entry_err": float(self.gram_err.max()) if self.size else 0.0,
            "tail_converged": self.converged,
            "basis_bounds": list(self.basis_bounds),
        }
        if self.eig is not None:
            out["eig_enclosure"] = [self.eig.min_lower, self.eig.max_upper]
            out["gershgorin"] = [self.eig.gersh_lower, self.eig.gersh_upper]
        return out


def _freq(pt) -> tuple[int, ...]:
    if isinstance(pt, SpectrumPoint):
        return pt.freq
    if isinstance(pt, (int, np.integer)):
        return (int(pt),)
    return tuple(int(v) for v in pt)


def digit_tensor(spec: IfsSpec, points: Sequence) -> np.ndarray:
    """Zero-padded S-adic digit arrays, shape (n, K, d), one row per point."""
    rows = [radix_digits(spec, _freq(p)) for p in points]
    width = max((len(r) for r in rows), default=0)
    out = np.zeros((len(rows), max(width, 1), spec.dim))
    for i, r in enumerate(rows):
        if r:
            out[i, : len(r)] = np.array(r, dtype=np.float64)
    return out


def gram_matrix(spec: IfsSpec, points: Sequence, tol: float = 1e-10, max_size: int = MAX_GRAM,
                max_factors: int = 10**6) -> GramReport:
    """G[i, j] = mu_hat(lambda_i - lambda_j) with entrywise error bounds."""
    n = len(points)
    if n > max_size:
        raise TooLarge(f"{n} points exceed the Gram size cap {max_size}")
    if n == 0:
        return GramReport(0, np.zeros((0, 0), complex), np.zeros((0, 0)))
    dig = digit_tensor(spec, points)
    # pairwise digits are differences, hence the factor 2
    dbound = 2.0 * float(np.sqrt((dig**2).sum(axis=2)).max())
    ef = factor_error(spec, max(dbound, 1.0))
    ct = spec.contraction
    G, E, ok = gram_products(dig, spec.s_inv, spec.b_array, spec.p_array, spec.lipschitz, ct.c,
                             ct.kappa, tol / 2, tol / 4, ef, max_factors)
    np.fill_diagonal(G, 1.0)
    np.fill_diagonal(E, 0.0)
    return GramReport(size=n, gram=G, gram_err=E, converged=ok)


def eig_bounds(gram: np.ndarray, err: np.ndarray | None = None) -> EigBounds:
    """Extreme eigenvalues of a Hermitian matrix with outer enclosures.

    Gershgorin discs give the fast rigorous interval. The tight values come
    from a full Hermitian eigendecomposition; the enclosure adds the
    Bauer-Fike radius ||X^{-1} R|| for the computed eigenvectors X and
    residual R, plus the Weyl shift from entrywise errors ``err``.
    """
    G = np.asarray(gram)
    n = G.shape[0]
    err = np.zeros(G.shape) if err is None else np.asarray(err)
    err_norm = float(err.sum(axis=1).max()) if n else 0.0
    absG = np.abs(G)
    diag = np.real(np.diag(G))
    radius = absG.sum(axis=1) - np.abs(np.diag(G)) + err.sum(axis=1)
    gersh_lo = float((diag - radius).min())
    gersh_hi = float((diag + radius).max())
    w, X = np.linalg.eigh(G)
    R = G @ X - X * w
    F = X.conj().T @ X - np.eye(n)
    f = float(np.linalg.norm(F))
    gnorm = float(np.linalg.norm(G))
    rounding = 4.0 * n * EPS * (gnorm + float(np.abs(w).max())) * math.sqrt(n)
    if f < 1.0:
        bf = (float(np.linalg.norm(R)) + rounding) / math.sqrt(1.0 - f)
    else:  # pragma: no cover - eigenvectors from eigh are orthonormal to rounding
        bf = math.inf
    lo = float(w[0])
    hi = float(w[-1])
    return EigBounds(min=lo, max=hi,
                     min_lower=max(lo - bf - err_norm, gersh_lo),
                     max_upper=min(hi + bf + err_norm, gersh_hi),
                     gersh_lower=gersh_lo, gersh_upper=gersh_hi)


def pairwise_decay_audit(spec: IfsSpec, spectrum: Spectrum, tol: float = 1e-10,
                         rho: float | None = None, report: GramReport | None = None) -> float:
    """max over distinct pairs of |mu_hat(lambda - lambda')| - rho^{d(lambda, lambda')}."""
    rho = spectrum.rho if rho is None else rho
    report = report or gram_matrix(spec, spectrum.points, tol)
    D = distance_matrix(spectrum.points)
    n = len(spectrum.points)
    if n < 2:
        return -math.inf
    iu = np.triu_indices(n, 1)
    return float((np.abs(report.gram[iu]) - float(rho) ** D[iu].astype(float)).max())


def riesz_certificate(spec: IfsSpec, spectrum: Spectrum, tol: float = 1e-10) -> GramReport:
    rep = gram_matrix(spec, spectrum.points, tol)
    rho = spectrum.rho
    rep.schur_tail = spectrum_tail(spectrum)
    rep.schur_C = schur_constant(spectrum.points, rho)
    if rep.size:
        rep.eig = eig_bounds(rep.gram, rep.gram_err)
        rep.eig_min, rep.eig_max = rep.eig.min_lower, rep.eig.max_upper
    else:
        rep.eig_min = rep.eig_max = 1.0
    rep.bessel_bound = 1.0 + rep.schur_tail
    audit = pairwise_decay_audit(spec, spectrum, tol, report=rep) if rep.size > 1 else 0.0
    rep.worst_pair_violation = max(audit, 0.0)
    rep.riesz_ok = bool(rep.schur_tail < 1.0 and rep.eig_min > 0.0 and rep.converged)
    return rep


def spectrum_tail(spectrum: Spectrum) -> float:
    """Infinite-set Schur bound for the spectrum's (doubling) schedule."""
    qs = list(spectrum.q_schedule)
    if all(b == 2 * a for a, b in zip(qs, qs[1:])):
        return schur_tail(spectrum.rho, Schedule(qs[0]))
    if len(qs) < 2:
        x = 4.0 * spectrum.rho
        return x ** qs[0] / (1.0 - x)
    return schur_tail(spectrum.rho, qs)


@dataclass
class BeurlingEstimate:
    r: float
    density_r: float
    window_data: list = field(default_factory=list)
    profile: list = field(default_factory=list)
    dim_lower_theoretical: float = float("nan")

    def to_dict(self) -> dict:
        return {
            "r": self.r,
            "density_r": self.density_r,
            "profile": [{"log2_h": j, "sup": v} for j, v in self.profile],
            "windows": [{"center": [str(x) for x in c], "log2_h": j, "count": n}
                        for c, j, n in self.window_data],
            "dim_lower_theoretical": self.dim_lower_theoretical,
        }


def beurling_density(points: Sequence, r: float, window_set: Iterable[int] | None = None
                     ) -> BeurlingEstimate:
    """Window counts #(Lambda ∩ (x + h[-1,1]^d)) / h^r over centers {0} + Lambda.

    Scales are h = 2^j for j = 0 .. ceil(log2 diam) unless ``window_set``
    lists the exponents j. ``density_r`` is the sup at the largest scale,
    the finite-set stand-in for the limsup; ``profile`` holds every scale.
    """
    if r <= 0:
        raise ValueError("r must be positive")
    pts = [_freq(p) for p in points]
    if not pts:
        return BeurlingEstimate(r, 0.0)
    d = len(pts[0])
    centers = [tuple([0] * d)] + pts
    dists = []
    for c in centers:
        dists.append(sorted(max(abs(a - b) for a, b in zip(p, c)) for p in pts))
    diam = max(row[-1] for row in dists)
    top = max(diam - 1, 0).bit_length() if diam > 1 else (1 if diam == 1 else 0)
    scales = sorted(set(window_set)) if window_set is not None else list(range(top + 1))
    profile, windows = [], []
    for j in scales:
        h = 1 << j
        best, arg = -1, 0
        for ci, row in enumerate(dists):
            cnt = bisect.bisect_right(row, h)
            if cnt > best:
                best, arg = cnt, ci
        val = math.exp(math.log(best) - r * j * math.log(2.0)) if best > 0 else 0.0
        profile.append((j, val))
        windows.append((centers[arg], j, best))
    return BeurlingEstimate(r=r, density_r=profile[-1][1], window_data=windows, profile=profile)


@dataclass
class DimBound:
    value: float
    norm_S: float
    witnesses: list = field(default_factory=list)

    @property
    def witnesses_ok(self) -> bool:
        return all(w["ok"] for w in self.witnesses)

    def to_dict(self) -> dict:
        return {"value": self.value, "norm_S_upper": self.norm_S, "witnesses": self.witnesses,
                "witnesses_ok": self.witnesses_ok}


def dim_lower_bound(ds: DigitSystem, k: int, spec: IfsSpec | None = None,
                    spectrum: Spectrum | None = None) -> DimBound:
    """ln 2 / (2 k p ln ||S||), with ball-count witnesses on a truncation.

    Level-n words have length k(q_1+...+q_n) <= 2 k q_n - 1 blocks, so their
    frequencies lie in the ball of radius D ||S||^{2 k q_n p} with
    D = max ||a|| / (||S||^p - 1).
    """
    S = ds.S if spec is None else spec.S
    s = operator_norm_upper(S)
    p = ds.p
    value = math.log(2.0) / (2.0 * k * p * math.log(s))
    out = DimBound(value=value, norm_S=s)
    if spectrum is None:
        return out
    cmax = max(math.sqrt(sum(v * v for v in a)) for a in ds.A)
    logD = math.log(cmax) - math.log(s**p - 1.0)
    norms = [(pt.level, 0.5 * math.log(sum(v * v for v in pt.freq)) if any(pt.freq) else -math.inf)
             for pt in spectrum.points]
    for n, q in enumerate(spectrum.q_schedule, start=1):
        log_radius = logD + 2.0 * k * q * p * math.log(s)
        count = sum(1 for lvl, ln in norms if lvl <= n and ln <= log_radius)
        out.witnesses.append({"level": n, "q": q, "log_radius": log_radius, "count": count,
                              "required": 2**q, "ok": count >= 2**q})
    return out


CANTOR3 = {"dim": 1, "R": [[3]], "B": [[0], [2]], "p": [0.5, 0.5]}


def cantor_3n_demo(N: int, tol: float = 1e-10) -> list[float]:
    """Top Gram eigenvalue of {3^0, ..., 3^{n-1}} for n = 2..N (Cantor-3 measure)."""
    if N < 2:
        raise ValueError("N must be >= 2")
    spec = make_ifs(3, [0, 2])
    rep = gram_matrix(spec, [(3**j,) for j in range(N)], tol)
    return [float(np.linalg.eigvalsh(rep.gram[:n, :n])[-1]) for n in range(2, N + 1)]


def lebesgue_identity_demo(n: int = 32, tol: float = 1e-10) -> GramReport:
    spec = make_ifs(2, [0, 1])
    rep = gram_matrix(spec, [(j,) for j in range(n)], tol)
    rep.eig = eig_bounds(rep.gram, rep.gram_err)
    rep.eig_min, rep.eig_max = rep.eig.min_lower, rep.eig.max_upper
    return rep
