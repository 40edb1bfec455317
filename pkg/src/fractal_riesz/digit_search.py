"""Search and certification of digit systems (p, A, rho).

A digit system is a scaling exponent p and two nonzero integer digits
A = {a0, a1}, pairwise incongruent with 0 modulo S^p Z^d, such that

    |m(S^{-p}(a - a') + x)| <= rho < 1

for all distinct a, a' in A + {0} and every x in the ball of radius
M c^p / (1 - c^p). The sup over the ball is bounded rigorously by a grid
plus a padding term; see :func:`audit_sup`.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Sequence

import numpy as np

from . import _exact
from .errors import CertificationFailed, SearchExhausted
from .ifs_core import Contraction, IfsSpec, abs_m_grid, spec_hash

Digit = tuple[int, ...]


@dataclass(frozen=True)
class DigitSystem:
    p: int
    A: tuple[Digit, ...]
    rho: float
    M: float
    ball_radius: float
    amplification: int
    S: tuple
    contraction: Contraction
    base_p: int
    base_A: tuple[Digit, ...]
    base_rho: float
    spec_hash: str = ""

    @property
    def alphabet(self) -> tuple[Digit, ...]:
        """A + {0}, zero first."""
        return (tuple([0] * len(self.S)),) + tuple(self.A)

    def to_dict(self) -> dict:
        return {
            "p": self.p,
            "A": [list(a) for a in self.A],
            "rho": self.rho,
            "M": self.M,
            "ball_radius": self.ball_radius,
            "amplification": self.amplification,
            "base": {"p": self.base_p, "A": [list(a) for a in self.base_A], "rho": self.base_rho},
            "contraction": {"c": self.contraction.c, "kappa": self.contraction.kappa,
                            "power": self.contraction.power},
            "S": [list(r) for r in self.S],
            "spec_hash": self.spec_hash,
        }

    @classmethod
    def from_dict(cls, raw: dict) -> "DigitSystem":
        base = raw["base"]
        return cls(
            p=int(raw["p"]),
            A=tuple(tuple(int(v) for v in a) for a in raw["A"]),
            rho=float(raw["rho"]),
            M=float(raw["M"]),
            ball_radius=float(raw["ball_radius"]),
            amplification=int(raw["amplification"]),
            S=_exact.as_int_matrix(raw["S"]),
            contraction=Contraction(**raw["contraction"]),
            base_p=int(base["p"]),
            base_A=tuple(tuple(int(v) for v in a) for a in base["A"]),
            base_rho=float(base["rho"]),
            spec_hash=raw.get("spec_hash", ""),
        )


@dataclass(frozen=True)
class SearchBudget:
    grid: float = 0.05
    margin: float = 0.05
    deltas: tuple[float, ...] = (0.3, 0.2, 0.1, 0.05, 0.025, 0.0125, 0.00625)
    max_pairs: int = 10_000
    n_certify: int = 16
    padding: float = 0.02


@dataclass
class SupAudit:
    rho: float
    M: float
    ball_radius: float
    spacing: float
    n_points: int
    centers: list = field(default_factory=list)


def _as_digits(A) -> tuple[Digit, ...]:
    out = []
    for a in A:
        if isinstance(a, (int, np.integer)):
            a = (a,)
        out.append(tuple(int(v) for v in a))
    return tuple(out)


def check_incongruence(S, p: int, A) -> bool:
    if p < 1:
        raise ValueError("p must be >= 1")
    S = _exact.as_int_matrix([[S]] if isinstance(S, (int, np.integer)) else S)
    digits = _as_digits(A)
    alphabet = [tuple([0] * len(S))] + list(digits)
    P = _exact.matpow(S, p)
    for a, b in itertools.combinations(alphabet, 2):
        diff = tuple(x - y for x, y in zip(a, b))
        if _exact.solve_is_integral(P, diff):
            return False
    return True


def _min_p(c: float, kappa: float, delta: float) -> int:
    p = 1
    while True:
        cp = c**p
        if 4.0 * kappa * cp / (1.0 - cp) < delta:
            return p
        p += 1


def min_p_for_delta(spec_or_c, delta: float) -> int:
    """Smallest p with 4 c^p / (1 - c^p) < delta (c certified)."""
    if not 0.0 < delta < 1.0:
        raise ValueError("delta must lie in (0, 1)")
    if isinstance(spec_or_c, IfsSpec):
        ct = spec_or_c.contraction
        return _min_p(ct.c, ct.kappa, delta)
    if isinstance(spec_or_c, Contraction):
        return _min_p(spec_or_c.c, spec_or_c.kappa, delta)
    return _min_p(float(spec_or_c), 1.0, delta)


def difference_centers(S, p: int, A) -> list[np.ndarray]:
    """S^{-p}(a - a') for every unordered distinct pair of A + {0}."""
    digits = _as_digits(A)
    alphabet = [tuple([0] * len(S))] + list(digits)
    inv = _exact.inverse_fraction(_exact.matpow(S, p))
    out = []
    for a, b in itertools.combinations(alphabet, 2):
        diff = [x - y for x, y in zip(a, b)]
        out.append(np.array([float(sum(Fraction(m) * v for m, v in zip(row, diff)))
                             for row in inv]))
    return out


def _hessian_bound(spec: IfsSpec) -> float:
    """Bound on the spectral norm of the Hessian of |m|^2."""
    tot = 0.0
    for (b, pb), (b2, pb2) in itertools.product(zip(spec.B, spec.probs), repeat=2):
        tot += pb * pb2 * sum((x - y) ** 2 for x, y in zip(b, b2))
    return 4.0 * math.pi**2 * tot


def _grid(radius: float, h: float, d: int) -> np.ndarray:
    """Sample points inside the closed ball, every ball point within h*sqrt(d)/2 of one.

    Points of hZ^d near the ball are kept and those outside are projected
    radially onto the sphere.
    """
    n = int(math.ceil(radius / h)) + 2
    axis = np.arange(-n, n + 1) * h
    mesh = np.stack(np.meshgrid(*([axis] * d), indexing="ij"), axis=-1).reshape(-1, d)
    norms = np.sqrt((mesh**2).sum(axis=1))
    # one extra shell so that the sphere itself is always sampled
    near = norms <= radius + h * math.sqrt(d)
    mesh, norms = mesh[near], norms[near]
    # radial projection onto the ball is nonexpansive, so covering is kept
    out = norms > radius
    mesh[out] *= (radius / norms[out])[:, None]
    return np.unique(mesh, axis=0)


def _sup_bound(spec: IfsSpec, pts: np.ndarray, cover: float, hess: float) -> float:
    """Certified sup of |m| over the union of balls of radius ``cover`` about pts.

    Two rigorous bounds are combined: Lipschitz padding L*cover on |m|, and
    a second-order bound on |m|^2 using its gradient at the grid point.
    """
    phase = np.exp(2j * np.pi * (pts @ spec.b_array.T)) * spec.p_array
    m = phase.sum(axis=1)
    absm = np.abs(m)
    lip = float(absm.max()) + spec.lipschitz * cover
    grad_m = 2j * np.pi * (phase @ spec.b_array)
    grad_f = 2.0 * np.real(np.conj(m)[:, None] * grad_m)
    f = absm**2 + np.sqrt((grad_f**2).sum(axis=1)) * cover + 0.5 * hess * cover**2
    taylor = math.sqrt(float(f.max()))
    return min(lip, taylor) + 1e-12


def audit_sup(spec: IfsSpec, p: int, A, padding: float = 0.02, refine: int = 1) -> SupAudit:
    """Grid audit of max |m(S^{-p}(a-a') + x)| over pairs and the ball.

    The grid spacing h is chosen so that L*h*sqrt(d)/2 <= padding, then
    divided by ``refine`` for independent re-audits.
    """
    d = spec.dim
    ct = spec.contraction
    centers = difference_centers(spec.S, p, A)
    M = max(float(np.sqrt((c**2).sum())) for c in centers) * (1.0 + 1e-14)
    radius = M * ct.geometric_tail(p)
    h = 2.0 * padding / (spec.lipschitz * math.sqrt(d)) / refine
    offsets = _grid(radius, h, d)
    cover = h * math.sqrt(d) / 2.0
    hess = _hessian_bound(spec)
    worst = 0.0
    for c in centers:
        worst = max(worst, _sup_bound(spec, c + offsets, cover, hess))
    return SupAudit(rho=worst, M=M, ball_radius=radius, spacing=h,
                    n_points=len(offsets) * len(centers), centers=centers)


def certify_rho(spec: IfsSpec, p: int, A, padding: float = 0.02) -> float:
    if not check_incongruence(spec.S, p, A):
        raise CertificationFailed("digits are congruent modulo S^p Z^d; m = 1 on their difference")
    audit = audit_sup(spec, p, A, padding)
    if audit.rho >= 1.0:
        raise CertificationFailed(
            f"certified sup {audit.rho:.6f} >= 1: a digit difference is too close to the "
            "set where |m| = 1")
    return audit.rho


def _system(spec: IfsSpec, p: int, A, audit: SupAudit) -> DigitSystem:
    A = _as_digits(A)
    return DigitSystem(p=p, A=A, rho=audit.rho, M=audit.M, ball_radius=audit.ball_radius,
                       amplification=1, S=spec.S, contraction=spec.contraction, base_p=p,
                       base_A=A, base_rho=audit.rho, spec_hash=spec_hash(spec))


def amplify(ds: DigitSystem, l: int) -> DigitSystem:
    """Replace every digit a by the block a a ... a (l copies) at scale S^p."""
    if l < 1:
        raise ValueError("l must be >= 1")
    if l == 1:
        return ds
    Sp = _exact.matpow(ds.S, ds.p)
    new_digits = []
    for a in ds.A:
        acc = tuple([0] * len(a))
        power = _exact.identity(len(a))
        for _ in range(l):
            acc = tuple(x + y for x, y in zip(acc, _exact.matvec(power, a)))
            power = _exact.matmul(power, Sp)
        new_digits.append(acc)
    p_new = ds.p * l
    centers = difference_centers(ds.S, p_new, new_digits)
    M = max(float(np.sqrt((c**2).sum())) for c in centers)
    amp = ds.amplification * l
    return replace(ds, p=p_new, A=tuple(new_digits), rho=ds.base_rho**amp, M=M,
                   ball_radius=M * ds.contraction.geometric_tail(p_new), amplification=amp)


def amplification_needed(rho: float, target: float) -> int:
    l = 1
    while rho**l >= target:
        l += 1
    return l


def _near_unimodular(spec: IfsSpec, pts: np.ndarray, margin: float) -> np.ndarray:
    """Mask of points that could lie within ``margin`` of {x : b.x in Z for all b}."""
    near = np.ones(len(pts), dtype=bool)
    for b in spec.B:
        nb = math.sqrt(sum(v * v for v in b))
        if nb == 0:
            continue
        proj = pts @ np.array(b, dtype=float)
        dist = np.abs(proj - np.round(proj)) / nb
        near &= dist < margin
    return near


def _candidates(spec: IfsSpec, p: int, budget: SearchBudget):
    d = spec.dim
    axis = np.arange(-int(1 / budget.grid), int(1 / budget.grid) + 1) * budget.grid
    mesh = np.stack(np.meshgrid(*([axis] * d), indexing="ij"), axis=-1).reshape(-1, d)
    mesh = mesh[np.sqrt((mesh**2).sum(axis=1)) <= 1.0 + 1e-12]
    mesh = mesh[~_near_unimodular(spec, mesh, budget.margin)]
    Sp = np.array(_exact.matpow(spec.S, p), dtype=float)
    ints = {tuple(int(v) for v in np.rint(Sp @ x)) for x in mesh}
    ints.discard(tuple([0] * d))
    inv = _exact.inverse_fraction(_exact.matpow(spec.S, p))
    inv_f = np.array([[float(v) for v in row] for row in inv])
    # |m| at every pair center depends only on b.S^{-p}a mod 1, so keep one
    # representative (shortest S^{-p}a) per residue signature
    groups = {}
    for a in ints:
        y = inv_f @ np.array(a, dtype=float)
        sig = tuple(round(float(v) % 1.0, 9) % 1.0 for v in spec.b_array @ y)
        key = (float(np.sqrt(y @ y)), sum(abs(v) for v in a), a)
        if sig not in groups or key < groups[sig][0]:
            groups[sig] = (key, y)
    scored = []
    for (ny, na, a), y in groups.values():
        scored.append((float(abs_m_grid(spec, y[None, :])[0]), ny, na, a))
    scored.sort()
    keep = int(math.isqrt(2 * budget.max_pairs)) + 1
    return [t[-1] for t in scored[:keep]], inv_f


def _norm(a) -> float:
    return math.sqrt(sum(v * v for v in a))


def find_digit_system(spec: IfsSpec, rho_target: float, budget: SearchBudget | None = None
                      ) -> DigitSystem:
    """Certified two-digit system, amplified until rho < rho_target."""
    if not 0.0 < rho_target < 1.0:
        raise ValueError("rho_target must lie in (0, 1)")
    budget = budget or SearchBudget()
    Sp_cache = {}
    best_uncertified = None
    for delta in budget.deltas:
        p = min_p_for_delta(spec, delta)
        if p in Sp_cache:
            continue
        digits, inv_f = _candidates(spec, p, budget)
        Sp_cache[p] = True
        pairs = []
        for a0, a1 in itertools.combinations(sorted(digits), 2):
            v0, v1 = np.array(a0, float), np.array(a1, float)
            ys = np.stack([inv_f @ v0, inv_f @ v1, inv_f @ (v0 - v1)])
            score = float(abs_m_grid(spec, ys).max())
            pairs.append((score, _norm(a0) + _norm(a1), (a0, a1)))
        pairs.sort()
        certified = []
        tried = 0
        for score, nsum, pair in pairs:
            if tried >= budget.n_certify:
                break
            if not check_incongruence(spec.S, p, pair):
                continue
            tried += 1
            audit = audit_sup(spec, p, pair, budget.padding)
            if best_uncertified is None or audit.rho < best_uncertified[0]:
                best_uncertified = (audit.rho, p, pair)
            if audit.rho < 1.0:
                certified.append((audit.rho, nsum, pair, audit))
        if certified:
            certified.sort(key=lambda t: (t[0], t[1], t[2]))
            rho, _, pair, audit = certified[0]
            ds = _system(spec, p, pair, audit)
            if ds.rho >= rho_target:
                ds = amplify(ds, amplification_needed(ds.rho, rho_target))
            return ds
    raise SearchExhausted("no certified digit system within the search budget",
                          best=best_uncertified)


def reaudit(spec: IfsSpec, ds: DigitSystem, padding: float = 0.02, refine: int = 2) -> float:
    """Independent re-certification on a finer grid; returns the amplified rho."""
    if not check_incongruence(spec.S, ds.base_p, ds.base_A):
        raise CertificationFailed("base digits are congruent")
    if not check_incongruence(spec.S, ds.p, ds.A):
        raise CertificationFailed("amplified digits are congruent")
    base = audit_sup(spec, ds.base_p, ds.base_A, padding, refine=refine).rho
    if base >= 1.0:
        raise CertificationFailed(f"re-audited rho {base:.6f} >= 1")
    return base**ds.amplification
