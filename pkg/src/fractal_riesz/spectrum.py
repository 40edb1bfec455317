"""Frequency sets built by concatenating codewords, and their Schur constants.

A point of the spectrum is a word lambda_1 lambda_2 ... lambda_n where
lambda_i is a codeword of the level-i codebook (length k*q_i over the two
letters of A). The word a_0 a_1 ... a_r is identified with the integer
vector a_0 + S^p a_1 + ... + S^{pr} a_r.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from . import _exact
from .codes import Codebook, gv_greedy, min_k0
from .digit_search import DigitSystem, amplify
from .errors import Divergent, MixedSystems, RhoTooLarge, ScheduleViolation, UnknownDigit

DEFAULT_CAP = 256


@dataclass(frozen=True)
class Schedule:
    """q_n = q1 * 2^(n-1); satisfies q_1 + ... + q_{n-1} + 1 <= q_n."""

    q1: int

    def q(self, n: int) -> int:
        return self.q1 * 2 ** (n - 1)

    def take(self, n: int) -> list[int]:
        return [self.q(i) for i in range(1, n + 1)]


def _q_list(schedule, n: int) -> list[int]:
    if isinstance(schedule, Schedule):
        return schedule.take(n)
    qs = [int(v) for v in schedule]
    if len(qs) < n:
        raise ScheduleViolation(f"schedule has {len(qs)} entries, need {n}")
    return qs[:n]


def check_schedule(qs: Sequence[int]) -> None:
    total = 0
    for n, q in enumerate(qs, start=1):
        if q < 1 or total + 1 > q:
            raise ScheduleViolation(f"q_{n} = {q} < q_1 + ... + q_{n - 1} + 1 = {total + 1}")
        total += q


@dataclass(frozen=True)
class SpectrumPoint:
    freq: tuple[int, ...]
    word: tuple[int, ...]
    level: int
    system: str = ""

    def to_dict(self) -> dict:
        return {"freq": [str(v) for v in self.freq], "word": list(self.word), "level": self.level}


@dataclass
class Spectrum:
    points: list[SpectrumPoint]
    digit_system: DigitSystem
    k: int
    q_schedule: list[int]
    schur_tail: float
    levels: int
    cap: int | None = DEFAULT_CAP
    codebooks: list[Codebook] = field(default_factory=list, repr=False)

    @property
    def rho(self) -> float:
        return self.digit_system.rho

    def freqs(self) -> list[tuple[int, ...]]:
        return [pt.freq for pt in self.points]

    def to_dict(self) -> dict:
        return {
            "spec_hash": self.digit_system.spec_hash,
            "digit_system": self.digit_system.to_dict(),
            "k": self.k,
            "q": list(self.q_schedule),
            "levels": self.levels,
            "cap": self.cap,
            "points": [pt.to_dict() for pt in self.points],
            "schur_tail": self.schur_tail,
        }

    @classmethod
    def from_dict(cls, raw: dict) -> "Spectrum":
        ds = DigitSystem.from_dict(raw["digit_system"])
        tag = system_tag(ds)
        pts = [SpectrumPoint(tuple(int(v) for v in p["freq"]), tuple(int(v) for v in p["word"]),
                             int(p["level"]), tag) for p in raw["points"]]
        return cls(points=pts, digit_system=ds, k=int(raw["k"]), q_schedule=list(raw["q"]),
                   schur_tail=float(raw["schur_tail"]), levels=int(raw["levels"]),
                   cap=raw.get("cap"))


def system_tag(ds: DigitSystem) -> str:
    return f"{ds.spec_hash[:16]}:p={ds.p}:A={ds.A}"


def _digit_vector(a, d: int) -> tuple[int, ...]:
    if isinstance(a, (int, np.integer)):
        if d != 1:
            raise UnknownDigit(f"scalar digit {a} for dimension {d}")
        return (int(a),)
    return tuple(int(v) for v in a)


def encode_digits(word: Iterable, S, p: int, alphabet=None) -> tuple[int, ...]:
    """sum_i S^{p i} word[i] in exact integers (Horner from the top digit)."""
    S = _exact.as_int_matrix([[S]] if isinstance(S, (int, np.integer)) else S)
    d = len(S)
    allowed = None if alphabet is None else {_digit_vector(a, d) for a in alphabet}
    digits = [_digit_vector(a, d) for a in word]
    if allowed is not None:
        for a in digits:
            if a not in allowed:
                raise UnknownDigit(f"digit {a} not in A + {{0}}")
    Sp = _exact.matpow(S, p)
    acc = tuple([0] * d)
    for a in reversed(digits):
        acc = tuple(x + y for x, y in zip(_exact.matvec(Sp, acc), a))
    return acc


def encode_word(word, ds: DigitSystem) -> tuple[int, ...]:
    """Integer vector of a word given by digit values in A + {0}."""
    return encode_digits(word, ds.S, ds.p, ds.alphabet)


def word_digits(word: Sequence[int], ds: DigitSystem) -> list[tuple[int, ...]]:
    """Symbol indices (0 = zero digit, i = A[i-1]) to digit vectors."""
    alpha = ds.alphabet
    return [alpha[s] for s in word]


def word_metric(lam: SpectrumPoint, lam2: SpectrumPoint) -> int:
    if lam.system and lam2.system and lam.system != lam2.system:
        raise MixedSystems("points come from different digit systems")
    return sum(a != b for a, b in itertools.zip_longest(lam.word, lam2.word, fillvalue=0))


def _word_matrix(points: Sequence[SpectrumPoint]) -> np.ndarray:
    width = max((len(p.word) for p in points), default=0)
    mat = np.zeros((len(points), width), dtype=np.int8)
    for i, p in enumerate(points):
        mat[i, : len(p.word)] = p.word
    return mat


def distance_matrix(points: Sequence[SpectrumPoint], block: int = 256) -> np.ndarray:
    systems = {p.system for p in points if p.system}
    if len(systems) > 1:
        raise MixedSystems("points come from different digit systems")
    W = _word_matrix(points)
    n = len(points)
    D = np.zeros((n, n), dtype=np.int64)
    for s in range(0, n, block):
        D[s:s + block] = (W[s:s + block, None, :] != W[None, :, :]).sum(axis=2)
    return D


def schur_constant(points: Sequence[SpectrumPoint], rho) -> float:
    """max_lambda sum_{lambda' != lambda} rho^{d(lambda, lambda')}."""
    if isinstance(rho, DigitSystem):
        rho = rho.rho
    if len(points) < 2:
        return 0.0
    D = distance_matrix(points)
    W = np.where(np.eye(len(points), dtype=bool), 0.0, float(rho) ** D.astype(float))
    return float(W.sum(axis=1).max())


def schur_tail(rho: float, q_schedule, R_terms: int | None = None) -> float:
    """sum_r (4 rho)^{q_r} over the whole schedule, with a geometric remainder bound.

    For a Schedule, R_terms terms are summed exactly (default: until the
    terms drop below 1e-18) and sum_{j >= q_{R+1}} (4 rho)^j bounds the rest.
    For an explicit list, all but the last entry are summed and the last
    one starts the remainder.
    """
    x = 4.0 * rho
    if x >= 1.0:
        raise Divergent(f"4 rho = {x:.6g} >= 1; the tail does not converge")
    if isinstance(q_schedule, Schedule):
        if R_terms is None:
            R_terms = 1
            while x ** q_schedule.q(R_terms) > 1e-18 and R_terms < 60:
                R_terms += 1
        qs = q_schedule.take(R_terms + 1)
    else:
        qs = [int(v) for v in q_schedule]
        if R_terms is not None:
            qs = qs[: R_terms + 1]
        if len(qs) < 2:
            raise ValueError("an explicit schedule needs at least two entries")
        if any(b <= a for a, b in zip(qs, qs[1:])):
            raise ScheduleViolation("schedule must be strictly increasing")
    head = math.fsum(x**q for q in qs[:-1])
    return head + x ** qs[-1] / (1.0 - x)


def choose_q1(rho: float, budget: int = 4096) -> Schedule:
    """Doubling schedule with the smallest q1 whose Schur tail is below 1."""
    if 4.0 * rho >= 1.0:
        raise Divergent(f"4 rho = {4.0 * rho:.6g} >= 1")
    for q1 in range(1, budget + 1):
        if schur_tail(rho, Schedule(q1)) < 1.0:
            return Schedule(q1)
    raise Divergent(f"no q1 <= {budget} brings the tail below 1")


def plan_schedule(ds: DigitSystem, levels: int, cap: int | None = DEFAULT_CAP,
                  rho_target: float = 0.25, max_amplification: int = 64) -> tuple[DigitSystem, Schedule]:
    """Smallest extra amplification with rho < rho_target whose top-level code fits the cap.

    Keeping 2^{q_levels} <= cap means every codebook is complete, so the
    greedy search never has to reach deep into long words.
    """
    for l in range(1, max_amplification + 1):
        cand = amplify(ds, l)
        if cand.rho < min(rho_target, 0.25):
            sched = choose_q1(cand.rho)
            if cap is None or 2 ** sched.q(levels) <= cap:
                return cand, sched
    raise Divergent(f"no amplification up to {max_amplification} fits {levels} levels under cap {cap}")


def build_codebooks(k: int, qs: Sequence[int], cap: int | None) -> list[Codebook]:
    books = []
    for q in qs:
        target = 2**q if cap is None else min(2**q, cap)
        books.append(gv_greedy(k * q, q, target))
    return books


def _level_tuples(sizes: Sequence[int], cap: int | None):
    it = itertools.product(*[range(s) for s in sizes])
    return it if cap is None else itertools.islice(it, cap)


def build_spectrum(spec, ds: DigitSystem, k: int, N: int, q_schedule, cap: int | None = DEFAULT_CAP
                   ) -> Spectrum:
    """All concatenations lambda_1 ... lambda_n (n <= N), lexicographically first ``cap`` per level."""
    if ds.rho >= 0.25:
        raise RhoTooLarge(f"rho = {ds.rho:.6g} >= 1/4")
    if k < min_k0():
        raise ValueError(f"k = {k} is below k0 = {min_k0()}")
    if N < 1:
        raise ValueError("N must be >= 1")
    qs = _q_list(q_schedule, N)
    check_schedule(qs)
    books = build_codebooks(k, qs, cap)
    # bit '0' -> A[0] (symbol 1), bit '1' -> A[1] (symbol 2)
    symbols = [[tuple(1 + int(ch) for ch in w) for w in b.words] for b in books]
    tag = system_tag(ds)
    Sp = _exact.matpow(ds.S, ds.p)
    alpha = ds.alphabet
    points = []
    for n in range(1, N + 1):
        sizes = [len(symbols[i]) for i in range(n)]
        for idx in _level_tuples(sizes, cap):
            word = tuple(itertools.chain.from_iterable(symbols[i][j] for i, j in enumerate(idx)))
            acc = tuple([0] * len(ds.S))
            for s in reversed(word):
                acc = tuple(x + y for x, y in zip(_exact.matvec(Sp, acc), alpha[s]))
            points.append(SpectrumPoint(acc, word, n, tag))
    tail_sched = q_schedule if isinstance(q_schedule, Schedule) else qs
    if isinstance(tail_sched, list) and len(tail_sched) < 2:
        tail = (4.0 * ds.rho) ** tail_sched[0] / (1.0 - 4.0 * ds.rho)
    else:
        tail = schur_tail(ds.rho, tail_sched)
    return Spectrum(points=points, digit_system=ds, k=k, q_schedule=qs, schur_tail=tail,
                    levels=N, cap=cap, codebooks=books)


def last_difference_block(lam: SpectrumPoint, lam2: SpectrumPoint, qs: Sequence[int], k: int) -> int:
    """Index r (1-based) of the last codeword block where the two words differ."""
    bounds = list(itertools.accumulate(k * q for q in qs))
    width = max(len(lam.word), len(lam2.word))
    a = lam.word + (0,) * (width - len(lam.word))
    b = lam2.word + (0,) * (width - len(lam2.word))
    last = max(i for i in range(width) if a[i] != b[i])
    return next(r for r, end in enumerate(bounds, start=1) if last < end)
