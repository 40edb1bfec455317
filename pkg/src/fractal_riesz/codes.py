"""Binary codes with a minimum Hamming distance (greedy Gilbert-Varshamov)."""
from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import zip_longest

import numpy as np

from .errors import Unreachable

_CHUNK = 4096
MAX_SCAN = 1 << 22


@dataclass(frozen=True)
class Codebook:
    length: int
    min_dist: int
    words: tuple[str, ...]

    def __len__(self):
        return len(self.words)

    def to_dict(self) -> dict:
        return {"length": self.length, "min_dist": self.min_dist, "words": list(self.words)}

    @classmethod
    def from_dict(cls, raw: dict) -> "Codebook":
        return cls(int(raw["length"]), int(raw["min_dist"]), tuple(raw["words"]))


def binary_entropy(x: float) -> float:
    if not 0.0 < x < 1.0:
        raise ValueError("binary entropy is defined on (0, 1)")
    return -x * math.log2(x) - (1.0 - x) * math.log2(1.0 - x)


def min_k0(k_max: int = 1000) -> int:
    """Smallest k >= 2 with (1 - H(1/k)) k >= 1."""
    for k in range(2, k_max + 1):
        if (1.0 - binary_entropy(1.0 / k)) * k >= 1.0:
            return k
    raise RuntimeError("no k found")  # pragma: no cover


def hamming(w1, w2, pad=None) -> int:
    """Number of differing positions; the shorter word is padded with the zero symbol."""
    if pad is None:
        pad = "0" if isinstance(w1, str) or isinstance(w2, str) else 0
    return sum(a != b for a, b in zip_longest(w1, w2, fillvalue=pad))


def ball_volume(length: int, radius: int) -> int:
    """sum_{j<=radius} C(length, j), exact."""
    return sum(math.comb(length, j) for j in range(radius + 1))


def gv_lower_bound(length: int, min_dist: int, q: int = 2) -> float:
    """q^m / sum_{j<d} C(m, j)(q-1)^j."""
    denom = sum(math.comb(length, j) * (q - 1) ** j for j in range(min_dist))
    return q**length / denom


def entropy_volume_ok(k: int, n: int, slack: float = 1e-9) -> bool:
    """Checks sum_{j<=n} C(kn, j) < 2^{H(1/k) k n} with exact binomials."""
    vol = ball_volume(k * n, n)
    return math.log2(vol) + slack < binary_entropy(1.0 / k) * k * n


def _popcount(x: np.ndarray) -> np.ndarray:
    if hasattr(np, "bitwise_count"):
        return np.bitwise_count(x)
    x = x - ((x >> np.uint64(1)) & np.uint64(0x5555555555555555))
    x = (x & np.uint64(0x3333333333333333)) + ((x >> np.uint64(2)) & np.uint64(0x3333333333333333))
    x = (x + (x >> np.uint64(4))) & np.uint64(0x0F0F0F0F0F0F0F0F)
    return (x * np.uint64(0x0101010101010101)) >> np.uint64(56)


def _greedy_ints(length: int, min_dist: int, size_target: int, max_scan: int) -> list[int]:
    """Lexicographic greedy code as integers (MSB = first position).

    At most ``max_scan`` candidate words are examined.
    """
    total = min(1 << length, max_scan)
    code: list[int] = []
    if length <= 63:
        arr = np.zeros(0, dtype=np.uint64)
        start = 0
        while start < total and len(code) < size_target:
            stop = min(start + _CHUNK, total)
            cand = np.arange(start, stop, dtype=np.uint64)
            if arr.size:
                dist = _popcount(cand[:, None] ^ arr[None, :])
                cand = cand[(dist >= min_dist).all(axis=1)]
            fresh: list[int] = []
            for w in cand.tolist():
                if all((w ^ v).bit_count() >= min_dist for v in fresh):
                    fresh.append(w)
                    if len(code) + len(fresh) >= size_target:
                        break
            code.extend(fresh)
            if fresh:
                arr = np.array(code, dtype=np.uint64)
            start = stop
        return code
    w = 0
    while w < total and len(code) < size_target:
        if all((w ^ v).bit_count() >= min_dist for v in code):
            code.append(w)
        w += 1
    return code


def gv_greedy(length: int, min_dist: int, size_target: int, max_scan: int = MAX_SCAN) -> Codebook:
    """Admit binary words in lexicographic order while distance >= min_dist to all admitted.

    The scan stops after ``max_scan`` candidates; long words at large
    distance push admitted words far down the order, so reaching the
    target can need more than any practical scan.
    """
    if not 1 <= min_dist <= length:
        raise ValueError("need 1 <= min_dist <= length")
    if size_target < 1:
        raise ValueError("size_target must be positive")
    ints = _greedy_ints(length, min_dist, size_target, max_scan)
    words = tuple(format(w, f"0{length}b") for w in ints)
    book = Codebook(length, min_dist, words)
    if len(words) < size_target:
        scanned = "all" if max_scan >= 1 << length else f"the first {max_scan}"
        raise Unreachable(f"only {len(words)} words of length {length} at distance {min_dist} "
                          f"among {scanned} candidates", achieved=book)
    return book


def verify_code(cb: Codebook) -> bool:
    words = list(cb.words)
    if len(set(words)) != len(words) or any(len(w) != cb.length for w in words):
        return False
    for i in range(len(words)):
        for j in range(i + 1, len(words)):
            if hamming(words[i], words[j]) < cb.min_dist:
                return False
    return True
