"""Segmented sieve for squarefree integers."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .primes import PrimeTable

DEFAULT_SEGMENT_SIZE = 10**7


class MissingSegmentError(LookupError):
    """Raised when a squarefree lookup falls outside the sieved window."""


@dataclass(frozen=True)
class SegmentBitmap:
    """Squarefree indicator of the half-open interval [lo, hi).

    ``bits[i]`` is True iff ``lo + i`` is squarefree.
    """

    lo: int
    hi: int
    bits: np.ndarray

    def __len__(self) -> int:
        return self.hi - self.lo

    def __contains__(self, m: int) -> bool:
        return self.lo <= m < self.hi

    def __getitem__(self, m: int) -> bool:
        if not self.lo <= m < self.hi:
            raise MissingSegmentError(f"{m} outside sieved window [{self.lo}, {self.hi})")
        return bool(self.bits[m - self.lo])

    def squarefree_values(self) -> np.ndarray:
        return self.lo + np.flatnonzero(self.bits)


def sieve_segment(lo: int, hi: int, table: PrimeTable) -> SegmentBitmap:
    if lo < 1 or lo >= hi:
        raise ValueError(f"need 1 <= lo < hi, got [{lo}, {hi})")
    root = math.isqrt(hi - 1)
    if table.limit < root:
        raise ValueError(
            f"prime table up to {table.limit} cannot sieve below {hi}; need primes up to {root}"
        )
    bits = np.ones(hi - lo, dtype=bool)
    # Python ints: no overflow however large lo gets
    for p in table.primes[: np.searchsorted(table.primes, root, side="right")]:
        sq = int(p) * int(p)
        bits[(-lo) % sq :: sq] = False
    bits.setflags(write=False)
    return SegmentBitmap(lo, hi, bits)


def is_squarefree(m: int) -> bool:
    """Trial-division oracle.

    Strip every prime factor up to the cube root of m. A square of a larger
    prime can then only divide m if the cofactor is itself a perfect square.
    """
    if m < 1:
        raise ValueError(f"squarefreeness is defined for m >= 1, got {m}")
    d = 2
    while d * d * d <= m:
        if m % d == 0:
            m //= d
            if m % d == 0:
                return False
        d += 1 if d == 2 else 2
    r = math.isqrt(m)
    return m == 1 or r * r != m


def smallest_square_divisor(m: int) -> int | None:
    """Smallest prime q with q*q | m, or None when m is squarefree."""
    if m < 1:
        raise ValueError(f"m must be >= 1, got {m}")
    d = 2
    while d * d <= m:
        if m % (d * d) == 0:
            return d
        if m % d == 0:
            m //= d
        d += 1 if d == 2 else 2
    return None


def squarefree_mask_trial(values, table: PrimeTable) -> np.ndarray:
    """Squarefree flags for an array of values by vectorised trial division.

    Divides out every prime up to the cube root of the largest value, failing
    any entry divisible by p^2; the cofactor left over has at most two prime
    factors, so it is squarefree unless it is a perfect square above 1. This
    never walks p^2 multiples, so it serves as an independent check on
    ``sieve_segment``.
    """
    m = np.array(values, dtype=np.int64)
    if m.size == 0:
        return np.zeros(0, dtype=bool)
    if m.min() < 1:
        raise ValueError("values must be positive")
    top = int(m.max())
    cube = round(top ** (1 / 3)) + 1
    if table.limit < cube:
        raise ValueError(f"prime table limit {table.limit} below cube root {cube}")
    ok = np.ones(m.shape, dtype=bool)
    for p in table.upto(cube):
        p = int(p)
        ok &= m % (p * p) != 0
        hit = m % p == 0
        m[hit] //= p
    r = np.sqrt(m.astype(np.float64)).round().astype(np.int64)
    ok &= ~((r * r == m) & (m > 1))
    return ok
