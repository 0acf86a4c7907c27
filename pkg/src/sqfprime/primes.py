"""Prime tables, pi(x) and pi(x; m, a).

The table is a sorted ``int64`` array of every prime up to ``limit``.
Rank queries go through ``numpy.searchsorted``; progression counts reduce
the prefix of the array modulo ``m``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

# Largest table anything in the package needs is sqrt(59**8) ~ 1.22e7;
# allow headroom but refuse silly requests.
MAX_LIMIT = 2**32


@dataclass(frozen=True)
class PrimeTable:
    limit: int
    primes: np.ndarray

    def __len__(self) -> int:
        return len(self.primes)

    def __iter__(self):
        return (int(p) for p in self.primes)

    def __getitem__(self, i):
        return int(self.primes[i])

    def nth(self, l: int) -> int:
        """Return the l-th prime (1-based, so ``nth(1) == 2``)."""
        if l < 1 or l > len(self.primes):
            raise IndexError(f"prime index {l} outside table of {len(self.primes)} primes")
        return int(self.primes[l - 1])

    def upto(self, x: int) -> np.ndarray:
        """View of the primes <= x."""
        _check_range(self, x)
        return self.primes[: prime_count(self, x)]


def build_prime_table(limit: int) -> PrimeTable:
    if limit < 2:
        raise ValueError(f"prime table limit must be >= 2, got {limit}")
    if limit > MAX_LIMIT:
        raise ValueError(f"prime table limit {limit} exceeds {MAX_LIMIT}")
    limit = int(limit)
    # odd-only sieve: index i represents 2*i + 1
    size = (limit - 1) // 2 + 1
    odd = np.ones(size, dtype=bool)
    odd[0] = False
    for i in range(1, (math.isqrt(limit) - 1) // 2 + 1):
        if odd[i]:
            p = 2 * i + 1
            odd[p * p // 2 :: p] = False
    primes = np.concatenate(([2], 2 * np.flatnonzero(odd) + 1)).astype(np.int64)
    primes.setflags(write=False)
    return PrimeTable(limit, primes)


def _check_range(table: PrimeTable, x: int) -> None:
    if x > table.limit:
        raise IndexError(f"x={x} exceeds prime table limit {table.limit}")


def prime_count(table: PrimeTable, x: int) -> int:
    _check_range(table, x)
    if x < 2:
        return 0
    return int(np.searchsorted(table.primes, x, side="right"))


def prime_count_ap(table: PrimeTable, x: int, modulus: int, residue: int) -> int:
    """pi(x; modulus, residue): primes p <= x with p = residue (mod modulus)."""
    if modulus < 1:
        raise ValueError(f"modulus must be >= 1, got {modulus}")
    _check_range(table, x)
    ps = table.primes[: prime_count(table, x)]
    residue %= modulus
    if modulus == 1:
        return len(ps)
    if math.gcd(residue, modulus) > 1:
        # at most one prime (a prime divisor of the modulus) can qualify
        return int(np.count_nonzero(ps[ps <= modulus] % modulus == residue))
    return int(np.count_nonzero(ps % modulus == residue))


def is_prime(m: int) -> bool:
    """Deterministic trial division; the brute-force oracle for small m."""
    if m < 2:
        return False
    if m % 2 == 0:
        return m == 2
    d = 3
    while d * d <= m:
        if m % d == 0:
            return False
        d += 2
    return True


def naive_prime_count_ap(x: int, modulus: int, residue: int) -> int:
    """Oracle for pi(x; m, a) walking the progression with trial division."""
    residue %= modulus
    start = residue if residue > 0 else modulus
    return sum(1 for m in range(start, x + 1, modulus) if is_prime(m))


def check_sextuple_lemma(x: int, q: int, a: int, table: PrimeTable | None = None) -> bool:
    """Check pi(x; q, a) <= x/(3q) + 2 by direct counting.

    Only moduli coprime to 6 are accepted. For q = 2 or 3 the inequality is
    false in general, e.g. pi(30; 2, 1) = 9 > 7.
    """
    if x <= 1:
        raise ValueError(f"x must exceed 1, got {x}")
    if q <= 1 or math.gcd(q, 6) != 1:
        raise ValueError(f"modulus must be > 1 and coprime to 6, got {q}")
    if q > x:
        raise ValueError(f"modulus {q} exceeds x={x}")
    if table is None or table.limit < x:
        table = build_prime_table(max(x, 2))
    count = prime_count_ap(table, x, q, a)
    # 3q * count <= x + 6q, exact in integers
    return 3 * q * count <= x + 6 * q


def totient(m: int) -> int:
    if m < 1:
        raise ValueError(f"totient needs m >= 1, got {m}")
    result, d = m, 2
    while d * d <= m:
        if m % d == 0:
            while m % d == 0:
                m //= d
            result -= result // d
        d += 1
    if m > 1:
        result -= result // m
    return result
