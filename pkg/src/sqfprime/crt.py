"""Chinese remainder solutions and streak certificates.

A streak certificate for (n, k) names, for each of the first k primes p_l,
a prime q with q^2 | n - p_l. It is independently checkable with one
division per line, and proves b_k <= n.
"""
from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

from .primes import PrimeTable
from .squarefree import smallest_square_divisor


class CertificationError(ValueError):
    def __init__(self, l: int, p: int, n: int):
        super().__init__(f"n - p_{l} = {n} - {p} = {n - p} is squarefree or non-positive")
        self.l = l


@dataclass(frozen=True)
class Congruence:
    residue: int
    modulus: int

    def __post_init__(self):
        if self.modulus < 2:
            raise ValueError(f"modulus must be >= 2, got {self.modulus}")
        object.__setattr__(self, "residue", self.residue % self.modulus)


@dataclass(frozen=True)
class CongruenceSystem:
    congruences: tuple[Congruence, ...]
    covered_primes: dict[int, int] | None = field(default=None, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "congruences", tuple(self.congruences))
        check_coprime(self.congruences)
        for p, sq in (self.covered_primes or {}).items():
            if not any(c.modulus % sq == 0 and (c.residue - p) % sq == 0 for c in self.congruences):
                raise ValueError(f"system does not force {sq} | n - {p}")

    @property
    def modulus(self) -> int:
        return math.prod(c.modulus for c in self.congruences)

    def to_dict(self) -> dict:
        d = {"congruences": [{"residue": c.residue, "modulus": c.modulus} for c in self.congruences]}
        if self.covered_primes:
            d["covered_primes"] = {str(p): sq for p, sq in sorted(self.covered_primes.items())}
        return d

    @classmethod
    def from_dict(cls, d) -> "CongruenceSystem":
        # accept either a bare list of congruences or the full object
        items = d if isinstance(d, list) else d["congruences"]
        cover = None if isinstance(d, list) else d.get("covered_primes")
        return cls(
            tuple(Congruence(int(c["residue"]), int(c["modulus"])) for c in items),
            {int(p): int(sq) for p, sq in cover.items()} if cover else None,
        )

    @classmethod
    def load(cls, path) -> "CongruenceSystem":
        return cls.from_dict(json.loads(Path(path).read_text()))


def check_coprime(congruences) -> None:
    for a, b in itertools.combinations(congruences, 2):
        g = math.gcd(a.modulus, b.modulus)
        if g != 1:
            raise ValueError(f"moduli {a.modulus} and {b.modulus} share the factor {g}")


def crt_solve(system: CongruenceSystem) -> int:
    """Least positive n satisfying every congruence of the system."""
    n, m = 0, 1
    for c in system.congruences:
        # lift n (mod m) to n + m*t = c.residue (mod c.modulus)
        t = (c.residue - n) * pow(m, -1, c.modulus) % c.modulus
        n += m * t
        m *= c.modulus
    return n if n > 0 else m


REFERENCE_SYSTEM = CongruenceSystem(
    (
        Congruence(3, 4),
        Congruence(8, 9),
        Congruence(2, 25),
        Congruence(5, 49),
        Congruence(13, 121),
        Congruence(29, 169),
        Congruence(37, 289),
        Congruence(41, 361),
    ),
    {
        3: 4, 7: 4, 11: 4, 19: 4, 23: 4, 31: 4, 43: 4, 47: 4,
        17: 9, 53: 9,
        2: 25, 5: 49, 13: 121, 29: 169, 37: 289, 41: 361,
    },
)
B16_UPPER_BOUND = 23708451225527


@dataclass(frozen=True)
class CoverageLine:
    l: int
    p_l: int
    q: int
    q_squared: int
    quotient: int


@dataclass(frozen=True)
class StreakCertificate:
    n: int
    k: int
    coverage: tuple[CoverageLine, ...]

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "k": self.k,
            "coverage": [
                {"l": c.l, "p_l": c.p_l, "q": c.q, "q_squared": c.q_squared, "quotient": c.quotient}
                for c in self.coverage
            ],
        }

    def check(self) -> bool:
        """Re-verify every line with exact arithmetic."""
        return len(self.coverage) == self.k and all(
            c.q_squared == c.q * c.q and c.quotient * c.q_squared == self.n - c.p_l and c.quotient > 0
            for c in self.coverage
        )


def certify_streak_bound(n: int, k: int, table: PrimeTable) -> StreakCertificate:
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    pk = table.nth(k)
    if n <= pk:
        raise ValueError(f"n={n} must exceed p_{k}={pk}")
    lines = []
    for l in range(1, k + 1):
        p = table.nth(l)
        q = smallest_square_divisor(n - p)
        if q is None:
            raise CertificationError(l, p, n)
        lines.append(CoverageLine(l, p, q, q * q, (n - p) // (q * q)))
    return StreakCertificate(n, k, tuple(lines))


def naive_system(k: int, table: PrimeTable) -> CongruenceSystem:
    ps = [table.nth(l) for l in range(1, k + 1)]
    return CongruenceSystem(
        tuple(Congruence(p, p * p) for p in ps), {p: p * p for p in ps}
    )


def naive_bound(k: int, table: PrimeTable) -> tuple[int, StreakCertificate]:
    """Least n > p_k with n = p_l (mod p_l^2) for l <= k, with its certificate."""
    if not 1 <= k <= 16:
        raise ValueError(f"k must lie in [1, 16], got {k}")
    system = naive_system(k, table)
    n = crt_solve(system)
    pk = table.nth(k)
    if n <= pk:
        n += system.modulus * ((pk - n) // system.modulus + 1)
    return n, certify_streak_bound(n, k, table)
