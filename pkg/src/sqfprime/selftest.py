"""Numerical instance checks of the cited lemmas and of the sieve itself.

Each check returns ``(name, passed, detail)``. Samples come from a fixed seed
so repeated runs agree.
"""
from __future__ import annotations

import math
import random

import numpy as np

from . import analytic
from .primes import (
    build_prime_table,
    check_sextuple_lemma,
    prime_count_ap,
    totient,
)
from .squarefree import is_squarefree, sieve_segment, squarefree_mask_trial
from .verify import verify_range

SEED = 20240917


def sieve_vs_trial_division(table, rng, samples):
    for _ in range(samples):
        lo = rng.randrange(1, 10**10)
        hi = lo + rng.randrange(1, 10**4)
        seg = sieve_segment(lo, hi, table)
        expect = squarefree_mask_trial(np.arange(lo, hi), table)
        if not np.array_equal(seg.bits, expect):
            m = lo + int(np.flatnonzero(seg.bits != expect)[0])
            return False, f"mismatch at {m}"
        # scalar oracle on a few entries of each segment
        for m in (lo, hi - 1, rng.randrange(lo, hi)):
            if seg[m] != is_squarefree(m):
                return False, f"scalar mismatch at {m}"
    return True, f"{samples} segments below 1e10"


def sextuple_lemma(table, rng, samples):
    qs = [q for q in range(5, 10**4) if math.gcd(q, 6) == 1 and _prime_power_over_3(q)]
    for _ in range(samples):
        x = rng.randrange(2, 10**5 + 1)
        q = rng.choice([q for q in qs if q <= x] or [5])
        if q > x:
            continue
        a = rng.randrange(0, q)
        if not check_sextuple_lemma(x, q, a, table):
            return False, f"fails at x={x}, q={q}, a={a}"
    return True, f"{samples} triples"


def _prime_power_over_3(q):
    p = next(d for d in range(2, q + 1) if q % d == 0)
    while q % p == 0:
        q //= p
    return q == 1 and p > 3


def rosser_schoenfeld(table, rng, samples):
    xs = [59, 60, 10**7] + [rng.randrange(59, 10**7) for _ in range(samples - 3)]
    bad = [x for x in xs if not analytic.rs_sandwich_holds(x, table)]
    return not bad, f"{len(xs)} points in [59, 1e7]" + (f"; fails at {bad[:3]}" if bad else "")


def li_upper_bound(table, rng, samples):
    for x in [1865, 10**4, 10**6] + [rng.randrange(1865, 10**7) for _ in range(samples)]:
        L = math.log(x)
        if not analytic.li(x) < x / L * (1 + 3 / (2 * L)):
            return False, f"fails at x={x}"
    return True, "x >= 1865"


def montgomery_vaughan(table, rng, samples):
    qs = [int(q) for q in table.upto(3000)]
    for _ in range(samples):
        q = rng.choice(qs)
        x = rng.randrange(q * q + 1, 10**7 + 1) if q * q < 10**7 else None
        if x is None:
            continue
        a = rng.randrange(1, q * q)
        if a % q == 0:
            a += 1
        count = prime_count_ap(table, x, q * q, a)
        if not count <= 2 * x / ((q - 1) * q * math.log(x / (q * q))):
            return False, f"fails at x={x}, q={q}, a={a}"
    return True, f"{samples} samples"


def bennett_instances(table, rng, samples):
    for _ in range(samples):
        x = rng.randrange(10**6, 10**7 + 1)
        q = rng.randrange(1, 10**5 + 1)
        a = rng.randrange(0, q)
        while math.gcd(a, q) != 1:
            a = rng.randrange(0, q)
        err = abs(prime_count_ap(table, x, q, a) - analytic.li(x) / totient(q))
        if not err < 0.027 * x / math.log(x) ** 2:
            return False, f"error bound fails at x={x}, q={q}, a={a}"
    for q in (4, 9, 25, 49):
        for _ in range(max(1, samples // 4)):
            x = rng.randrange(max(10**5, 50 * q * q), 10**7 + 1)
            a = rng.choice([a for a in range(1, q) if math.gcd(a, q) == 1])
            main = x / (totient(q) * math.log(x))
            count = prime_count_ap(table, x, q, a)
            if not main < count < main * (1 + 5 / (2 * math.log(x))):
                return False, f"two-sided bound fails at x={x}, q={q}, a={a}"
    return True, f"{samples} samples"


def case5_bound(table, rng, samples):
    cs = [c for _, _, _, c in analytic.F5_ROWS + analytic.F4_ROWS]
    for _ in range(samples):
        n = rng.randrange(10**9, 10**10 + 1)
        c = rng.choice(cs)
        if analytic.case5_count(n, c, table) > (c * math.log(n)) ** 2:
            return False, f"fails at n={n}, c={c}"
    return True, f"{samples} n in [1e9, 1e10]"


def case1_bound(table, rng, samples):
    for _ in range(samples):
        n = rng.randrange(10**9, 10**10 + 1)
        if analytic.case1_count(n, table) > analytic.case1_bound(n):
            return False, f"fails at n={n}"
    return True, f"{samples} n in [1e9, 1e10]"


def parallel_determinism(table, rng, samples):
    a = verify_range(1, 200_000, segment_size=17_000, workers=1)
    b = verify_range(1, 200_000, segment_size=17_000, workers=2)
    da, db = a.to_dict(), b.to_dict()
    da.pop("elapsed_seconds"), db.pop("elapsed_seconds")
    return da == db, "1 vs 2 workers on [1, 2e5)"


def small_range(table, rng, samples):
    r = verify_range(1, 10**6, segment_size=10**5)
    return r.exceptions == [1, 2, 3, 6, 11, 30, 155, 247], f"exceptions {r.exceptions}"


CHECKS = {
    "sieve vs trial division": (sieve_vs_trial_division, 1000, 20),
    "sextuple lemma": (sextuple_lemma, 1000, 100),
    "Rosser-Schoenfeld sandwich": (rosser_schoenfeld, 100, 20),
    "Li upper bound": (li_upper_bound, 20, 5),
    "Montgomery-Vaughan": (montgomery_vaughan, 200, 30),
    "Bennett et al.": (bennett_instances, 40, 8),
    "Case 1 count": (case1_bound, 20, 5),
    "Case 5 count": (case5_bound, 20, 5),
    "parallel determinism": (parallel_determinism, 1, 1),
    "exceptions below 1e6": (small_range, 1, 1),
}


def run_all(quick: bool = False):
    table = build_prime_table(10**7)
    out = []
    for name, (fn, full, small) in CHECKS.items():
        rng = random.Random(f"{SEED}:{name}")
        passed, detail = fn(table, rng, small if quick else full)
        out.append((name, passed, detail))
    return out
