"""Explicit bounds closing the range n > 10^9.

For n > 10^9 a representation n = s + p exists as soon as fewer than
pi(sqrt(n)) primes p <= sqrt(n) have n - p divisible by a prime square q^2.
Those primes are bounded by splitting q into five ranges, and the total is
compared with the lower bound 2 sqrt(n)/log n (1 + 1/log n) for pi(sqrt(n)).

Three right-hand sides are implemented:

``f2``  uniform bound for n > 59^8 with C1(11), C2(11) supplied as numbers;
``f4``  per-interval bound for n in [p_k^8, p_{k+1}^8], n >= 10^12;
``f5``  as ``f4`` below 10^12, with a weaker constant in the second term.

Two evaluation conventions exist for these functions. ``derived`` uses each
term exactly as it falls out of the case analysis. ``tabulated`` matches the
reference Delta tables and the 95945 margin: it divides the Case 4 term by
one more factor of log n, and uses 46/7 in the second term of ``f5``. The
two agree on every other term. See ``rhs_terms``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .primes import PrimeTable, build_prime_table, is_prime, prime_count, prime_count_ap

C0 = 0.452247420041065  # sum of 1/q^2 over all primes q
LOWER_COEFF_START = 11  # Case 2 covers q >= 11

CONVENTIONS = ("tabulated", "derived")
VARIANTS = ("f2", "f4", "f5")

N_59_8 = 59**8
N_13_8 = 13**8
TEN_12 = 10**12


@dataclass(frozen=True)
class PrimeSumConstants:
    A: int
    B: int
    c1: float  # sum over A <= q <= B of 1/(q(q-1))
    c2: float  # sum over A <= q <= B of log q/(q(q-1))
    c3: float  # sum over A < q <= B of 1/q^2
    gA: float  # sum over q <= A of 1/q^2


def _ascending_sum(values) -> float:
    total = 0.0
    for v in values:
        total += v
    return total


def prime_sum_constants(A: int, B: int, table: PrimeTable) -> PrimeSumConstants:
    if not 2 <= A <= B:
        raise ValueError(f"need 2 <= A <= B, got A={A}, B={B}")
    if B > table.limit:
        raise IndexError(f"B={B} exceeds prime table limit {table.limit}")
    qs = [int(q) for q in table.upto(B)]
    band = [q for q in qs if q >= A]
    c1 = _ascending_sum(1.0 / (q * (q - 1)) for q in band)
    c2 = _ascending_sum(math.log(q) / (q * (q - 1)) for q in band)
    c3 = _ascending_sum(1.0 / (q * q) for q in band if q > A)
    gA = _ascending_sum(1.0 / (q * q) for q in qs if q <= A)
    return PrimeSumConstants(A, B, c1, c2, c3, gA)


def g(A: int, table: PrimeTable) -> float:
    """Sum of 1/q^2 over primes q <= A."""
    return _ascending_sum(1.0 / (int(q) * int(q)) for q in table.upto(A))


def c0_minus_g(pk: int, table: PrimeTable) -> float:
    if pk > table.limit:
        raise IndexError(f"{pk} exceeds prime table limit {table.limit}")
    if not is_prime(pk):
        raise ValueError(f"{pk} is not prime")
    return C0 - g(pk, table)


# --------------------------------------------------------------------------
# tails over q > A from Rosser-Schoenfeld bounds on pi(t)

TAIL_WEIGHTS = ("reciprocal-square", "c1", "c2")


def rs_constants(A: float) -> tuple[float, float]:
    """(c4, c5) with c4 A/log A <= pi(A) and pi(t) <= c5 t/log t for t >= A."""
    L = math.log(A)
    return 1 + 1 / (2 * L), 1 + 3 / (2 * L)


def tail_bound(A: int, weight: str = "reciprocal-square") -> float:
    """Upper bound for the sum over primes q > A of the chosen weight.

    Partial summation against pi(t), using pi(t) <= c5 t/log t on [A, inf)
    and pi(A) >= c4 A/log A. With w(t) the weight:

    * 1/t^2          -> (2 c5 - c4) / (A log A)
    * 1/(t(t-1))     -> (c5 (log(A/(A-1)) + 1/(A-1)) - c4/(A-1)) / log A
    * log t/(t(t-1)) ->  c5 (log(A/(A-1)) + 1/(A-1)) - c4/(A-1)

    In the last case the negative part of -w'(t) is dropped.
    """
    if A < 59:
        raise ValueError(f"Rosser-Schoenfeld lower bound needs A >= 59, got {A}")
    c4, c5 = rs_constants(A)
    L = math.log(A)
    if weight == "reciprocal-square":
        return (2 * c5 - c4) / (A * L)
    # integral of (2t-1)/(t (t-1)^2) over [A, inf)
    tail_integral = math.log(A / (A - 1)) + 1 / (A - 1)
    if weight == "c1":
        return (c5 * tail_integral - c4 / (A - 1)) / L
    if weight == "c2":
        return c5 * tail_integral - c4 / (A - 1)
    raise ValueError(f"unknown weight {weight!r}; expected one of {TAIL_WEIGHTS}")


@dataclass(frozen=True)
class TailCertificate:
    B: int
    c1_partial: float
    c1_tail: float
    c2_partial: float
    c2_tail: float
    c0_minus_gB: float
    square_tail: float

    @property
    def C1_upper(self) -> float:
        return self.c1_partial + self.c1_tail

    @property
    def C2_upper(self) -> float:
        return self.c2_partial + self.c2_tail


def certify_tails(table: PrimeTable, B: int = 10**6, A: int = LOWER_COEFF_START) -> TailCertificate:
    """Partial sums up to B plus rigorous tails beyond B."""
    k = prime_sum_constants(A, B, table)
    return TailCertificate(
        B=B,
        c1_partial=k.c1,
        c1_tail=tail_bound(B, "c1"),
        c2_partial=k.c2,
        c2_tail=tail_bound(B, "c2"),
        c0_minus_gB=C0 - g(B, table),
        square_tail=tail_bound(B, "reciprocal-square"),
    )


# --------------------------------------------------------------------------
# logarithmic integral

def _simpson(f, a, fa, b, fb):
    m = 0.5 * (a + b)
    fm = f(m)
    return m, fm, (b - a) / 6 * (fa + 4 * fm + fb)


def adaptive_simpson(f, a: float, b: float, tol: float, max_depth: int = 60) -> float:
    fa, fb = f(a), f(b)
    m, fm, whole = _simpson(f, a, fa, b, fb)
    total = 0.0
    stack = [(a, fa, b, fb, m, fm, whole, tol, 0)]
    while stack:
        a, fa, b, fb, m, fm, whole, eps, depth = stack.pop()
        lm, flm, left = _simpson(f, a, fa, m, fm)
        rm, frm, right = _simpson(f, m, fm, b, fb)
        diff = left + right - whole
        if depth >= max_depth or abs(diff) <= 15 * eps:
            total += left + right + diff / 15
        else:
            stack.append((a, fa, m, fm, lm, flm, left, eps / 2, depth + 1))
            stack.append((m, fm, b, fb, rm, frm, right, eps / 2, depth + 1))
    return total


def li(x: float, rel_tol: float = 1e-11) -> float:
    """Li(x): integral of 1/log t over [2, x]."""
    if x < 2:
        raise ValueError(f"Li is defined here for x >= 2, got {x}")
    if x == 2:
        return 0.0
    scale = x / math.log(x)
    return adaptive_simpson(lambda t: 1.0 / math.log(t), 2.0, float(x), rel_tol * scale)


# --------------------------------------------------------------------------
# bound functions

@dataclass(frozen=True)
class BoundContext:
    n: int
    c: float
    variant: str
    k: int | None = None
    # f2 only: upper bounds for C1(11) and C2(11)
    C1: float = 0.033
    C2: float = 0.1

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise ValueError(f"variant must be one of {VARIANTS}, got {self.variant!r}")
        if not 0.5 < self.c <= 5:
            raise ValueError(f"c must lie in (0.5, 5], got {self.c}")
        if self.variant == "f2" and self.n <= N_59_8:
            raise ValueError(f"f2 needs n > 59^8, got {self.n}")
        if self.variant == "f4" and self.n < TEN_12:
            raise ValueError(f"f4 needs n >= 10^12, got {self.n}")
        if self.variant == "f5" and self.n < N_13_8:
            raise ValueError(f"f5 needs n >= 13^8, got {self.n}")
        if self.variant != "f2" and (self.k is None or self.k < 5):
            raise ValueError(f"{self.variant} needs a prime index k >= 5")


def lhs(n: int) -> float:
    """Lower bound 2 sqrt(n)/log n (1 + 1/log n) for pi(sqrt(n)), valid for n > 59^2."""
    if n <= 59 * 59:
        raise ValueError(f"lower bound for pi(sqrt n) needs n > 59^2, got {n}")
    L = math.log(n)
    return 2 * math.sqrt(n) / L * (1 + 1 / L)


@dataclass(frozen=True)
class IntervalConstants:
    """Sums entering f4/f5 for the interval [p_k^8, p_{k+1}^8]."""

    k: int
    pk: int
    pk1: int
    c1: float  # c1(11, p_{k+1})
    c2: float  # c2(11, p_{k+1})
    c0_minus_g: float  # c0 - g(p_k)


def interval_constants(k: int, table: PrimeTable) -> IntervalConstants:
    pk, pk1 = table.nth(k), table.nth(k + 1)
    s = prime_sum_constants(LOWER_COEFF_START, pk1, table)
    return IntervalConstants(k, pk, pk1, s.c1, s.c2, c0_minus_g(pk, table))


def _case1_second(variant: str, convention: str) -> float:
    if variant == "f5":
        return 46 / 7 if convention == "tabulated" else 32 / 7
    return 1569 / 350


def rhs_terms(
    ctx: BoundContext,
    table: PrimeTable | None = None,
    constants: IntervalConstants | None = None,
    convention: str = "tabulated",
) -> dict[str, float]:
    """Term-by-term value of the chosen bound function at ctx.n."""
    if convention not in CONVENTIONS:
        raise ValueError(f"convention must be one of {CONVENTIONS}, got {convention!r}")
    n, c = ctx.n, ctx.c
    L = math.log(n)
    s = math.sqrt(n)
    second = _case1_second(ctx.variant, convention)
    # Case 4: pi(sqrt(n)/(c log n)) < 4 sqrt(n)/(c log^2 n) (1 + 6/log n)
    q4_power = 3 if convention == "tabulated" else 2

    terms = {"case1_main": 46 * s / (35 * L), "case1_second": second * s / L**2}
    if ctx.variant == "f2":
        terms["case2_c1"] = 4 * ctx.C1 * s / L
        terms["case2_c2"] = 32 * ctx.C2 * s / L**2
        terms["case3"] = s * (8 * L + 160) / (3 * n ** (1 / 8) * L**2)
    else:
        if constants is None:
            if table is None:
                table = build_prime_table(1000)
            constants = interval_constants(ctx.k, table)
        terms["case2_c1"] = 4 * constants.c1 * s / L
        terms["case2_c2"] = 32 * constants.c2 * s / L**2
        terms["case3"] = s * constants.c0_minus_g * 8 * math.log(constants.pk1) / (3 * L)
    terms["case4"] = 4 * s / (c * L**q4_power) * (1 + 6 / L)
    terms["case3_4_count"] = 4 * n**0.25 / L * (1 + 6 / L)
    terms["case5"] = (c * L) ** 2
    return terms


def evaluate_rhs(
    ctx: BoundContext,
    table: PrimeTable | None = None,
    constants: IntervalConstants | None = None,
    convention: str = "tabulated",
) -> float:
    return sum(rhs_terms(ctx, table, constants, convention).values())


def margin(ctx: BoundContext, table: PrimeTable | None = None, convention: str = "tabulated") -> float:
    """LHS - RHS at ctx.n; positive means the argument closes at n."""
    return lhs(ctx.n) - evaluate_rhs(ctx, table, convention=convention)


# --------------------------------------------------------------------------
# Delta tables

@dataclass(frozen=True)
class DeltaRow:
    k: int
    interval_lo: int
    interval_hi: int
    interval_label: str
    c1_val: float
    c2_val: float
    c_param: float
    c0_minus_g: float
    delta: float


# (k, left end, right end, c); ends are (label, exact value)
F4_ROWS = (
    (16, ("53^8", 53**8), ("59^8", 59**8), 4),
    (15, ("47^8", 47**8), ("53^8", 53**8), 3.3),
    (14, ("43^8", 43**8), ("47^8", 47**8), 2.9),
    (13, ("41^8", 41**8), ("43^8", 43**8), 2.7),
    (12, ("37^8", 37**8), ("41^8", 41**8), 2.3),
    (11, ("10^12", TEN_12), ("37^8", 37**8), 2),
)
F5_ROWS = (
    (11, ("31^8", 31**8), ("10^12", TEN_12), 2),
    (10, ("29^8", 29**8), ("31^8", 31**8), 2),
    (9, ("23^8", 23**8), ("29^8", 29**8), 1.6),
    (8, ("19^8", 19**8), ("23^8", 23**8), 1.3),
    (7, ("17^8", 17**8), ("19^8", 19**8), 1.1),
    (6, ("13^8", 13**8), ("17^8", 17**8), 0.6),
)
TABLE_ROWS = {"f4": F4_ROWS, "f5": F5_ROWS}

# reference cells, kept as printed so their precision is known
REFERENCE_TABLES = {
    "f4": {
        16: ("0.02941652", "0.08277361", "0.00352137", 74613.3),
        15: ("0.02912429", "0.08158205", "0.00387736", 46560.4),
        14: ("0.02876145", "0.08014145", "0.004330053", 32612.4),
        13: ("0.02829891", "0.07836062", "0.00487089", 26933.3),
        12: ("0.02774520", "0.07627800", "0.00546577", 17911.1),
        11: ("0.02713545", "0.07401364", "0.00619623", 9029.5),
    },
    "f5": {
        11: ("0.02713545", "0.07401364", "0.00619623", 5606.9),
        10: ("0.02638469", "0.0713027", "0.00723681", 3669.5),
        9: ("0.02530942", "0.06761027", "0.00842587", 910.8),
        8: ("0.02407789", "0.0634633", "0.01031623", 179.8),
        7: ("0.02210161", "0.05726672", "0.0130863", 62.1),
        6: ("0.01917763", "0.04865725", "0.0165465", 35.3),
    },
}
REFERENCE_F2_MARGIN = 95945


def delta_table(variant: str, table: PrimeTable | None = None, convention: str = "tabulated") -> list[DeltaRow]:
    if variant not in TABLE_ROWS:
        raise ValueError(f"tables exist for f4 and f5, not {variant!r}")
    table = table or build_prime_table(1000)
    rows = []
    for k, (lo_label, lo), (hi_label, hi), c in TABLE_ROWS[variant]:
        consts = interval_constants(k, table)
        ctx = BoundContext(lo, c, variant, k)
        d = lhs(lo) - evaluate_rhs(ctx, constants=consts, convention=convention)
        rows.append(DeltaRow(k, lo, hi, f"[{lo_label}, {hi_label}]", consts.c1, consts.c2,
                             c, consts.c0_minus_g, d))
    return rows


def normalized_margin(ctx: BoundContext, table: PrimeTable | None = None, convention: str = "tabulated") -> float:
    """(LHS - RHS) divided by sqrt(n)/log n."""
    L = math.log(ctx.n)
    return margin(ctx, table, convention) * L / math.sqrt(ctx.n)


def check_monotone_closure(
    variant: str,
    k: int | None,
    c: float,
    grid,
    table: PrimeTable | None = None,
    convention: str = "tabulated",
) -> bool:
    """True iff the normalized margin is positive at grid[0] and never shrinks.

    After division by sqrt(n)/log n the left side is 2 + 2/log n, so the
    margin is 2 - R(n) with R the normalized right side minus 2/log n. A
    nondecreasing margin is the same as a nonincreasing R, which is what
    carries a positive margin at the left end across the whole interval.
    """
    grid = [int(n) for n in grid]
    if grid != sorted(grid):
        raise ValueError("grid must be ascending")
    table = table or build_prime_table(1000)
    consts = interval_constants(k, table) if variant != "f2" else None
    vals = []
    for n in grid:
        ctx = BoundContext(n, c, variant, k)
        L = math.log(n)
        d = lhs(n) - evaluate_rhs(ctx, constants=consts, convention=convention)
        vals.append(d * L / math.sqrt(n))
    if vals[0] <= 0:
        return False
    return all(b >= a - 1e-12 * abs(a) for a, b in zip(vals, vals[1:]))


def log_grid(lo: int, hi: int, points: int = 100) -> list[int]:
    """Ascending integers log-spaced over [lo, hi], endpoints exact."""
    inner = np.geomspace(float(lo), float(hi), points)[1:-1]
    return [lo] + sorted({min(max(int(x), lo), hi) for x in inner}) + [hi]


# --------------------------------------------------------------------------
# direct counts the bound functions must dominate

def case1_count(n: int, table: PrimeTable) -> int:
    """Inclusion-exclusion count over q in {2, 3, 5, 7} at x = sqrt(n)."""
    x = math.isqrt(n)
    return (
        prime_count_ap(table, x, 4, n)
        + prime_count_ap(table, x, 9, n)
        - prime_count_ap(table, x, 36, n)
        + prime_count_ap(table, x, 25, n)
        + prime_count_ap(table, x, 49, n)
    )


def case1_bound(n: int, variant: str = "f5", convention: str = "derived") -> float:
    """The Case 1 part of the chosen bound function at n."""
    L = math.log(n)
    s = math.sqrt(n)
    return 46 * s / (35 * L) + _case1_second(variant, convention) * s / L**2


def case5_count(n: int, c: float, table: PrimeTable) -> int:
    """Primes p <= sqrt(n) with q^2 | n - p for some prime q > sqrt(n)/(c log n).

    Such q exceed n^(1/4) here, so p is the residue of n mod q^2 itself.
    """
    root = math.isqrt(n)
    m = math.sqrt(n) / (c * math.log(n))
    if m * m <= root:
        raise ValueError("needs sqrt(n)/(c log n) > n^(1/4)")
    hits = set()
    for q in table.upto(root)[np.searchsorted(table.primes, m, side="right"):].tolist():
        p = n % (q * q)
        if 2 <= p <= root and p < n and is_prime(p):
            hits.add(p)
    return len(hits)


def pi_lower_rs(x: float) -> float:
    L = math.log(x)
    return x / L * (1 + 1 / (2 * L))


def pi_upper_rs(x: float) -> float:
    L = math.log(x)
    return x / L * (1 + 3 / (2 * L))


def rs_sandwich_holds(x: int, table: PrimeTable) -> bool:
    pi = prime_count(table, x)
    return pi_lower_rs(x) < pi < pi_upper_rs(x)
