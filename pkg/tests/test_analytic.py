import math

import mpmath
import numpy as np
import pytest

from sqfprime import analytic
from sqfprime.analytic import (
    BoundContext,
    C0,
    F4_ROWS,
    F5_ROWS,
    REFERENCE_TABLES,
    case1_bound,
    case1_count,
    case5_count,
    certify_tails,
    check_monotone_closure,
    c0_minus_g,
    delta_table,
    evaluate_rhs,
    g,
    lhs,
    li,
    log_grid,
    margin,
    prime_sum_constants,
    rhs_terms,
    tail_bound,
)
from sqfprime.primes import build_prime_table, prime_count, prime_count_ap, totient


@pytest.fixture(scope="module")
def small():
    return build_prime_table(1000)


@pytest.fixture(scope="module")
def million():
    return build_prime_table(10**6)


def simpson_in_log(x, panels=200_000):
    """Li(x) through t = e^u, composite Simpson on a fixed grid."""
    u = np.linspace(math.log(2), math.log(x), 2 * panels + 1)
    f = np.exp(u) / u
    h = u[1] - u[0]
    return h / 3 * (f[0] + f[-1] + 4 * f[1:-1:2].sum() + 2 * f[2:-1:2].sum())


# sums and constants

def test_g_small(small):
    assert g(2, small) == 0.25
    assert c0_minus_g(2, small) == C0 - 0.25


@pytest.mark.parametrize("pk,want,tol", [(53, 0.00352137, 1e-8), (13, 0.0165465, 1e-7)])
def test_c0_minus_g(small, pk, want, tol):
    assert abs(c0_minus_g(pk, small) - want) <= tol


def test_c0_minus_g_rejects_composite(small):
    with pytest.raises(ValueError):
        c0_minus_g(15, small)


def test_c1_value(small):
    assert abs(prime_sum_constants(11, 17, small).c1 - 0.01917763) < 1e-8


def test_sums_monotone_in_B(million):
    prev = prime_sum_constants(11, 11, million)
    for B in (100, 1000, 10**4, 10**5, 10**6):
        cur = prime_sum_constants(11, B, million)
        assert cur.c1 >= prev.c1 and cur.c2 >= prev.c2 and cur.c3 >= prev.c3
        prev = cur


def test_sums_reproducible(million):
    assert prime_sum_constants(11, 10**6, million) == prime_sum_constants(11, 10**6, million)


def test_sum_beyond_table(small):
    with pytest.raises(IndexError):
        prime_sum_constants(11, 2000, small)


# tails

def test_tail_bound_needs_large_A():
    with pytest.raises(ValueError):
        tail_bound(58)
    with pytest.raises(ValueError):
        tail_bound(100, "cube")


@pytest.mark.parametrize("weight,f", [
    ("reciprocal-square", lambda q: 1 / q**2),
    ("c1", lambda q: 1 / (q * (q - 1))),
    ("c2", lambda q: math.log(q) / (q * (q - 1))),
])
def test_tail_bounds_dominate_actual_tails(million, weight, f):
    # tail beyond A truncated at 10^6, so a lower bound of the true tail
    for A in (59, 100, 1000, 10**4):
        actual = sum(f(int(q)) for q in million.primes[million.primes > A])
        assert actual < tail_bound(A, weight)


def test_certify_tails(million):
    t = certify_tails(million)
    assert t.C1_upper < 0.033
    assert t.C2_upper < 0.1
    assert 0 < t.c0_minus_gB < 2e-7
    # the stored c0 is consistent with the tail estimate beyond 10^6
    assert t.c0_minus_gB < t.square_tail


# Li

def test_li_rejects_small():
    with pytest.raises(ValueError):
        li(1.5)
    assert li(2) == 0.0


@pytest.mark.parametrize("x", [3, 100, 1865, 10**4, 10**6, 10**7, 10**9])
def test_li_against_mpmath(x):
    want = float(mpmath.li(x) - mpmath.li(2))
    assert abs(li(x) - want) <= 1e-9 * want


@pytest.mark.parametrize("x", [1865, 10**6, 10**8])
def test_li_against_refined_simpson(x):
    ref = simpson_in_log(x)
    assert abs(li(x) - ref) <= 1e-9 * ref


# bound functions

def test_lhs():
    with pytest.raises(ValueError):
        lhs(55)
    with pytest.raises(ValueError):
        lhs(59 * 59)
    L = math.log(10**6)
    assert lhs(10**6) == pytest.approx(2 * 1000 / L * (1 + 1 / L), rel=1e-15)


def test_lhs_is_below_pi_sqrt(million):
    for n in (59**2 + 1, 10**6, 10**9, 10**12):
        assert lhs(n) < prime_count(million, math.isqrt(n))


@pytest.mark.parametrize("kwargs", [
    dict(n=59**8, c=4, variant="f2"),
    dict(n=10**12 - 1, c=2, variant="f4", k=11),
    dict(n=13**8 - 1, c=2, variant="f5", k=6),
    dict(n=10**13, c=2, variant="f4"),
    dict(n=10**13, c=2, variant="f4", k=4),
    dict(n=10**13, c=0.5, variant="f4", k=11),
    dict(n=10**13, c=6, variant="f4", k=11),
    dict(n=10**13, c=2, variant="f3", k=11),
])
def test_context_rejects(kwargs):
    with pytest.raises(ValueError):
        BoundContext(**kwargs)


def test_f2_margin():
    ctx = BoundContext(59**8 + 1, 4, "f2")
    assert margin(ctx) > 95945
    assert margin(ctx, convention="derived") > 0


def test_rhs_terms_sum(small):
    ctx = BoundContext(53**8, 4, "f4", 16)
    terms = rhs_terms(ctx, small)
    assert set(terms) == {"case1_main", "case1_second", "case2_c1", "case2_c2", "case3",
                          "case4", "case3_4_count", "case5"}
    assert sum(terms.values()) == evaluate_rhs(ctx, small)
    with pytest.raises(ValueError):
        rhs_terms(ctx, small, convention="other")


def test_conventions_differ_only_where_expected(small):
    ctx = BoundContext(19**8, 1.3, "f5", 8)
    a = rhs_terms(ctx, small, convention="tabulated")
    b = rhs_terms(ctx, small, convention="derived")
    assert [k for k in a if a[k] != b[k]] == ["case1_second", "case4"]
    ctx4 = BoundContext(53**8, 4, "f4", 16)
    a = rhs_terms(ctx4, small, convention="tabulated")
    b = rhs_terms(ctx4, small, convention="derived")
    assert [k for k in a if a[k] != b[k]] == ["case4"]


# tables

def cell_matches(value, printed):
    ulp = 10.0 ** -len(printed.split(".")[1])
    return abs(value - float(printed)) <= ulp * (1 + 1e-9)


@pytest.mark.parametrize("variant", ["f4", "f5"])
def test_delta_tables(small, variant):
    ref = REFERENCE_TABLES[variant]
    for row in delta_table(variant, small):
        c1, c2, cg, delta = ref[row.k]
        assert abs(row.delta - delta) <= max(0.2, 1e-3 * abs(delta))
        assert cell_matches(row.c1_val, c1)
        assert cell_matches(row.c2_val, c2)
        assert cell_matches(row.c0_minus_g, cg)
        assert row.delta > 0


def test_delta_table_spot_values(small):
    f4 = {r.k: r.delta for r in delta_table("f4", small)}
    f5 = {r.k: r.delta for r in delta_table("f5", small)}
    assert abs(f4[12] - 17911.1) <= 17911.1e-3
    assert abs(f5[8] - 179.8) <= 0.2
    assert abs(f5[11] - 5606.9) <= 5606.9e-3


def test_derived_convention_loses_small_f5_rows(small):
    # with the log^2 Case 4 term and 32/7 the f5 rows k = 6, 7, 8 go negative,
    # and no admissible c rescues them
    rows = {r.k: r.delta for r in delta_table("f5", small, "derived")}
    assert all(rows[k] < 0 for k in (6, 7, 8))
    assert all(rows[k] > 0 for k in (9, 10, 11))
    assert all(r.delta > 0 for r in delta_table("f4", small, "derived"))
    for k, (_, lo), _, _ in F5_ROWS:
        if k > 8:
            continue
        consts = analytic.interval_constants(k, small)
        best = max(
            lhs(lo) - evaluate_rhs(BoundContext(lo, c, "f5", k), constants=consts, convention="derived")
            for c in np.linspace(0.51, 5, 450)
        )
        assert best < 0


def test_delta_table_unknown_variant(small):
    with pytest.raises(ValueError):
        delta_table("f2", small)


# monotone closure

def test_closure_f2_points(small):
    assert check_monotone_closure("f2", None, 4, [59**8 + 1, 10**16, 10**18], small)


def test_closure_f4_top_row(small):
    assert check_monotone_closure("f4", 16, 4, log_grid(53**8, 59**8), small)


def test_closure_single_point(small):
    assert check_monotone_closure("f4", 16, 4, [53**8], small)


def test_closure_rejects_unsorted(small):
    with pytest.raises(ValueError):
        check_monotone_closure("f4", 16, 4, [59**8, 53**8], small)


def test_closure_fails_when_left_end_negative(small):
    assert not check_monotone_closure("f5", 6, 0.6, log_grid(13**8, 17**8), small, "derived")


def test_log_grid():
    grid = log_grid(10, 10**40, 100)
    assert grid[0] == 10 and grid[-1] == 10**40 and len(grid) == 100
    assert grid == sorted(set(grid))


# the direct counts the bound pieces must cover

@pytest.mark.parametrize("n", [10**9 + 7, 2 * 10**9 + 11, 5 * 10**9 + 3, 10**10])
def test_case1_count_bound(million, n):
    assert case1_count(n, million) <= case1_bound(n)


@pytest.mark.parametrize("n,c", [(10**9 + 7, 0.6), (3 * 10**9 + 1, 1.3), (10**10, 2)])
def test_case5_count_bound(million, n, c):
    assert case5_count(n, c, million) <= (c * math.log(n)) ** 2


def test_case5_brute_force(million):
    n, c = 10**9 + 7, 1.3
    root = math.isqrt(n)
    m = math.sqrt(n) / (c * math.log(n))
    qs = [int(q) for q in million.upto(root) if q > m]
    hits = {int(p) for p in million.upto(root) if any((n - int(p)) % (q * q) == 0 for q in qs)}
    assert case5_count(n, c, million) == len(hits)


@pytest.mark.parametrize("x", [59, 100, 10**4, 10**6])
def test_rs_sandwich(million, x):
    assert analytic.rs_sandwich_holds(x, million)


@pytest.mark.parametrize("x,q,a", [(10**6, 3, 1), (10**6, 101, 7), (5 * 10**5, 1000, 3)])
def test_bennett_error_instances(million, x, q, a):
    err = abs(prime_count_ap(million, x, q, a) - li(x) / totient(q))
    assert err < 0.027 * x / math.log(x) ** 2


@pytest.mark.parametrize("q", [2, 3, 5, 7, 11])
def test_montgomery_vaughan_instances(million, q):
    x = 10**6
    for a in range(1, q * q):
        if a % q:
            count = prime_count_ap(million, x, q * q, a)
            assert count <= 2 * x / ((q - 1) * q * math.log(x / (q * q)))
