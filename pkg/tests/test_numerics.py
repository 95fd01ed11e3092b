import itertools
import math
from fractions import Fraction

import pytest
from hypothesis import assume, given
from hypothesis import strategies as st

from thinbands.errors import AccuracyError, DomainError
from thinbands.numerics import (
    Scalar,
    as_scalar,
    hilbert_distance,
    integer_relation,
    refine,
    tribonacci_constant,
)

LAMBDA = 1.839286755214161

rationals = st.fractions(min_value=-10**6, max_value=10**6, max_denominator=10**6)
positive = st.fractions(min_value=Fraction(1, 10**4), max_value=10**4, max_denominator=10**4)


def encloses(s: Scalar, q: Fraction) -> bool:
    return s.contains(q)


# -- Scalar ----------------------------------------------------------------

def test_exact_integer_has_zero_width():
    s = Scalar(3)
    assert s.is_exact and s.width == 0 and s.mid == 3


def test_decimal_input_rounds_outward():
    s = Scalar.from_decimal("0.1")
    assert s.lo <= s.hi
    assert s.contains(Fraction(1, 10))
    assert not s.is_exact


def test_scalar_rejects_empty_interval():
    with pytest.raises(DomainError):
        Scalar(2, 1)


def test_scalar_is_immutable():
    s = Scalar(1)
    with pytest.raises(AttributeError):
        s.lo = 0


@given(rationals, rationals)
def test_arithmetic_encloses_exact_result(p, q):
    x, y = Scalar(p), Scalar(q)
    assert encloses(x + y, p + q)
    assert encloses(x - y, p - q)
    assert encloses(x * y, p * q)
    if q != 0:
        assert encloses(x / y, p / q)


@given(rationals, rationals, rationals)
def test_compound_expressions_stay_sound(p, q, r):
    x, y, z = Scalar(p), Scalar(q), Scalar(r)
    assert encloses((x + y) * z - x * z, q * r)
    assert encloses(abs(x - y), abs(p - q))


@given(positive)
def test_sqrt_and_log_enclosures(p):
    s = Scalar(p).sqrt()
    assert (s * s).contains(p)
    lo, hi = (Fraction(*e.as_integer_ratio()) for e in (s.lo, s.hi))
    assert lo * lo <= p <= hi * hi
    lg = Scalar(p).log()
    assert float(lg.lo) <= math.log(p) + 1e-15 and math.log(p) - 1e-15 <= float(lg.hi)


@given(rationals, st.integers(min_value=64, max_value=512))
def test_higher_precision_never_widens(p, prec):
    third = Scalar(p, prec=prec) / 3
    finer = Scalar(p, prec=2 * prec) / 3
    assert finer.width <= third.width
    assert encloses(finer, p / 3)


def test_interval_comparisons():
    a, b = Scalar(1, 2), Scalar(3, 4)
    assert a.certainly_lt(b) and b.certainly_gt(a)
    assert not Scalar(1, 3).certainly_lt(Scalar(2, 4))
    assert Scalar(1, 3).straddles(2)


# -- refine -----------------------------------------------------------------

def test_refine_exact_integer():
    s = refine(Scalar(3), Fraction(1, 10**40))
    assert s.lo == 3 and s.hi == 3


def test_refine_sum_of_dyadics_is_exact():
    s = refine(Scalar(Fraction(3, 8)) + Scalar(Fraction(5, 16)), Fraction(1, 10**30))
    assert s.is_exact and s.mid == Fraction(11, 16)


def test_refine_tribonacci_to_1e_30():
    lam = refine(tribonacci_constant(64), Fraction(1, 10**30))
    assert lam.width < Fraction(1, 10**30)
    assert abs(float(lam.mid) - LAMBDA) < 1e-15
    # Newton oracle in exact rationals
    t = Fraction(18392867552141611, 10**16)
    for _ in range(6):
        t -= (t**3 - t**2 - t - 1) / (3 * t**2 - 2 * t - 1)
    assert lam.contains(t) or abs(lam.mid - t) < Fraction(1, 10**30)


def test_refine_precision_cap_reports_achieved_width():
    stubborn = Scalar(0, 1).with_source(lambda prec: Scalar(0, 1, prec=prec))
    with pytest.raises(AccuracyError) as info:
        refine(stubborn, Fraction(1, 10), max_prec=512)
    assert info.value.achieved == 1


def test_refine_without_source_fails():
    with pytest.raises(AccuracyError):
        refine(Scalar(0, 1), Fraction(1, 10))


def test_refine_rejects_nonpositive_target():
    with pytest.raises(DomainError):
        refine(Scalar(1), 0)


def test_tribonacci_root_certified():
    lam = tribonacci_constant(256)
    p = lambda t: t**3 - t**2 - t - 1  # noqa: E731
    lo, hi = (Fraction(*e.as_integer_ratio()) for e in (lam.lo, lam.hi))
    assert p(lo) < 0 < p(hi)


# -- hilbert_distance ------------------------------------------------------

def test_hilbert_distance_examples():
    assert hilbert_distance((1, 5, 2), (1, 5, 2)).mid == 0
    assert hilbert_distance((1, 2), (2, 4)).mid == 0
    d = hilbert_distance((1, 1), (1, 2))
    assert abs(float(d.mid) - math.log(2)) < 1e-15 and d.width < 1e-35


def test_hilbert_distance_rejects_nonpositive():
    with pytest.raises(DomainError):
        hilbert_distance((1, 0), (1, 1))
    with pytest.raises(DomainError):
        hilbert_distance((1, -1), (1, 1))


vec3 = st.tuples(positive, positive, positive)


@given(vec3, vec3)
def test_hilbert_distance_symmetric_and_projective(u, v):
    d1, d2 = hilbert_distance(u, v), hilbert_distance(v, u)
    assert abs(float(d1.mid) - float(d2.mid)) < 1e-25
    scaled = tuple(3 * x for x in u)
    assert abs(float(hilbert_distance(scaled, v).mid) - float(d1.mid)) < 1e-25


@given(vec3, vec3, vec3)
def test_hilbert_distance_triangle_inequality(u, v, w):
    duv, dvw, duw = (hilbert_distance(*p) for p in ((u, v), (v, w), (u, w)))
    assert not duw.certainly_gt(duv + dvw)


def test_hilbert_distance_with_enclosures():
    lam = tribonacci_constant()
    d = hilbert_distance((lam * lam, lam, 1), (lam * lam, lam, 1))
    assert d.lo <= 0 <= d.hi and float(d.hi) < 1e-30


# -- integer_relation -------------------------------------------------------

def test_integer_relation_small_example():
    assert integer_relation([1, 2], 2, Fraction(1, 10**9)) == (-2, 1)


def test_tribonacci_powers_have_no_small_relation():
    lam = tribonacci_constant()
    assert integer_relation([Scalar(1), lam, lam * lam], 10, Fraction(1, 10**9)) is None


@given(vec3)
def test_constructed_relation_found(w):
    w1, w2, w3 = w
    rel = integer_relation([w1, w2, w3, w1 + w2], 3, Fraction(1, 10**12))
    assert rel is not None
    total = sum(c * x for c, x in zip(rel, [w1, w2, w3, w1 + w2]))
    assert abs(total) < Fraction(1, 10**12)


def test_relation_is_w1_plus_w2_minus_sum_up_to_sign():
    lam = tribonacci_constant()
    w = [lam * lam, lam, Scalar(1)]
    rel = integer_relation(w + [w[0] + w[1]], 3, Fraction(1, 10**9))
    assert rel in ((1, 1, 0, -1), (-1, -1, 0, 1))


@given(st.lists(st.fractions(min_value=-50, max_value=50, max_denominator=7), min_size=1, max_size=3),
       st.integers(min_value=1, max_value=4))
def test_returned_relations_satisfy_bound(vals, bound):
    tol = Fraction(1, 10**6)
    rel = integer_relation(vals, bound, tol)
    if rel is not None:
        assert any(rel) and max(abs(c) for c in rel) <= bound
        assert abs(sum(c * v for c, v in zip(rel, vals))) < tol


@given(st.lists(st.integers(min_value=-20, max_value=20), min_size=2, max_size=3))
def test_relation_search_is_exhaustive(vals):
    assume(any(vals))
    tol = Fraction(1, 2)
    rel = integer_relation(vals, 2, tol)
    brute = [c for c in itertools.product(range(-2, 3), repeat=len(vals))
             if any(c) and sum(a * b for a, b in zip(c, vals)) == 0]
    assert (rel is None) == (not brute)


def test_integer_relation_rejects_bad_input():
    with pytest.raises(DomainError):
        integer_relation([], 3, 1)
    with pytest.raises(DomainError):
        integer_relation([1], 0, 1)


def test_as_scalar_passthrough():
    s = Scalar(1, 2)
    assert as_scalar(s) is s
    assert as_scalar(Fraction(1, 3)).contains(Fraction(1, 3))
