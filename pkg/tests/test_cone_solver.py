import itertools
import json
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from thinbands.cone_solver import (
    H_from_w,
    KSequence,
    area_sequence,
    cone_diameter,
    lengths_recursion,
    mat_A,
    mat_B,
    mat_Bpp,
    mat_Bprime,
    mat_C,
    mat_product,
    solve_widths,
)
from thinbands.errors import AccuracyError, ConfigurationError, DomainError
from thinbands.numerics import hilbert_distance

LAMBDA = 1.839286755214161


def rows(M):
    return [list(map(int, r)) for r in M]


# -- matrices -------------------------------------------------------------

def test_matrix_examples():
    assert rows(mat_B(1)) == [[1, 1, 1], [1, 0, 0], [0, 1, 0]]
    assert rows(mat_A(1)) == [[0, 0, 1, 1], [1, 0, 0, 0], [0, 1, 0, 0], [0, 1, 1, 0]]
    assert list(mat_B(3).dot(np.array([1, 1, 1], dtype=object))) == [7, 1, 1]
    assert rows(mat_Bpp()) == [[2, 1, 1], [1, 1, 0], [1, 1, 1]]
    assert rows(mat_Bprime(1, 1, 1)) == [[1, 1, 1], [0, 1, 1], [0, 0, 1]]
    B3 = mat_product([mat_B(1)] * 3)
    assert rows(B3) == [[4, 3, 2], [2, 2, 1], [1, 1, 1]]
    assert rows(mat_Bprime(1, 1, 1).dot(mat_Bpp())) == rows(B3)


def test_matrices_are_exact_integers():
    for M in (mat_B(5), mat_A(5), mat_Bprime(2, 3, 4), mat_Bpp(), mat_C()):
        assert M.dtype == object and all(isinstance(x, int) for x in M.flat)


def test_b_identity_exhaustive():
    for k, l, m in itertools.product(range(1, 11), repeat=3):
        assert (mat_B(k).dot(mat_B(l)).dot(mat_B(m)) == mat_Bprime(k, l, m).dot(mat_Bpp())).all()


@pytest.mark.parametrize("bad", [0, -1])
def test_matrices_reject_k_below_one(bad):
    with pytest.raises(DomainError):
        mat_B(bad)
    with pytest.raises(DomainError):
        mat_A(bad)


pos = st.fractions(min_value=Fraction(1, 100), max_value=100, max_denominator=100)


@given(pos, pos, pos)
def test_bpp_maps_positive_cone_into_k_prime(a, b, c):
    w = mat_Bpp().dot(np.array([a, b, c], dtype=object))
    assert w[2] < w[0] + w[1]


@given(st.tuples(pos, pos, pos), st.tuples(pos, pos, pos))
def test_bpp_does_not_expand_hilbert_distance(u, v):
    Bu = tuple(mat_Bpp().dot(np.array(u, dtype=object)))
    Bv = tuple(mat_Bpp().dot(np.array(v, dtype=object)))
    assert hilbert_distance(Bu, Bv).mid <= hilbert_distance(u, v).mid


@given(st.tuples(pos, pos, pos), st.tuples(pos, pos, pos))
def test_bpp_strictly_contracts_on_k_prime(u, v):
    # B'' B'(1,1,1) is positive, so the pair contracts strictly
    M = mat_Bpp().dot(mat_Bprime(1, 1, 1))
    Mu, Mv = (tuple(M.dot(np.array(x, dtype=object))) for x in (u, v))
    d0 = hilbert_distance(u, v).mid
    if d0 > 0:
        assert hilbert_distance(Mu, Mv).mid < d0


# -- KSequence -------------------------------------------------------------

@pytest.mark.parametrize("doc", [
    {"list": [1, 2, 3]},
    {"constant": 1, "n": 60},
    {"constant": 3},
    {"geometric": {"c": 2, "r": 3}},
    {"doubling": {"k0": 2}},
])
def test_ksequence_json_roundtrip(doc):
    ks = KSequence.from_json(json.dumps(doc))
    assert KSequence.from_json(ks.to_json()) == ks


def test_ksequence_terms_and_flags():
    d = KSequence.doubling(2)
    assert d.terms(5) == [2, 4, 8, 16, 32]
    assert d.summable and d.satisfies_doubling(30)
    assert not KSequence.constant(1).summable
    assert not KSequence.from_list([1, 1, 2]).satisfies_doubling(3)
    with pytest.raises(IndexError):
        KSequence.constant(1, 3)[3]


@pytest.mark.parametrize("doc", [{"doubling": {}}, {"bogus": 1}, [1, 2], {"list": [0, 1]}])
def test_ksequence_rejects_bad_documents(doc):
    with pytest.raises((ConfigurationError, DomainError)):
        KSequence.from_json(doc)


# -- solve_widths ------------------------------------------------------------

def power_iteration_ray(M, steps=200):
    v = np.ones(3)
    Mf = np.array(M, dtype=float)
    for _ in range(steps):
        v = Mf @ v
        v /= v[2]
    return v


def test_tribonacci_ray(tribonacci_solution):
    w = [float(x.mid) for x in tribonacci_solution.w0]
    oracle = power_iteration_ray(mat_B(1))
    assert np.allclose(w, oracle, rtol=0, atol=1e-12)
    assert np.allclose(w, [LAMBDA ** 2, LAMBDA, 1], atol=1e-12)
    for x in tribonacci_solution.w0:
        assert float(x.width) < 1e-20


def test_stage_inequalities_and_recursion(doubling_solution):
    sol = doubling_solution
    for i in range(sol.depth + 1):
        assert sol.stage_inequalities(i)
    for i in range(sol.depth):
        assert sol.recursion_holds(i)
    assert sol.exact[0][2] == 1


def test_enclosures_contain_representatives(doubling_solution):
    sol = doubling_solution
    for i in range(sol.depth + 1):
        w = sol.exact[i]
        for box, x in zip(sol.enclosures[i], w):
            assert box.contains(x / w[2])


def test_contraction_monotone(doubling_solution):
    finite = [d for d in doubling_solution.contraction if not d.hi == float("inf")]
    assert len(finite) >= 20
    for a, b in zip(finite, finite[1:]):
        assert b.lo <= a.hi
    assert float(finite[-1].hi) < 1e-12


def test_scale_covariance(doubling):
    # a different seed ray gives the same projective class within the diameter
    sol = solve_widths(doubling, 20, tol=1e-10)
    P = mat_product([mat_B(k) for k in doubling.terms(22)])
    alt = P.dot(np.array([5, 3, 1], dtype=object))
    d = hilbert_distance(tuple(alt), tuple(sol.exact[0]))
    assert not d.certainly_gt(sol.diameters[0])


def test_accuracy_error_reports_diameter():
    with pytest.raises(AccuracyError) as info:
        solve_widths(KSequence.doubling(2), 6, tol=Fraction(1, 10**40))
    assert info.value.achieved is not None and float(info.value.achieved.hi) > 1e-40


def test_solver_preconditions():
    with pytest.raises(DomainError):
        solve_widths(KSequence.constant(1), 5, tol=1)
    with pytest.raises(ConfigurationError):
        solve_widths(KSequence.from_list([1] * 7), 6, tol=1)


def test_cone_diameter_degenerate_columns_is_infinite():
    assert cone_diameter([[1, 0, 0], [0, 1, 0], [0, 0, 1]]).lo == float("inf")
    assert cone_diameter([[1, 1, 1], [2, 2, 2]]).hi == 0


# -- lengths and areas ---------------------------------------------------------

def test_lengths_recursion_examples():
    ks = KSequence.constant(1)
    assert lengths_recursion((1, 1, 1, 1), ks, 1) == (1, 2, 2, 1)
    assert lengths_recursion((1, 2, 3, 4), ks, 0) == (1, 2, 3, 4)


@given(st.lists(st.integers(min_value=1, max_value=9), min_size=4, max_size=4),
       st.lists(st.integers(min_value=1, max_value=6), min_size=8, max_size=8))
def test_lengths_positive_integers_and_growing(l0, kvals):
    ks = KSequence.from_list(kvals)
    prev = None
    for n in range(len(kvals) + 1):
        l = lengths_recursion(l0, ks, n)
        assert all(isinstance(x, int) and x > 0 for x in l)
        if prev is not None:
            assert sum(l) > sum(prev)
        prev = l
    # two steps of A push every entry up
    l2 = lengths_recursion(l0, ks, 4)
    assert min(l2) > min(l0)


def test_area_tribonacci(tribonacci_solution):
    rep = area_sequence(KSequence.constant(1), 6, widths=tribonacci_solution, certify=False)
    assert abs(float(rep.areas[0]) - (2 * LAMBDA ** 2 + LAMBDA + 1)) < 1e-12
    assert abs(float(rep.areas[0]) - 9.6053) < 1e-4


def test_area_certificates_doubling(doubling_solution, doubling):
    rep = area_sequence(doubling, 15, widths=doubling_solution)
    assert rep.all_certified
    assert all(a > b for a, b in zip(rep.areas, rep.areas[1:]))
    assert rep.lower_bound > 0 and rep.areas[15] >= rep.lower_bound


def test_area_certificate_needs_doubling_hypothesis():
    with pytest.raises(ConfigurationError):
        area_sequence(KSequence.constant(2), 8)


def test_area_matches_lcw(doubling_solution, doubling):
    rep = area_sequence(doubling, 5, l0=(2, 1, 3, 1), widths=doubling_solution)
    l = np.array(lengths_recursion((2, 1, 3, 1), doubling, 3), dtype=object)
    w = np.array(doubling_solution.exact[3], dtype=object)
    assert rep.areas[3] == l.dot(mat_C()).dot(w)


# -- H ---------------------------------------------------------------------------

def test_H_examples(tribonacci_solution):
    assert H_from_w((1, 1, 1)) == (1, 1, 1)
    H = H_from_w(tribonacci_solution.exact[0])
    assert np.allclose([float(h) for h in H], [1.41965, 2.19150, 2.61115], atol=2e-5)


@given(pos, pos, pos)
def test_H_identities(w1, w2, w3):
    H = H_from_w((w1, w2, w3))
    s = w1 + w2 + w3
    assert sum(H) == s
    assert [2 * h for h in H] == [s - w1, s - w2, s - w3]
    # triangle inequalities on H
    assert H[0] < H[1] + H[2] and H[1] < H[0] + H[2] and H[2] < H[0] + H[1]


def test_H_triangle_fails_for_nonpositive_w():
    H = H_from_w((Fraction(-1), Fraction(3), Fraction(2)))
    assert not (H[0] < H[1] + H[2] and H[1] < H[0] + H[2] and H[2] < H[0] + H[1])
