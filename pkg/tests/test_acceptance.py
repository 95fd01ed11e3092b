"""End-to-end acceptance checks, one test per criterion.

Each test prints a single ``PASS`` or ``FAIL`` line (visible even when
pytest captures output) and then asserts the same verdict.
"""

import itertools
import math
import random
import time
from fractions import Fraction

import numpy as np
import pytest

from thinbands import _kernels
from thinbands.band_core import image_widths, is_isomorphic, make_Z4, rips_step
from thinbands.cone_solver import (
    KSequence,
    area_sequence,
    lengths_recursion,
    mat_A,
    mat_B,
    mat_Bpp,
    mat_Bprime,
    mat_C,
    solve_widths,
)
from thinbands.iet_rauzy import (
    U_INF,
    V_INF,
    V_basis,
    block_sums,
    check_V,
    ergodic_cone,
    mat_R,
    rauzy_veech_composite,
    renormalize_check,
    split_R,
    x_from_w,
)
from thinbands.numerics import as_scalar
from thinbands.surface_sections import (
    _guard,
    bridge_faces,
    edge_active,
    fit_direction,
    genus_check,
    plane_meets_diagonal,
    plane_meets_strip,
    sample_components,
    seed_vertex,
    start_point,
    trace_section_curve,
    vertex_active,
)

LAMBDA = 1.839286755214161


@pytest.fixture
def verdict(capsys):
    def report(n, ok, detail, seconds=None):
        timing = f" [{seconds:.2f} s]" if seconds is not None else ""
        with capsys.disabled():
            print(f"\n{'PASS' if ok else 'FAIL'} criterion {n}: {detail}{timing}")
        assert ok, detail
    return report


def power_ray(M, steps=400):
    v = np.ones(3)
    Mf = np.array(M, dtype=float)
    for _ in range(steps):
        v = Mf @ v
        v /= v[2]
    return v


@pytest.fixture(scope="module")
def sampled(doubling_model):
    t = time.perf_counter()
    rep = sample_components(KSequence.doubling(2), 24, 20, 200, per_level=3, seed=0,
                            model=doubling_model)
    explore_seconds = time.perf_counter() - t
    t = time.perf_counter()
    traced = sample_components(KSequence.doubling(2), 24, 20, 200, per_level=3, seed=0,
                               steps=10**5, model=doubling_model)
    return rep, explore_seconds, traced, time.perf_counter() - t


def test_criterion_1_exact_matrix_identities(verdict):
    t = time.perf_counter()
    problems = []
    for k, l, m in itertools.product(range(1, 11), repeat=3):
        if not (mat_B(k).dot(mat_B(l)).dot(mat_B(m)) == mat_Bprime(k, l, m).dot(mat_Bpp())).all():
            problems.append(f"B identity at {(k, l, m)}")
    Rp, _ = split_R()
    P2 = Rp.dot(Rp)
    if not (P2.dot(P2) == P2).all():
        problems.append("(R')^4 != (R')^2")
    if list(Rp.dot(np.array(U_INF, dtype=object))) != list(V_INF):
        problems.append("R' u_inf != v_inf")
    if list(Rp.dot(np.array(V_INF, dtype=object))) != list(U_INF):
        problems.append("R' v_inf != u_inf")
    for k in range(1, 11):
        for y in V_basis():
            if not check_V(mat_R(k).dot(np.array(y, dtype=object)))[0]:
                problems.append(f"R({k}) leaves V")
    # R(k) is nonnegative and its zero pattern only depends on whether k = 1,
    # so the words over {1, 2} cover every six-fold product with k >= 1
    zero_words = []
    for ks in itertools.product((1, 2), repeat=6):
        P = mat_R(ks[0])
        for k in ks[1:]:
            P = P.dot(mat_R(k))
        if not (P > 0).all():
            zero_words.append(ks)
    if zero_words:
        P = np.linalg.matrix_power(np.array(mat_R(1), dtype=np.int64), 6)
        problems.append(f"{len(zero_words)}/64 six-fold words over {{1, 2}} have zero entries, "
                        f"e.g. R(1)^6 has {int((P == 0).sum())} zeros")
    dt = time.perf_counter() - t
    ok = not problems and dt < 1.0
    detail = "; ".join(problems) if problems else "all identities hold"
    if dt >= 1.0:
        detail += f"; runtime {dt:.2f} s exceeds 1 s"
    verdict(1, ok, detail, dt)


def test_criterion_2_rips_step(verdict):
    t = time.perf_counter()
    rng = random.Random(2024)
    fails = 0
    for _ in range(50):
        k = rng.randint(1, 5)
        wp = [Fraction(rng.randint(1, 99), rng.randint(1, 50)) for _ in range(3)]
        # Z(w', l) is defined for w'_1 >= w'_2
        if wp[0] < wp[1]:
            wp[0], wp[1] = wp[1], wp[0]
        l = [Fraction(rng.randint(1, 30), rng.randint(1, 9)) for _ in range(4)]
        lA = [sum(l[r] * mat_A(k)[r, c] for r in range(4)) for c in range(4)]
        out = rips_step(make_Z4(image_widths(k, wp), l), k)
        fails += not is_isomorphic(out, make_Z4(tuple(wp), lA))
    dt = time.perf_counter() - t
    ok = fails == 0 and dt < 5.0
    verdict(2, ok, f"{50 - fails}/50 instances isomorphic to Z(w', l A(k))", dt)


def test_criterion_3_width_solver(verdict, doubling_solution):
    t = time.perf_counter()
    trib = solve_widths(KSequence.constant(1), 60, tol=1e-20)
    w = np.array([float(x.mid) for x in trib.w0])
    oracle = power_ray(mat_B(1))
    proj_err = float(np.abs(w / w[2] - oracle).max())
    lam_err = abs(w[1] - LAMBDA)
    sol = doubling_solution
    ineq = all(sol.stage_inequalities(i) for i in range(25))
    finite = [d for d in sol.contraction if d.hi != math.inf]
    mono = all(b.lo <= a.hi for a, b in zip(finite, finite[1:])) and len(finite) > 1
    dt = time.perf_counter() - t
    ok = proj_err < 1e-12 and lam_err < 1e-12 and ineq and mono
    verdict(3, ok, f"tribonacci ray error {proj_err:.1e}; doubling inequalities to depth 24: {ineq}; "
                   f"diameter monotone over {len(finite)} stages: {mono}", dt)


def test_criterion_4_area_certificates(verdict, doubling_solution):
    t = time.perf_counter()
    ks = KSequence.doubling(2)
    assert ks.terms(16) == [2 ** (i + 1) for i in range(16)]
    rep = area_sequence(ks, 15, widths=doubling_solution)
    S = rep.area_scalars()
    # an enclosure of S_15 from the certified width box at stage 15
    l15 = np.array(lengths_recursion((1, 1, 1, 1), ks, 15), dtype=object)
    box = doubling_solution.enclosures[15]
    scale = as_scalar(doubling_solution.exact[15][2])
    lc = l15.dot(mat_C())
    S15_box = sum((as_scalar(int(c)) * b * scale for c, b in zip(lc, box)), as_scalar(0))
    dt = time.perf_counter() - t
    ok = rep.all_certified and S[15].lo > 0 and S15_box.lo > 0 and rep.lower_bound > 0 \
        and S[15].lo >= rep.lower_bound
    verdict(4, ok, f"{sum(rep.certificates)}/15 steps certified; S_15 in [{float(S15_box.lo):.6g}, "
                   f"{float(S15_box.hi):.6g}], floor {float(rep.lower_bound):.6g}", dt)


def test_criterion_5_renormalization_chain(verdict, doubling_solution, doubling):
    t = time.perf_counter()
    sol = doubling_solution
    fails = []
    for i in range(21):
        if i < 21 and not renormalize_check(x_from_w(sol.stage(i)), doubling[i], x_from_w(sol.stage(i + 1))):
            fails.append(f"enclosure step {i}")
        if not renormalize_check(x_from_w(sol.exact[i]), doubling[i], x_from_w(sol.exact[i + 1])):
            fails.append(f"exact step {i}")
        x = x_from_w(sol.exact[i])
        tops, bots = block_sums(x)
        if tops != bots or tops != [sol.exact[i][0]] * 3:
            fails.append(f"block sums at {i}")
        ok_v, res = check_V(x)
        if not ok_v or res != (0, 0):
            fails.append(f"V at {i}")
    dt = time.perf_counter() - t
    verdict(5, not fails, "; ".join(fails) or "21 stages renormalize; block sums and V exact", dt)


def test_criterion_6_rauzy_veech_composite(verdict):
    t = time.perf_counter()
    bad = [k for k in range(1, 5) if not (rauzy_veech_composite(k) == mat_R(k)).all()]
    dt = time.perf_counter() - t
    verdict(6, not bad, f"composite differs from R(k) for k in {bad}" if bad
            else "induction schedule reproduces R(k) for k = 1..4", dt)


def test_criterion_7_non_unique_ergodicity(verdict, doubling_solution, doubling):
    t = time.perf_counter()
    cone = ergodic_cone(doubling, 24, widths=doubling_solution)
    gap = abs(cone.relation_gap)
    dt = time.perf_counter() - t
    ok = cone.sin_angle > 0 and abs(cone.ratio - 1) <= 1e-6 and gap > 10 * cone.error
    verdict(7, ok, f"sin angle {cone.sin_angle:.4f}; alpha/beta - 1 = {cone.ratio - 1:.1e}; "
                   f"relation gap {gap:.4f} vs error {cone.error:.1e}", dt)


def test_criterion_8_section_graph_oracle(verdict, doubling_model):
    t = time.perf_counter()
    model = doubling_model
    rng = random.Random(8)
    H, sigma = model.H, model.sigma
    mismatches = 0
    active = 0
    for _ in range(10_000):
        n = tuple(rng.randint(-20, 20) for _ in range(3))
        i = rng.randint(1, 3)
        base = 2 * sum(h * x for h, x in zip(H, n))
        a = base + Fraction(rng.randint(-1000, 3000), 1000) * sigma / 2 + Fraction(1, 7919)
        e = edge_active(model, n, i, a)
        active += e
        mismatches += e != plane_meets_strip(model, n, i, a)
        mismatches += vertex_active(model, n, a) != plane_meets_diagonal(model, n, a)
    g = genus_check()
    dt = time.perf_counter() - t
    ok = mismatches == 0 and g.as_tuple() == (8, 24, 12, 3) and g.faces_per_edge == (2,) and dt < 5.0
    verdict(8, ok, f"{mismatches} mismatches in 10^4 samples ({active} active edges); "
                   f"genus report {g.as_tuple()}, faces per edge {g.faces_per_edge}", dt)


def test_criterion_9_two_endedness(verdict, sampled):
    rep, seconds, _, _ = sampled
    comps = rep.components
    trees = all(c.is_tree for c in comps)
    two = sum(c.end_estimate == 2 for c in comps)
    ok = len(rep.levels) == 20 and len(comps) >= 50 and trees and two >= 0.9 * len(comps) \
        and seconds < 120
    verdict(9, ok, f"{len(comps)} components on {len(rep.levels)} levels; all trees: {trees}; "
                   f"two-ended {two}/{len(comps)}", seconds)


def test_criterion_10_asymptotic_direction(verdict, sampled, doubling_model):
    _, _, traced, seconds = sampled
    model = doubling_model
    h = model.H_float / np.linalg.norm(model.H_float)
    hmax = max(abs(float(np.dot(f.direction, h))) for f in traced.fits)
    # two disjoint components in one plane
    a = model.sigma * Fraction(3, 7)
    seeds = [seed_vertex(model, a, 0, 0), seed_vertex(model, a, 700, -400)]
    vsets = []
    dirs = []
    for n in seeds:
        verts = _kernels.gamma_bfs(n, float(a), model.H_float, model.w_float,
                                   float(model.sigma), 200, _guard(model))[0]
        vsets.append({tuple(v) for v in verts.tolist()})
        f, p = next((f, start_point(model, f, a)) for i in (1, 2, 3) for f in bridge_faces(model, n, i)
                    if start_point(model, f, a) is not None)
        dirs.append(np.array(fit_direction(trace_section_curve(model, f, p, 10**5, a=float(a))).direction))
    disjoint = not (vsets[0] & vsets[1])
    pair = math.degrees(math.acos(min(1.0, abs(float(dirs[0] @ dirs[1])))))
    ok = (traced.n_clusters == 2 and traced.antipodal and max(traced.spreads) < 5.0
          and hmax < 1e-9 and disjoint and pair < 5.0)
    verdict(10, ok, f"{traced.n_clusters} clusters from {len(traced.fits)} curves, antipodal: "
                    f"{traced.antipodal}, spreads {', '.join(f'{s:.3f}' for s in traced.spreads)} deg; "
                    f"max |d.H| {hmax:.1e}; same-plane pair {pair:.3f} deg, disjoint: {disjoint}",
            seconds)
