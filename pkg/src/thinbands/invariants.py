"""Checks of the exact identities and structural invariants.

Each check returns a :class:`Check`.  The matrix tables are parameters so
that a tampered table can be fed in to exercise the failure path.
"""

from __future__ import annotations

import itertools
import random
import time
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, List

import numpy as np

from .band_core import image_widths, is_isomorphic, make_Z4, predicted_rips_output, rips_step
from .cone_solver import KSequence, mat_B, mat_Bpp, mat_Bprime, solve_widths
from .iet_rauzy import (
    U_INF,
    V_INF,
    V_basis,
    block_sums,
    check_V,
    mat_R,
    rauzy_veech_composite,
    x_from_w,
)
from .surface_sections import (
    SurfaceModel,
    edge_active,
    genus_check,
    plane_meets_diagonal,
    plane_meets_strip,
    vertex_active,
)

__all__ = ["Check", "run_all", "CHECKS"]


@dataclass(frozen=True)
class Check:
    name: str
    ok: bool
    detail: str = ""
    seconds: float = 0.0


def _split(R: Callable[[int], np.ndarray]):
    r1, r2 = R(1), R(2)
    Rp = r2 - r1
    return Rp, r1 - Rp


def check_b_identity(kmax: int = 10) -> Check:
    bad = [
        (k, l, m)
        for k, l, m in itertools.product(range(1, kmax + 1), repeat=3)
        if not (mat_B(k).dot(mat_B(l)).dot(mat_B(m)) == mat_Bprime(k, l, m).dot(mat_Bpp())).all()
    ]
    return Check("B(k)B(l)B(m) = B'(k,l,m)B''", not bad, f"failures: {bad[:3]}" if bad else "")


def check_R_identities(R: Callable[[int], np.ndarray] = mat_R, kmax: int = 10) -> Check:
    Rp, Rpp = _split(R)
    msgs = []
    for k in range(1, kmax + 1):
        if not (R(k) == k * Rp + Rpp).all():
            msgs.append(f"R({k}) is not affine in k")
            break
    P2 = Rp.dot(Rp)
    if not (P2.dot(P2) == P2).all():
        msgs.append("R'^4 != R'^2")
    u, v = np.array(U_INF, dtype=object), np.array(V_INF, dtype=object)
    if tuple(Rp.dot(u)) != tuple(v) or tuple(Rp.dot(v)) != tuple(u):
        msgs.append("R' does not swap u_inf and v_inf")
    for k in range(1, kmax + 1):
        for b in V_basis():
            if not check_V(tuple(R(k).dot(np.array(b, dtype=object))))[0]:
                msgs.append(f"R({k}) does not preserve V")
                break
    return Check("R(k) identities", not msgs, "; ".join(msgs))


def check_R_positive_products(R: Callable[[int], np.ndarray] = mat_R) -> Check:
    """Six-fold products with every ``k >= 2`` and eight-fold products with ``k >= 1``.

    The zero pattern of ``R(k)`` only depends on whether ``k = 1``, so the
    patterns over ``{1, 2}`` cover every ``k``.  Six factors do not suffice
    once ``k = 1`` occurs: ``R(1)^6`` has zero entries.
    """
    bad = []
    for n, ks_range in ((6, (2,)), (8, (1, 2))):
        for ks in itertools.product(ks_range, repeat=n):
            P = R(ks[0])
            for k in ks[1:]:
                P = P.dot(R(k))
            if not (P > 0).all():
                bad.append(ks)
                break
    return Check("long R products positive", not bad, f"failure at {bad}" if bad else "")


def check_rips(n: int = 50, seed: int = 0) -> Check:
    rng = random.Random(seed)
    fails = 0
    for _ in range(n):
        k = rng.randint(1, 5)
        wpp = [Fraction(rng.randint(1, 99), rng.randint(1, 50)) for _ in range(3)]
        wp = image_widths(rng.randint(1, 5), wpp)
        l = [Fraction(rng.randint(1, 30), rng.randint(1, 9)) for _ in range(4)]
        out = rips_step(make_Z4(image_widths(k, wp), l), k)
        fails += not is_isomorphic(out, predicted_rips_output(wp, l, k))
    return Check("Rips step reproduces Z(w', lA(k))", fails == 0, f"{fails}/{n} failed")


def check_rauzy_veech(R: Callable[[int], np.ndarray] = mat_R, kmax: int = 4) -> Check:
    bad = [k for k in range(1, kmax + 1) if not (rauzy_veech_composite(k) == R(k)).all()]
    return Check("Rauzy-Veech composite equals R(k)", not bad, f"k = {bad}" if bad else "")


def check_chain(R: Callable[[int], np.ndarray] = mat_R, depth: int = 20) -> Check:
    sol = solve_widths(KSequence.doubling(2), max(depth + 1, 6), tol=1e300)
    msgs = []
    for i in range(depth + 1):
        x, xn = x_from_w(sol.exact[i]), x_from_w(sol.exact[i + 1])
        y = tuple(R(sol.ks[i]).dot(np.array(xn, dtype=object)))
        if y != tuple(x):
            msgs.append(f"stage {i}")
        tops, bots = block_sums(x)
        if any(t != sol.exact[i][0] for t in tops + bots):
            msgs.append(f"block sums at {i}")
        if not check_V(x)[0]:
            msgs.append(f"V at {i}")
    return Check("renormalization chain", not msgs, "; ".join(msgs[:3]))


def check_surface(samples: int = 10_000, seed: int = 0) -> Check:
    g = genus_check()
    msgs = []
    if g.as_tuple() != (8, 24, 12, 3) or g.faces_per_edge != (2,):
        msgs.append(f"genus report {g}")
    sol = solve_widths(KSequence.doubling(2), 12, tol=1e300)
    model = SurfaceModel.from_solution(sol)
    rng = random.Random(seed)
    sigma = model.sigma
    for _ in range(samples):
        n = tuple(rng.randint(-20, 20) for _ in range(3))
        i = rng.randint(1, 3)
        # levels near the vertex and edge ranges of n
        base = 2 * sum(h * x for h, x in zip(model.H, n))
        a = base + Fraction(rng.randint(-1000, 3000), 1000) * sigma / 2 + Fraction(1, 7919)
        if edge_active(model, n, i, a) != plane_meets_strip(model, n, i, a):
            msgs.append(f"edge predicate at {n}, {i}")
            break
        if vertex_active(model, n, a) != plane_meets_diagonal(model, n, a):
            msgs.append(f"vertex predicate at {n}")
            break
    return Check("section-graph predicates and genus", not msgs, "; ".join(msgs))


CHECKS = {
    "b_identity": lambda R: check_b_identity(),
    "r_identities": lambda R: check_R_identities(R),
    "r_positive": lambda R: check_R_positive_products(R),
    "rips": lambda R: check_rips(),
    "rauzy_veech": lambda R: check_rauzy_veech(R),
    "chain": lambda R: check_chain(R),
    "surface": lambda R: check_surface(),
}


def run_all(R: Callable[[int], np.ndarray] = mat_R) -> List[Check]:
    out = []
    for name, fn in CHECKS.items():
        t = time.perf_counter()
        c = fn(R)
        out.append(Check(c.name, c.ok, c.detail, time.perf_counter() - t))
    return out
