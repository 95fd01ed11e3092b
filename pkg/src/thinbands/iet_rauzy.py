"""The nine-interval exchange on three transversals and its renormalization.

Parameters ``x_1..x_9`` are the lengths of the labelled subintervals.  Each
transversal ``T_b`` carries a top arrangement and a bottom arrangement of
labels; the map sends a point of top label ``m`` to the same offset inside
bottom label ``m``.  Stages are linked by ``x_i = R(k_i) x_{i+1}``.
"""

from __future__ import annotations

import csv
import io
import math
import warnings
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from . import _kernels
from .cone_solver import KSequence, WidthSolution, solve_widths
from .errors import AccuracyError, ConfigurationError, DomainError, StructuralError
from .numerics import Scalar, as_scalar, hilbert_distance

__all__ = [
    "TOP_BLOCKS",
    "BOTTOM_BLOCKS",
    "U_INF",
    "V_INF",
    "IET",
    "IETStage",
    "ErgodicCone",
    "EquidistributionReport",
    "x_from_w",
    "block_sums",
    "iet_map",
    "iet_inverse",
    "mat_R",
    "split_R",
    "V_basis",
    "check_V",
    "renormalize_check",
    "rauzy_veech_composite",
    "ergodic_cone",
    "transversal_integrals",
    "equidistribution_test",
    "orbit_csv",
]

TOP_BLOCKS: Tuple[Tuple[int, ...], ...] = ((1, 2, 3, 4), (5, 6), (7, 8, 9))
BOTTOM_BLOCKS: Tuple[Tuple[int, ...], ...] = ((3, 7, 6), (4, 8, 1), (9, 2, 5))

U_INF = (1, 0, 0, 0, 0, 1, 0, 0, 0)
V_INF = (0, 0, 0, 0, 0, 0, 0, 0, 1)

# label j of the induced exchange carries the parameter x_{PHI[j]} of the next stage
_RV_RELABEL = {5: 1, 6: 2, 4: 3, 9: 4, 7: 5, 8: 6, 1: 7, 2: 8, 3: 9}


def _num(x):
    if isinstance(x, Scalar) and x.is_exact:
        return Fraction(*map(int, x.lo.as_integer_ratio()))
    return x


# -- exchanges ----------------------------------------------------------

@dataclass(frozen=True)
class IET:
    """Interval exchange on several transversals.

    ``top[b]`` and ``bottom[b]`` list the labels of transversal ``b`` from
    left to right; ``lengths`` maps label to length.  Transversals are
    numbered from 1 in the public API.
    """

    top: Tuple[Tuple[int, ...], ...]
    bottom: Tuple[Tuple[int, ...], ...]
    lengths: Tuple

    def __post_init__(self):
        labels_top = sorted(l for r in self.top for l in r)
        labels_bot = sorted(l for r in self.bottom for l in r)
        if labels_top != labels_bot or labels_top != list(range(1, len(self.lengths) + 1)):
            raise DomainError("top and bottom rows must use labels 1..n exactly once")

    @property
    def n_transversals(self) -> int:
        return len(self.top)

    def length(self, label: int):
        return self.lengths[label - 1]

    def transversal_length(self, b: int):
        return sum((self.length(l) for l in self.top[b - 1]), 0 * self.lengths[0])

    def row_sums(self):
        tops = [sum((self.length(l) for l in r), 0 * self.lengths[0]) for r in self.top]
        bots = [sum((self.length(l) for l in r), 0 * self.lengths[0]) for r in self.bottom]
        return tops, bots

    def _starts(self, rows):
        out = {}
        for b, r in enumerate(rows, start=1):
            pos = 0 * self.lengths[0]
            for l in r:
                out[l] = (b, pos)
                pos = pos + self.length(l)
        return out

    @property
    def top_starts(self) -> Dict[int, tuple]:
        return self._starts(self.top)

    @property
    def bottom_starts(self) -> Dict[int, tuple]:
        return self._starts(self.bottom)

    def locate(self, b: int, offset, rows=None) -> int:
        """Label whose half-open subinterval ``[start, end)`` of transversal ``b`` holds ``offset``."""
        rows = self.top if rows is None else rows
        if not 1 <= b <= len(rows):
            raise DomainError(f"no transversal {b}")
        pos = 0 * self.lengths[0]
        for l in rows[b - 1]:
            end = pos + self.length(l)
            if _ambiguous(offset, pos) or _ambiguous(offset, end):
                raise AccuracyError(f"offset {offset} is not separated from a discontinuity")
            if not _lt(offset, pos) and _lt(offset, end):
                return l
            pos = end
        raise DomainError(f"offset {offset} outside transversal {b}")

    def map(self, p: Tuple[int, object]) -> Tuple[int, object]:
        b, off = p
        label = self.locate(b, off)
        tb, ts = self.top_starts[label]
        bb, bs = self.bottom_starts[label]
        return bb, off - ts + bs

    def inverse(self, p: Tuple[int, object]) -> Tuple[int, object]:
        b, off = p
        label = self.locate(b, off, self.bottom)
        tb, ts = self.top_starts[label]
        bb, bs = self.bottom_starts[label]
        return tb, off - bs + ts

    def float_tables(self):
        """Arrays used by the compiled orbit kernel."""
        n = len(self.lengths)
        lens = np.array([float(x) for x in self.lengths])
        top_t = np.zeros(n, dtype=np.int64)
        top_s = np.zeros(n)
        bot_t = np.zeros(n, dtype=np.int64)
        bot_s = np.zeros(n)
        for l, (b, s) in self.top_starts.items():
            top_t[l - 1], top_s[l - 1] = b - 1, float(s)
        for l, (b, s) in self.bottom_starts.items():
            bot_t[l - 1], bot_s[l - 1] = b - 1, float(s)
        order = [np.array([l - 1 for l in r], dtype=np.int64) for r in self.top]
        rows = np.full((len(self.top), max(len(r) for r in self.top)), -1, dtype=np.int64)
        for b, r in enumerate(order):
            rows[b, : len(r)] = r
        return lens, rows, top_s, bot_t, bot_s


def _lt(a, b) -> bool:
    if isinstance(a, Scalar) or isinstance(b, Scalar):
        return as_scalar(a).certainly_lt(as_scalar(b))
    return a < b


def _gt(a, b) -> bool:
    return _lt(b, a)


def _ambiguous(a, b) -> bool:
    """True when Scalar enclosures cannot order ``a`` and ``b``."""
    if isinstance(a, Scalar) or isinstance(b, Scalar):
        sa, sb = as_scalar(a), as_scalar(b)
        return sa.straddles(sb) and not (sa.is_exact and sb.is_exact)
    return False


def x_from_w(w: Sequence) -> Tuple:
    """Parameters ``(w1-w2-w3, w3, w2-w3, w3, w2, w1-w2, w3, w2, w1-w2-w3)``."""
    if len(w) != 3:
        raise DomainError("w must have 3 entries")
    w1, w2, w3 = (_num(v) for v in w)
    if not (_gt(w1, w2 + w3) and _gt(w2, w3) and _gt(w3, 0)):
        raise DomainError("need w1 > w2 + w3 and w2 > w3 > 0")
    a = w1 - w2 - w3
    return (a, w3, w2 - w3, w3, w2, w1 - w2, w3, w2, a)


@dataclass(frozen=True)
class IETStage(IET):
    """The exchange attached to stage ``index`` with widths ``w``."""

    index: int = 0
    w: Tuple = ()

    @classmethod
    def from_w(cls, w: Sequence, index: int = 0) -> "IETStage":
        x = x_from_w(w)
        return cls(TOP_BLOCKS, BOTTOM_BLOCKS, tuple(x), index=index, w=tuple(_num(v) for v in w))

    @classmethod
    def from_x(cls, x: Sequence, index: int = 0) -> "IETStage":
        return cls(TOP_BLOCKS, BOTTOM_BLOCKS, tuple(_num(v) for v in x), index=index)

    @property
    def x(self) -> Tuple:
        return self.lengths


def block_sums(x: Sequence) -> Tuple[List, List]:
    """Sums of ``x`` over the top and bottom blocks of each transversal."""
    tops = [sum(x[l - 1] for l in r) for r in TOP_BLOCKS]
    bots = [sum(x[l - 1] for l in r) for r in BOTTOM_BLOCKS]
    return tops, bots


def iet_map(stage: IET, p: Tuple[int, object]) -> Tuple[int, object]:
    return stage.map(p)


def iet_inverse(stage: IET, p: Tuple[int, object]) -> Tuple[int, object]:
    return stage.inverse(p)


# -- renormalization matrices -------------------------------------------

def mat_R(k: int) -> np.ndarray:
    """Integer matrix with ``x_i = R(k_i) x_{i+1}``."""
    if int(k) != k or k < 1:
        raise DomainError("k must be >= 1")
    k = int(k)
    K = k - 1
    M = np.zeros((9, 9), dtype=object)
    rows = {
        1: {2: K, 3: K, 7: K + 1, 8: K, 9: K},
        2: {8: 1},
        3: {2: 1, 9: 1},
        4: {3: 1, 7: 1},
        5: {1: 1, 2: 1, 3: 1, 4: 1},
        6: {2: K + 1, 3: K + 1, 7: K + 1, 8: K, 9: K},
        7: {5: 1},
        8: {2: 1, 3: 1, 6: 1},
        9: {1: K, 2: K, 3: K, 4: K + 1, 8: K},
    }
    for i, row in rows.items():
        for j, c in row.items():
            M[i - 1, j - 1] = c
    return M


def split_R(k: int = 1) -> Tuple[np.ndarray, np.ndarray]:
    """``(R', R'')`` with ``R(k) = k R' + R''``; both are independent of ``k``."""
    r1, r2 = mat_R(1), mat_R(2)
    Rp = r2 - r1
    Rpp = r1 - Rp
    return Rp, Rpp


def V_basis() -> List[Tuple[int, ...]]:
    """Integer basis of ``V`` (dimension 7), free in ``x2, x3, x4, x6, x7, x8, x9``."""
    basis = []
    for free in (1, 2, 3, 5, 6, 7, 8):
        v = [0] * 9
        v[free] = 1
        v[4] = v[7] + v[6] - v[1]  # x5 - x8 = x7 - x2
        v[0] = v[5] - v[3] + v[4] - v[7]  # x1 + x4 - x6 = x5 - x8
        basis.append(tuple(v))
    return basis


def check_V(y: Sequence) -> Tuple[bool, Tuple]:
    """Membership in ``V``: ``y1+y4-y6 = y5-y8 = y7-y2``.

    Returns the flag and the residuals ``(e1 - e2, e2 - e3)`` of the three
    expressions.  For Scalar input the flag is true when both residual
    enclosures contain 0.
    """
    y = [_num(v) for v in y]
    e1 = y[0] + y[3] - y[5]
    e2 = y[4] - y[7]
    e3 = y[6] - y[1]
    r = (e1 - e2, e2 - e3)
    if any(isinstance(v, Scalar) for v in r):
        ok = all(as_scalar(v).contains(0) for v in r)
    elif any(isinstance(v, float) for v in r):
        scale = max(1.0, max(abs(float(v)) for v in y))
        ok = all(abs(float(v)) <= 1e-12 * scale for v in r)
    else:
        ok = all(v == 0 for v in r)
    return ok, r


def renormalize_check(x_cur: Sequence, k: int, x_next: Sequence) -> bool:
    """``x_cur = R(k) x_next`` exactly, or within enclosures for Scalars."""
    R = mat_R(k)
    cur = [_num(v) for v in x_cur]
    nxt = [_num(v) for v in x_next]
    for i in range(9):
        s = sum((R[i, j] * nxt[j] for j in range(9) if R[i, j]), 0 * nxt[0])
        if isinstance(s, Scalar) or isinstance(cur[i], Scalar):
            if not as_scalar(s).straddles(cur[i]):
                return False
        elif isinstance(s, float) or isinstance(cur[i], float):
            if abs(float(s) - float(cur[i])) > 1e-12 * max(1.0, abs(float(s))):
                return False
        elif s != cur[i]:
            return False
    return True


# -- Rauzy-Veech induction ----------------------------------------------

def _rv_schedule(k: int) -> List[int]:
    # transversal index (0-based) of each elementary step
    return [2] * (2 * k - 1) + [1] * 2 + [0] * (3 * k) + [2] * 2


def rauzy_veech_composite(k: int, x_next: Optional[Sequence] = None) -> np.ndarray:
    """Run block-synchronised Rauzy-Veech induction and return its parameter matrix.

    The exchange with parameters ``R(k) x_next`` is induced step by step,
    each step comparing the last top and last bottom interval of one
    transversal and cutting the longer one.  After ``5k + 3`` steps the
    induced exchange is relabelled onto the original permutation.  The
    returned integer matrix ``M`` satisfies ``x_old = M x_new``.  Raises
    :class:`StructuralError` when the induced exchange does not come back to
    the original permutation or its lengths disagree with ``x_next``.
    """
    k = int(k)
    if x_next is None:
        # a generic point of V built from rational widths
        x_next = x_from_w((Fraction(97, 7), Fraction(31, 11), Fraction(13, 17)))
    x_next = [Fraction(v) for v in x_next]
    y = mat_R(k).dot(np.array(x_next, dtype=object))
    lam = {i + 1: y[i] for i in range(9)}
    top = [list(r) for r in TOP_BLOCKS]
    bot = [list(r) for r in BOTTOM_BLOCKS]
    M = np.eye(9, dtype=object)
    for b in _rv_schedule(k):
        a, c = top[b][-1], bot[b][-1]
        if lam[a] > lam[c]:
            winner, loser, rows = a, c, bot
        elif lam[c] > lam[a]:
            winner, loser, rows = c, a, top
        else:
            raise StructuralError("tie in Rauzy-Veech step")
        lam[winner] -= lam[loser]
        rows[b].pop()
        for r in rows:
            if winner in r:
                r.insert(r.index(winner) + 1, loser)
                break
        E = np.eye(9, dtype=object)
        E[winner - 1, loser - 1] += 1
        M = M.dot(E)
    phi = _RV_RELABEL
    order = (1, 2, 0)
    new_top = tuple(tuple(phi[l] for l in top[b]) for b in order)
    new_bot = tuple(tuple(phi[l] for l in bot[b]) for b in order)
    if new_top != TOP_BLOCKS or new_bot != BOTTOM_BLOCKS:
        raise StructuralError("induced exchange does not return to the original permutation")
    if any(lam[j] != x_next[phi[j] - 1] for j in phi):
        raise StructuralError("induced lengths disagree with the next stage")
    P = np.zeros((9, 9), dtype=object)
    for j, f in phi.items():
        P[j - 1, f - 1] = 1
    return M.dot(P)


# -- invariant measures -------------------------------------------------

@dataclass(frozen=True)
class ErgodicCone:
    """Approximations ``u, v`` of the extremal invariant measures of stage 0.

    ``u`` and ``v`` are normalised to unit sum.  ``error`` bounds the
    distance (sup norm, same normalisation) from each to its limit.
    ``alpha``, ``beta`` are least-squares coefficients of the normalised
    ``x0`` in terms of ``u`` and ``v``.
    """

    ks: Tuple[int, ...]
    depth: int
    u: Tuple[float, ...]
    v: Tuple[float, ...]
    u_exact: Tuple[Fraction, ...]
    v_exact: Tuple[Fraction, ...]
    error: float
    sin_angle: float
    hilbert_separation: float
    alpha: float
    beta: float
    residual: float

    @property
    def ratio(self) -> float:
        return self.alpha / self.beta

    @property
    def relation_gap(self) -> float:
        """``(u3 + u6) - (u8 + u9)``, nonzero for a measure with no asymptotic cycle."""
        u = self.u_exact
        return float(u[2] + u[5] - u[7] - u[8])


def _inf_norm(M: np.ndarray) -> Fraction:
    return max(sum(abs(x) for x in row) for row in M)


def ergodic_cone(ks: KSequence, depth: int, widths: Optional[WidthSolution] = None,
                 min_sin: float = 1e-6) -> ErgodicCone:
    """Images of ``u_inf`` and ``v_inf`` under ``prod_{j<depth} R(k_j)/k_j``.

    The products are exact rationals.  ``error`` comes from the tail of the
    infinite product: with ``c`` bounding every power of ``R'``, the tail
    differs from a power of ``R'`` by at most ``c (exp(c S) - 1)`` where
    ``S = ||R''|| sum_{j >= depth} 1/k_j``.
    """
    if not ks.summable:
        raise ConfigurationError("ergodic cone needs a summable k-sequence")
    if depth < 12 or depth % 2:
        raise DomainError("depth must be an even integer >= 12")
    kk = ks.terms(depth)
    Rp, Rpp = split_R()
    P = np.eye(9, dtype=object) * Fraction(1)
    for k in kk:
        P = P.dot(mat_R(k) * Fraction(1, k))
    u = P.dot(np.array(U_INF, dtype=object))
    v = P.dot(np.array(V_INF, dtype=object))
    su, sv = sum(u), sum(v)
    un = tuple(Fraction(x) / su for x in u)
    vn = tuple(Fraction(x) / sv for x in v)

    c = Fraction(1)
    Q = np.eye(9, dtype=object)
    for _ in range(4):
        Q = Q.dot(Rp)
        c = max(c, _inf_norm(Q))
    if ks.kind == "doubling" or ks.kind == "geometric":
        # geometric tail: sum_{j >= d} 1/(c r^j) = r / ((r - 1) c r^d)
        tail = Fraction(ks.r, (ks.r - 1) * ks[depth])
    else:
        raise ConfigurationError("no tail bound for this k-sequence")
    S = float(_inf_norm(Rpp) * tail)
    bound = float(c) * math.expm1(float(c) * S)
    Pn = float(_inf_norm(P))
    error = Pn * bound / float(min(su, sv)) * 2

    uf = np.array([float(x) for x in un])
    vf = np.array([float(x) for x in vn])
    cos = float(uf @ vf / (np.linalg.norm(uf) * np.linalg.norm(vf)))
    sin = math.sqrt(max(0.0, 1 - cos * cos))
    hs = float(hilbert_distance(un, vn).mid) if all(x > 0 for x in un + vn) else math.inf

    if widths is None:
        widths = solve_widths(ks, depth, tol=1e300)
    x0 = np.array([float(x) for x in x_from_w(widths.exact[0])])
    x0 = x0 / x0.sum()
    A = np.stack([uf, vf], axis=1)
    (alpha, beta), *_ = np.linalg.lstsq(A, x0, rcond=None)
    resid = float(np.linalg.norm(A @ np.array([alpha, beta]) - x0))
    # the normalisations of u and v differ; rescale to the raw images
    alpha_raw, beta_raw = alpha / float(su), beta / float(sv)
    if sin < min_sin:
        warnings.warn(f"u and v nearly collinear (sin angle {sin:.3g})", RuntimeWarning)
    return ErgodicCone(
        ks=tuple(kk), depth=depth, u=tuple(uf), v=tuple(vf), u_exact=un, v_exact=vn,
        error=error, sin_angle=sin, hilbert_separation=hs,
        alpha=float(alpha_raw), beta=float(beta_raw), residual=resid,
    )


def transversal_integrals(y: Sequence) -> Tuple:
    """Integrals of the measure ``y`` over four closed transversals."""
    y = [_num(v) for v in y]
    y1, y2, y3, y4, y5, y6, y7, y8, y9 = y
    return (
        y2 + y3 + y4 + y5 + y6,
        y2 + y5 + y7 + y8 + y9,
        y2 + 2 * y3 + y4 + y6 + y7,
        y2 + 2 * y3 + y6 + 2 * y7,
    )


# -- orbits -------------------------------------------------------------

@dataclass(frozen=True)
class EquidistributionReport:
    n_steps: int
    eps: float
    dense: bool
    empty_bins: int
    total_bins: int
    periodic: bool
    period: Optional[int]
    restarts: int
    frequencies: Tuple[float, ...]


def _exact_orbit(T: IET, start, n):
    p = start
    for step in range(1, n + 1):
        p = T.map(p)
        if p == start:
            return step
    return None


def equidistribution_test(stage: IET, N: int, eps, start=None, seed: int = 0,
                          max_restarts: int = 10) -> EquidistributionReport:
    """Run ``N`` steps of the orbit and check every ``eps``-bin is visited.

    With exact (rational) lengths and start point the orbit is followed
    exactly and a return to the start is reported as a periodic orbit.
    Otherwise the compiled float kernel is used; a landing on a breakpoint
    restarts the orbit from a perturbed point.
    """
    if N < 1 or not float(eps) > 0:
        raise DomainError("need N >= 1 and eps > 0")
    rng = np.random.default_rng(seed)
    exact = all(isinstance(v, (int, Fraction)) for v in stage.lengths)
    nb = stage.n_transversals
    if start is None:
        L = stage.transversal_length(1)
        start = (1, Fraction(L) * Fraction(int(rng.integers(1, 10**9)), 10**9) if exact
                 else float(L) * float(rng.uniform(0.1, 0.9)))
    period = None
    if exact and isinstance(start[1], (int, Fraction)):
        period = _exact_orbit(stage, (start[0], Fraction(start[1])), N)
    lens, rows, top_s, bot_t, bot_s = stage.float_tables()
    t0, o0 = start[0] - 1, float(start[1])
    restarts = 0
    while True:
        ts, offs, labels, ok = _kernels.iet_orbit(lens, rows, top_s, bot_t, bot_s, t0, o0, N)
        if ok or restarts >= max_restarts:
            break
        restarts += 1
        o0 = o0 + float(rng.uniform(-1e-9, 1e-9)) * float(stage.transversal_length(t0 + 1))
    eps = float(eps)
    total, empty = 0, 0
    for b in range(nb):
        L = float(stage.transversal_length(b + 1))
        nbins = max(1, math.ceil(L / eps))
        sel = offs[ts == b]
        hit = np.zeros(nbins, dtype=bool)
        idx = np.clip((sel / L * nbins).astype(np.int64), 0, nbins - 1)
        hit[idx] = True
        total += nbins
        empty += int(nbins - hit.sum())
    counts = np.bincount(labels, minlength=len(stage.lengths)).astype(float)
    freq = tuple(counts / counts.sum())
    return EquidistributionReport(
        n_steps=N, eps=eps, dense=(empty == 0 and period is None), empty_bins=empty,
        total_bins=total, periodic=period is not None, period=period, restarts=restarts,
        frequencies=freq,
    )


def orbit_csv(stage: IET, start: Tuple[int, float], N: int, header: Sequence[str] = ()) -> str:
    """Orbit itinerary as CSV with columns ``step, transversal, offset, label``.

    ``header`` lines are written first as ``#`` comments.
    """
    lens, rows, top_s, bot_t, bot_s = stage.float_tables()
    ts, offs, labels, ok = _kernels.iet_orbit(
        lens, rows, top_s, bot_t, bot_s, start[0] - 1, float(start[1]), N)
    buf = io.StringIO()
    for h in header:
        buf.write(f"# {h}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["step", "transversal", "offset", "label"])
    for i in range(len(ts)):
        w.writerow([i, int(ts[i]) + 1, repr(float(offs[i])), int(labels[i]) + 1])
    return buf.getvalue()
