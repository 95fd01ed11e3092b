"""Renormalization matrices, the width solver, length recursion and areas.

Widths are column vectors and transform as ``w_i = B(k_i) w_{i+1}``.
Lengths are row vectors and transform as ``l_{i+1} = l_i A(k_i)``.
All integer matrices are numpy arrays of Python ints (``dtype=object``)
so products never overflow or round.
"""

from __future__ import annotations

import json
import numbers
from dataclasses import dataclass
from fractions import Fraction
from typing import List, Optional, Sequence, Tuple

import numpy as np

from .errors import AccuracyError, ConfigurationError, DomainError
from .numerics import DEFAULT_PREC, Scalar, as_scalar, hilbert_distance

__all__ = [
    "KSequence",
    "WidthSolution",
    "AreaReport",
    "mat_A",
    "mat_B",
    "mat_Bprime",
    "mat_Bpp",
    "mat_C",
    "mat_product",
    "cone_diameter",
    "solve_widths",
    "lengths_recursion",
    "area_sequence",
    "H_from_w",
]


def _int_matrix(rows) -> np.ndarray:
    return np.array([[int(x) for x in r] for r in rows], dtype=object)


def _check_k(k: int) -> int:
    if int(k) != k or k < 1:
        raise DomainError(f"k must be a natural number, got {k!r}")
    return int(k)


def mat_B(k: int) -> np.ndarray:
    k = _check_k(k)
    return _int_matrix([[k, k, 1], [1, 0, 0], [0, 1, 0]])


def mat_A(k: int) -> np.ndarray:
    k = _check_k(k)
    return _int_matrix([[0, 0, 1, k], [1, 0, 0, 0], [0, 1, 0, 0], [0, 1, 1, k - 1]])


def mat_Bprime(k: int, l: int, m: int) -> np.ndarray:
    k, l, m = _check_k(k), _check_k(l), _check_k(m)
    return _int_matrix([
        [k * (l - 1) + 1, k * (l * (m - 1) + m), 2 * k - 1],
        [l - 1, l * (m - 1) + 1, 1],
        [0, m - 1, 1],
    ])


def mat_Bpp() -> np.ndarray:
    return _int_matrix([[2, 1, 1], [1, 1, 0], [1, 1, 1]])


def mat_C() -> np.ndarray:
    """Area matrix: band ``j`` of ``Z(w, l)`` has width ``(C w)_j``."""
    return _int_matrix([[1, 0, 0], [0, 1, 0], [0, 0, 1], [1, 0, 0]])


def mat_product(mats: Sequence[np.ndarray]) -> np.ndarray:
    out = None
    for m in mats:
        out = m if out is None else out.dot(m)
    if out is None:
        raise DomainError("empty product")
    return out


# -- k-sequences --------------------------------------------------------

_KINDS = ("list", "constant", "geometric", "doubling")


@dataclass(frozen=True)
class KSequence:
    """A sequence of naturals ``k_0, k_1, ...``.

    ``kind`` is one of ``list``, ``constant``, ``geometric`` (``c r^i``) or
    ``doubling`` (``k_{i+1} = 2 k_i``).  ``length`` bounds explicit lists and
    optionally the constant rule; rule sequences are otherwise infinite.
    """

    kind: str
    values: Tuple[int, ...] = ()
    c: int = 1
    r: int = 2
    length: Optional[int] = None

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise ConfigurationError(f"unknown k-sequence kind {self.kind!r}")
        if self.kind == "list":
            if not self.values or any(int(v) != v or v < 1 for v in self.values):
                raise ConfigurationError("explicit k-list must be non-empty naturals")
            object.__setattr__(self, "length", len(self.values))
        elif self.c < 1:
            raise ConfigurationError("k_0 must be >= 1")
        if self.kind == "geometric" and self.r < 2:
            raise ConfigurationError("geometric ratio must be an integer >= 2")

    @classmethod
    def from_list(cls, values: Sequence[int]) -> "KSequence":
        return cls("list", tuple(int(v) for v in values))

    @classmethod
    def constant(cls, c: int, n: Optional[int] = None) -> "KSequence":
        return cls("constant", c=int(c), length=n)

    @classmethod
    def geometric(cls, c: int, r: int) -> "KSequence":
        return cls("geometric", c=int(c), r=int(r))

    @classmethod
    def doubling(cls, k0: int) -> "KSequence":
        return cls("doubling", c=int(k0), r=2)

    @classmethod
    def from_json(cls, doc) -> "KSequence":
        if isinstance(doc, str):
            doc = json.loads(doc)
        if isinstance(doc, dict) and "constant" in doc and set(doc) <= {"constant", "n"}:
            key, val = "constant", doc["constant"]
        elif isinstance(doc, dict) and len(doc) == 1:
            ((key, val),) = doc.items()
        else:
            raise ConfigurationError(f"bad k-sequence document {doc!r}")
        try:
            if key == "list":
                return cls.from_list(val)
            if key == "constant":
                if isinstance(val, dict):
                    return cls.constant(val["c"], val.get("n"))
                return cls.constant(val, doc.get("n"))
            if key == "geometric":
                return cls.geometric(val["c"], val["r"])
            if key == "doubling":
                return cls.doubling(val["k0"])
        except (KeyError, TypeError) as exc:
            raise ConfigurationError(f"bad k-sequence document {doc!r}") from exc
        raise ConfigurationError(f"unknown k-sequence kind {key!r}")

    def to_json(self) -> dict:
        if self.kind == "list":
            return {"list": list(self.values)}
        if self.kind == "constant":
            d = {"constant": self.c}
            if self.length is not None:
                d["n"] = self.length
            return d
        if self.kind == "geometric":
            return {"geometric": {"c": self.c, "r": self.r}}
        return {"doubling": {"k0": self.c}}

    def __getitem__(self, i: int) -> int:
        if i < 0:
            raise IndexError(i)
        if self.length is not None and i >= self.length:
            raise IndexError(f"k-sequence has only {self.length} terms")
        if self.kind == "list":
            return self.values[i]
        if self.kind == "constant":
            return self.c
        return self.c * self.r ** i

    def terms(self, n: int) -> List[int]:
        return [self[i] for i in range(n)]

    @property
    def summable(self) -> bool:
        """True when the sum of ``1/k_i`` provably converges."""
        return self.kind in ("geometric", "doubling")

    def satisfies_doubling(self, n: int) -> bool:
        """Check ``k_{i+1} >= 2 k_i`` for the first ``n`` terms."""
        ks = self.terms(n)
        return all(b >= 2 * a for a, b in zip(ks, ks[1:]))


# -- cones --------------------------------------------------------------

def cone_diameter(columns: Sequence[Sequence[int]], prec: int = DEFAULT_PREC) -> Scalar:
    """Hilbert diameter of the cone spanned by positive integer vectors."""
    cols = [list(c) for c in columns]
    if any(x <= 0 for c in cols for x in c):
        return Scalar.infinity(prec)
    best = Scalar(0, 0, prec)
    for i in range(len(cols)):
        for j in range(i + 1, len(cols)):
            d = hilbert_distance(cols[i], cols[j], prec)
            if d.hi > best.hi:
                best = d
    return best


def _columns(P: np.ndarray) -> List[List[int]]:
    return [list(P[:, j]) for j in range(P.shape[1])]


def _projective_box(cols: List[List[int]], prec: int) -> List[Scalar]:
    """Coordinatewise enclosure of the cone normalised to third coordinate 1."""
    if any(c[2] <= 0 for c in cols):
        return [Scalar.unbounded(prec)] * 3
    ratios = [[Fraction(int(c[j]), int(c[2])) for c in cols] for j in range(3)]
    return [Scalar(min(r), max(r), prec) for r in ratios]


@dataclass(frozen=True)
class WidthSolution:
    """Width vectors ``w_0..w_depth`` of a k-sequence.

    ``exact`` holds rational representatives satisfying
    ``w_i = B(k_i) w_{i+1}`` exactly with ``w_0[2] == 1``.  ``enclosures``
    holds, per stage, coordinatewise boxes around the cone containing the
    true projective class (normalised to third coordinate 1).  ``diameters``
    are Hilbert diameters of those cones; ``contraction`` lists the diameter
    at stage 0 after ``n`` matrices, for ``n = 0 .. depth + 2``.
    """

    ks: Tuple[int, ...]
    exact: Tuple[Tuple[Fraction, Fraction, Fraction], ...]
    enclosures: Tuple[Tuple[Scalar, Scalar, Scalar], ...]
    diameters: Tuple[Scalar, ...]
    contraction: Tuple[Scalar, ...]
    normalization: str = "w3_0 = 1"
    prec: int = DEFAULT_PREC

    @property
    def depth(self) -> int:
        return len(self.exact) - 1

    @property
    def w0(self) -> Tuple[Scalar, Scalar, Scalar]:
        return self.enclosures[0]

    def stage(self, i: int) -> Tuple[Scalar, Scalar, Scalar]:
        """Exact stage vector as Scalars."""
        return tuple(as_scalar(x, self.prec) for x in self.exact[i])

    def stage_inequalities(self, i: int) -> bool:
        w1, w2, w3 = self.exact[i]
        return w1 > w2 + w3 and w2 > w3 and w3 > 0

    def recursion_holds(self, i: int) -> bool:
        lhs = mat_B(self.ks[i]).dot(np.array(self.exact[i + 1], dtype=object))
        return tuple(lhs) == tuple(self.exact[i])


def solve_widths(ks: KSequence, depth: int, tol, prec: int = DEFAULT_PREC) -> WidthSolution:
    """Nested-cone solution of ``w_i = B(k_i) w_{i+1}``.

    The cones ``B(k_i)...B(k_{depth+1})(K)`` are computed with exact integer
    products.  The representative is the image of the barycentre ray
    ``(1,1,1)`` seeded two levels below ``depth`` so that every reported
    stage satisfies the strict stage inequalities.
    """
    if depth < 6:
        raise DomainError("depth must be at least 6")
    tol = as_scalar(tol, prec)
    if not tol.certainly_positive():
        raise DomainError("tol must be positive")
    horizon = depth + 2
    try:
        kk = ks.terms(horizon)
    except IndexError as exc:
        raise ConfigurationError(f"k-sequence too short for depth {depth}") from exc

    # suffix products P_i = B(k_i) ... B(k_{horizon-1})
    suffix = [None] * (horizon + 1)
    suffix[horizon] = _int_matrix(np.eye(3, dtype=int))
    for i in range(horizon - 1, -1, -1):
        suffix[i] = mat_B(kk[i]).dot(suffix[i + 1])

    seed = np.array([1, 1, 1], dtype=object)
    raw = [suffix[i].dot(seed) for i in range(depth + 1)]
    scale = Fraction(1, int(raw[0][2]))
    exact = tuple(tuple(Fraction(int(x)) * scale for x in v) for v in raw)

    enclosures, diameters = [], []
    for i in range(depth + 1):
        cols = _columns(suffix[i])
        enclosures.append(tuple(_projective_box(cols, prec)))
        diameters.append(cone_diameter(cols, prec))

    contraction = [Scalar.infinity(prec)]
    P = _int_matrix(np.eye(3, dtype=int))
    for n in range(horizon):
        P = P.dot(mat_B(kk[n]))
        contraction.append(cone_diameter(_columns(P), prec))

    sol = WidthSolution(
        ks=tuple(kk),
        exact=exact,
        enclosures=tuple(enclosures),
        diameters=tuple(diameters),
        contraction=tuple(contraction),
        prec=prec,
    )
    if not diameters[0].certainly_lt(tol):
        raise AccuracyError(
            f"Hilbert diameter {float(diameters[0].hi):.3g} at depth {depth} exceeds tolerance",
            diameters[0],
        )
    return sol


# -- lengths and areas --------------------------------------------------

def _exact(x):
    if isinstance(x, Scalar):
        if not x.is_exact:
            return x
        return Fraction(*map(int, x.lo.as_integer_ratio()))
    if isinstance(x, float):
        return Fraction(x)
    return x


def lengths_recursion(l0: Sequence, ks: KSequence, n: int) -> Tuple:
    """Row vector ``l_0 A(k_0) ... A(k_{n-1})``."""
    l = np.array([_exact(x) for x in l0], dtype=object)
    if len(l) != 4:
        raise DomainError("length vector must have 4 entries")
    for i in range(n):
        l = l.dot(mat_A(ks[i]))
    return tuple(l)


@dataclass(frozen=True)
class AreaReport:
    """Areas ``S_i = l_i C w_i`` and the per-step decay certificates."""

    ks: Tuple[int, ...]
    areas: Tuple[Fraction, ...]
    certificates: Tuple[bool, ...]
    matrix_certificates: Tuple[bool, ...]
    lower_bound: Fraction

    @property
    def all_certified(self) -> bool:
        return all(self.certificates) and all(self.matrix_certificates)

    def area_scalars(self, prec: int = DEFAULT_PREC) -> List[Scalar]:
        return [as_scalar(s, prec) for s in self.areas]


def area_sequence(ks: KSequence, depth: int, l0: Sequence = (1, 1, 1, 1),
                  widths: Optional[WidthSolution] = None,
                  certify: bool = True) -> AreaReport:
    """Areas of ``Z(w_i, l_i)`` for ``i = 0 .. depth``.

    Each certificate checks ``S_{i+1} > (1 - 2/k_i) S_i`` on the exact
    representatives and, independently of the particular widths, that
    ``A(k_i) C B(k_{i+1}) - (1 - 2/k_i) C B(k_i) B(k_{i+1})`` is a nonzero
    nonnegative matrix, which forces the inequality on the whole cone.
    ``lower_bound`` is ``S_1 * prod_{1 <= i < depth} (1 - 2/k_i)``, a
    positive floor for ``S_depth`` when every ``k_i > 2`` for ``i >= 1``.
    """
    if certify and not ks.satisfies_doubling(depth + 1):
        raise ConfigurationError("certificate needs k_{i+1} >= 2 k_i")
    if widths is None:
        widths = solve_widths(ks, max(depth, 6), tol=1e300)
    if widths.depth < depth:
        raise DomainError("width solution shallower than requested depth")
    C = mat_C()
    l = np.array([_exact(x) for x in l0], dtype=object)
    areas = []
    for i in range(depth + 1):
        w = np.array(widths.exact[i], dtype=object)
        areas.append(Fraction(l.dot(C).dot(w)))
        l = l.dot(mat_A(ks[i]))
    certs, mcerts = [], []
    for i in range(depth):
        c = 1 - Fraction(2, ks[i])
        certs.append(areas[i + 1] > c * areas[i])
        M = (mat_A(ks[i]).dot(C) - c * C.dot(mat_B(ks[i]))).dot(mat_B(ks[i + 1]))
        mcerts.append(bool((M >= 0).all() and (M > 0).any()))
    bound = areas[1] if depth >= 1 else areas[0]
    for i in range(1, depth):
        bound *= max(Fraction(0), 1 - Fraction(2, ks[i]))
    return AreaReport(
        ks=tuple(ks.terms(depth + 1)),
        areas=tuple(areas),
        certificates=tuple(certs),
        matrix_certificates=tuple(mcerts),
        lower_bound=bound,
    )


def H_from_w(w: Sequence) -> Tuple:
    """Field direction ``H`` with ``2H = (w2+w3, w1+w3, w1+w2)``."""
    if len(w) != 3:
        raise DomainError("w must have 3 entries")
    w1, w2, w3 = (_exact(x) for x in w)
    half = Fraction(1, 2)
    if all(isinstance(x, numbers.Rational) for x in (w1, w2, w3)):
        return ((w2 + w3) * half, (w1 + w3) * half, (w1 + w2) * half)
    w1, w2, w3 = (as_scalar(x) for x in (w1, w2, w3))
    return ((w2 + w3) * half, (w1 + w3) * half, (w1 + w2) * half)
