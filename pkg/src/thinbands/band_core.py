"""Band complexes on the real line and the moves of the Rips machine.

A complex is a support made of disjoint closed intervals together with
bands ``[0, width] x [0, length]`` whose two horizontal sides (bases) are
glued by translations onto subintervals ``[p, p + width]`` of the support.
All coordinates are exact rationals (``gmpy2.mpq``, which compares and
hashes equal to the matching :class:`fractions.mpq`), so every
combinatorial decision is exact.  Non-exact :class:`~thinbands.numerics.Scalar` inputs are replaced by
their rational midpoints.
"""

from __future__ import annotations

import decimal
import json
from dataclasses import dataclass, replace
from itertools import permutations
from typing import Dict, List, NamedTuple, Optional, Sequence, Tuple

from gmpy2 import mpq

from .cone_solver import mat_A, mat_B
from .errors import DomainError, StructuralError
from .numerics import Scalar, integer_relation

__all__ = [
    "Band",
    "BandComplex",
    "FreeArc",
    "RankEstimate",
    "to_rational",
    "free_arcs",
    "collapse",
    "collapse_band",
    "normalize",
    "make_Z3",
    "make_Z4",
    "rips_step",
    "predicted_rips_output",
    "image_widths",
    "z4_parameters",
    "is_isomorphic",
    "find_isomorphism",
    "is_symmetric",
    "complex_area",
    "rank_estimate",
    "to_json",
    "from_json",
]


def to_rational(x) -> mpq:
    if isinstance(x, mpq):
        return x
    if isinstance(x, Scalar):
        return mpq(x.mid)
    if isinstance(x, bool):
        raise DomainError("booleans are not coordinates")
    try:
        return mpq(x)
    except (TypeError, ValueError) as exc:
        raise DomainError(f"cannot use {x!r} as a coordinate") from exc


@dataclass(frozen=True)
class Band:
    """A band of ``width`` glued to ``[base0, base0+width]`` and ``[base1, base1+width]``."""

    width: mpq
    base0: mpq
    base1: mpq
    length: Optional[mpq] = None
    label: str = ""

    def __post_init__(self):
        for name in ("width", "base0", "base1"):
            object.__setattr__(self, name, to_rational(getattr(self, name)))
        if self.length is not None:
            object.__setattr__(self, "length", to_rational(self.length))

    def base(self, side: int) -> mpq:
        return self.base1 if side else self.base0

    @property
    def area(self) -> mpq:
        if self.length is None:
            raise DomainError(f"band {self.label!r} has no length")
        return self.width * self.length


@dataclass(frozen=True)
class BandComplex:
    """Support intervals (sorted, disjoint) and bands.  Enhanced when every band has a length."""

    support: Tuple[Tuple[mpq, mpq], ...]
    bands: Tuple[Band, ...]

    def __post_init__(self):
        sup = tuple((to_rational(a), to_rational(b)) for a, b in self.support)
        object.__setattr__(self, "support", sup)
        for a, b in sup:
            if a > b:
                raise DomainError(f"support interval [{a}, {b}] is empty")
        for (a, b), (c, d) in zip(sup, sup[1:]):
            if not b < c:
                raise DomainError("support intervals must be sorted and disjoint")
        for band in self.bands:
            if band.width < 0:
                raise DomainError("negative band width")
            for side in (0, 1):
                self.locate(band.base(side), band.width)

    @property
    def enhanced(self) -> bool:
        return all(b.length is not None for b in self.bands)

    @property
    def sigma(self) -> mpq:
        return sum((b - a for a, b in self.support), mpq(0))

    def locate(self, p: mpq, w: mpq) -> Tuple[int, mpq]:
        """Component index and offset of the interval ``[p, p+w]``."""
        for i, (a, b) in enumerate(self.support):
            if a <= p and p + w <= b:
                return i, p - a
        raise DomainError(f"base [{p}, {p + w}] is not inside the support")

    def translated(self, t) -> "BandComplex":
        t = to_rational(t)
        return BandComplex(
            tuple((a + t, b + t) for a, b in self.support),
            tuple(replace(b, base0=b.base0 + t, base1=b.base1 + t) for b in self.bands),
        )

    def band(self, label: str) -> Band:
        for b in self.bands:
            if b.label == label:
                return b
        raise KeyError(label)


@dataclass(frozen=True)
class FreeArc:
    """Open interval ``(start, end)`` covered only by base ``side`` of band ``band``."""

    start: mpq
    end: mpq
    band: int
    side: int


# -- free arcs and collapses --------------------------------------------

def _bases(X: BandComplex) -> List[Tuple[mpq, mpq, int, int]]:
    out = []
    for j, b in enumerate(X.bands):
        for side in (0, 1):
            p = b.base(side)
            out.append((p, p + b.width, j, side))
    return out


def free_arcs(X: BandComplex) -> List[FreeArc]:
    """All maximal free arcs, sorted by left endpoint.

    Coverage is counted on open elementary intervals between base
    endpoints.  Two neighbouring pieces merge only when the shared point is
    interior to the same base and touches no other base.
    """
    bases = [x for x in _bases(X) if x[1] > x[0]]
    arcs: List[FreeArc] = []
    for a, e in X.support:
        pts = {a, e}
        for lo, hi, _, _ in bases:
            if a <= lo <= e:
                pts.add(lo)
            if a <= hi <= e:
                pts.add(hi)
        pts = sorted(pts)
        cur = None
        for u, v in zip(pts, pts[1:]):
            cov = [x for x in bases if x[0] <= u and v <= x[1]]
            ok = len(cov) == 1
            if ok and cur is not None and cur[2] == cov[0] and not any(
                x[0] <= u <= x[1] and x is not cov[0] for x in bases
            ):
                cur = (cur[0], v, cur[2])
            else:
                if cur is not None:
                    arcs.append(FreeArc(cur[0], cur[1], cur[2][2], cur[2][3]))
                cur = (u, v, cov[0]) if ok else None
        if cur is not None:
            arcs.append(FreeArc(cur[0], cur[1], cur[2][2], cur[2][3]))
    arcs.sort(key=lambda f: (f.start, f.end))
    return arcs


def collapse(X: BandComplex, arc: FreeArc) -> BandComplex:
    """Collapse from a free arc.

    The arc is removed from the support and its band splits into two
    offspring (possibly of width zero) that inherit the parent's length.
    A degenerate component left holding only a single endpoint of a
    zero-width band is removed together with that band.
    """
    if arc not in free_arcs(X):
        raise DomainError("arc is not a free arc of the complex")
    return _collapse(X, arc)


def _collapse(X: BandComplex, arc: FreeArc) -> BandComplex:
    u, v = arc.start, arc.end
    band = X.bands[arc.band]
    pos = band.base(arc.side)
    c, d = u - pos, v - pos
    first = replace(band, width=c)
    second = replace(band, width=band.width - d, base0=band.base0 + d, base1=band.base1 + d)
    bands = [b for i, b in enumerate(X.bands) if i != arc.band] + [first, second]
    support = []
    for a, e in X.support:
        if a <= u and v <= e:
            support += [(a, u), (v, e)]
        else:
            support.append((a, e))
    support, bands = _remove_isolated(support, bands)
    return BandComplex(tuple(support), tuple(bands))


def _remove_isolated(support, bands):
    changed = True
    while changed:
        changed = False
        for a, e in support:
            if a != e:
                continue
            att = [
                x for x in bands
                if x.base0 <= a <= x.base0 + x.width or x.base1 <= a <= x.base1 + x.width
            ]
            if len(att) <= 1 and all(x.width == 0 for x in att):
                inc = sum((x.base0 == a) + (x.base1 == a) for x in att)
                if not att or inc == 1:
                    support.remove((a, e))
                    for x in att:
                        bands.remove(x)
                    changed = True
                    break
    return support, bands


def _merged_label(a: str, b: str, limit: int = 48) -> str:
    # long Rips runs merge thousands of times; keep labels bounded
    label = f"{a}+{b}"
    if len(label) <= limit:
        return label
    return f"{a.split('+')[0]}+...+{b.split('+')[-1]}"


def normalize(X: BandComplex) -> BandComplex:
    """Merge bands in series.

    A component that is exactly covered by one base of each of two
    different bands, and by nothing else, is removed and the two bands are
    joined into one whose length is the sum of their lengths.
    """
    support = list(X.support)
    bands = list(X.bands)
    changed = True
    while changed:
        changed = False
        for a, e in support:
            inc = []
            for j, b in enumerate(bands):
                for side in (0, 1):
                    p = b.base(side)
                    if a <= p and p + b.width <= e:
                        inc.append((j, side, p))
            if (
                len(inc) == 2
                and inc[0][0] != inc[1][0]
                and all(p == a and bands[j].width == e - a for j, _, p in inc)
            ):
                (j1, s1, _), (j2, s2, _) = inc
                x, y = bands[j1], bands[j2]
                length = None
                if x.length is not None and y.length is not None:
                    length = x.length + y.length
                merged = Band(
                    width=x.width,
                    base0=x.base(1 - s1),
                    base1=y.base(1 - s2),
                    length=length,
                    label=_merged_label(x.label, y.label),
                )
                bands = [b for k, b in enumerate(bands) if k not in (j1, j2)] + [merged]
                support.remove((a, e))
                changed = True
                break
    return BandComplex(tuple(support), tuple(bands))


def collapse_band(X: BandComplex, label: str) -> BandComplex:
    """Contract a band one of whose bases is a whole support component.

    The component is identified with the band's other base: every base
    lying on it is translated accordingly, then the band and the
    component are dropped.  Lengths are kept on the remaining bands.
    """
    idx = next((i for i, b in enumerate(X.bands) if b.label == label), None)
    if idx is None:
        raise KeyError(label)
    band = X.bands[idx]
    for side in (0, 1):
        comp, off = X.locate(band.base(side), band.width)
        a, e = X.support[comp]
        if off == 0 and e - a == band.width:
            shift = band.base(1 - side) - a
            break
    else:
        raise StructuralError(f"band {label!r} does not span a whole component")
    if X.locate(band.base(1 - side), band.width)[0] == comp:
        raise StructuralError(f"band {label!r} is glued to a single component")

    def move(p):
        return p + shift if a <= p <= e else p

    bands = tuple(
        replace(b, base0=move(b.base0), base1=move(b.base1))
        for i, b in enumerate(X.bands) if i != idx
    )
    support = tuple(s for i, s in enumerate(X.support) if i != comp)
    return BandComplex(support, bands)


# -- the families Z(w) and Z(w, l) --------------------------------------

def _positive(vec, n, name):
    if len(vec) != n:
        raise DomainError(f"{name} must have {n} entries")
    out = tuple(to_rational(x) for x in vec)
    if any(x <= 0 for x in out):
        raise DomainError(f"{name} must be positive")
    return out


def make_Z3(w: Sequence) -> BandComplex:
    """Three bands on ``[0, sigma]``; band ``i`` joins ``[0, w_i]`` to ``[sigma - w_i, sigma]``."""
    w = _positive(w, 3, "w")
    s = sum(w)
    bands = tuple(
        Band(width=wi, base0=mpq(0), base1=s - wi, label=f"B{i + 1}")
        for i, wi in enumerate(w)
    )
    return BandComplex(((mpq(0), s),), bands)


def make_Z4(w: Sequence, l: Sequence) -> BandComplex:
    """The enhanced complex ``Z(w, l)``.

    The support is ``[0, sigma]`` plus a copy ``J`` of ``[0, w1]`` placed at
    ``[-2 w1, -w1]``.  Band ``B4`` (width ``w1``, length ``l4``) joins
    ``[0, w1]`` to ``J``; bands ``B1`` and ``B2`` run from the left end of
    ``J`` to the right end of ``[0, sigma]``; ``B3`` joins the two ends of
    ``[0, sigma]``.  Contracting ``B4`` gives ``Z(w)``.  ``B2`` sits inside
    ``J``, so the layout needs ``w2 <= w1``; every ``B(k) w'`` satisfies it.
    """
    w = _positive(w, 3, "w")
    l = _positive(l, 4, "l")
    if w[1] > w[0]:
        raise DomainError("Z(w, l) needs w2 <= w1")
    s = sum(w)
    j0 = -2 * w[0]
    zero = mpq(0)
    bands = (
        Band(w[0], zero, j0, l[3], "B4"),
        Band(w[0], j0, s - w[0], l[0], "B1"),
        Band(w[1], j0, s - w[1], l[1], "B2"),
        Band(w[2], zero, s - w[2], l[2], "B3"),
    )
    return BandComplex(((j0, j0 + w[0]), (zero, s)), bands)


def z4_parameters(Z: BandComplex) -> Tuple[Tuple[mpq, ...], Tuple[mpq, ...]]:
    """Recover ``(w, l)`` from the labelled bands of a ``Z(w, l)``."""
    try:
        b = [Z.band(f"B{i}") for i in (1, 2, 3, 4)]
    except KeyError as exc:
        raise StructuralError("complex does not carry the labels B1..B4") from exc
    return (b[0].width, b[1].width, b[2].width), tuple(x.length for x in b)


def rips_step(Z: BandComplex, k: int) -> BandComplex:
    """One step of the Rips machine on ``Z(B(k) w', l)``.

    Performs ``k + 1`` collapses, each from the leftmost free arc followed
    by merging of bands in series.  The result should be isomorphic to
    ``Z(w', l A(k))``.  The move sequence is valid when ``w'_1 >= w'_2``,
    which holds whenever ``w'`` is itself in the image of some ``B(k')``.
    """
    k = int(k)
    if k < 1:
        raise DomainError("k must be >= 1")
    try:
        w, _ = z4_parameters(Z)
    except StructuralError:
        w = None
    if w is not None:
        wp = (w[1], w[2], w[0] - k * (w[1] + w[2]))
        if wp[2] <= 0:
            raise StructuralError(f"widths {w} are not in the image of B({k})")
        if wp[0] < wp[1]:
            raise StructuralError(f"widths {w} give w'_1 < w'_2; no collapse sequence")
    X = Z
    for step in range(k + 1):
        arcs = free_arcs(X)
        if not arcs:
            raise StructuralError(f"no free arc at collapse {step + 1} of {k + 1}")
        X = normalize(_collapse(X, arcs[0]))
    return X


def predicted_rips_output(w_prime: Sequence, l: Sequence, k: int) -> BandComplex:
    """``Z(w', l A(k))``, the target of :func:`rips_step`."""
    lp = tuple(sum(to_rational(l[i]) * mat_A(k)[i, j] for i in range(4)) for j in range(4))
    return make_Z4(w_prime, lp)


def image_widths(k: int, w_prime: Sequence) -> Tuple[mpq, ...]:
    w = [to_rational(x) for x in w_prime]
    return tuple(sum(mat_B(k)[i, j] * w[j] for j in range(3)) for i in range(3))


# -- isomorphism and symmetry -------------------------------------------

def _descriptor(X: BandComplex, with_lengths: bool):
    d = []
    for j, b in enumerate(X.bands):
        d.append((b.width, b.length if with_lengths else None,
                  X.locate(b.base0, b.width), X.locate(b.base1, b.width), j))
    return d


def find_isomorphism(X: BandComplex, Y: BandComplex) -> Optional[Dict[int, int]]:
    """Band correspondence of an isomorphism ``X -> Y`` or None.

    Components may be permuted and translated independently.  Bands are
    matched on width, length (when both complexes are enhanced) and the
    unordered pair of attachment positions.
    """
    if len(X.support) != len(Y.support) or len(X.bands) != len(Y.bands):
        return None
    lx = [b - a for a, b in X.support]
    ly = [b - a for a, b in Y.support]
    if sorted(lx) != sorted(ly):
        return None
    with_len = X.enhanced and Y.enhanced
    dx = _descriptor(X, with_len)
    dy = _descriptor(Y, with_len)

    def key(w, ln, p, q):
        return (w, ln is None, ln or 0, tuple(sorted([p, q])))

    target: Dict[tuple, List[int]] = {}
    for w, ln, p, q, j in dy:
        target.setdefault(key(w, ln, p, q), []).append(j)
    for perm in permutations(range(len(lx))):
        if any(lx[i] != ly[perm[i]] for i in range(len(lx))):
            continue
        pool = {k: list(v) for k, v in target.items()}
        mapping = {}
        for w, ln, p, q, j in dx:
            kk = key(w, ln, (perm[p[0]], p[1]), (perm[q[0]], q[1]))
            if not pool.get(kk):
                break
            mapping[j] = pool[kk].pop()
        else:
            return mapping
    return None


def is_isomorphic(X: BandComplex, Y: BandComplex) -> bool:
    return find_isomorphism(X, Y) is not None


def is_symmetric(X: BandComplex) -> bool:
    """Invariance of the band pattern under the flip ``x -> a + b - x`` of the support ``[a, b]``."""
    if len(X.support) == 0:
        return True
    if len(X.support) != 1:
        raise DomainError("symmetry is defined here for a single support interval")
    a, b = X.support[0]

    def pattern(bands):
        return sorted((x.width, tuple(sorted((x.base0, x.base1)))) for x in bands)

    flipped = [
        Band(x.width, a + b - x.base0 - x.width, a + b - x.base1 - x.width)
        for x in X.bands
    ]
    return pattern(X.bands) == pattern(flipped)


def complex_area(X: BandComplex) -> mpq:
    return sum((b.area for b in X.bands), mpq(0))


# -- rank ---------------------------------------------------------------

class RankEstimate(NamedTuple):
    rank: int
    relations: Tuple[Tuple[int, ...], ...]
    generators: Tuple


def rank_estimate(X: BandComplex, max_coeff: int = 10, tol="1e-9",
                  generators: Optional[Sequence] = None) -> RankEstimate:
    """Estimated dimension of the rational span of the period generators.

    Generators are the nonzero band widths and the gaps between support
    components.  ``generators`` overrides them, which lets callers pass
    certified enclosures instead of rational representatives.  A generator
    joins the basis unless a bounded integer relation ties it to the basis
    found so far.
    """
    if generators is None:
        gens = [b.width for b in X.bands if b.width != 0]
        gens += [c - b for (_, b), (c, _) in zip(X.support, X.support[1:])]
    else:
        gens = list(generators)
    basis: list = []
    relations = []
    tol_s = Scalar(to_rational(tol)) if not isinstance(tol, Scalar) else tol
    for g in gens:
        rel = integer_relation(basis + [g], max_coeff, tol_s) if basis else None
        if rel is not None and rel[-1] != 0:
            relations.append(rel)
        else:
            basis.append(g)
    return RankEstimate(len(basis), tuple(relations), tuple(gens))


# -- serialisation ------------------------------------------------------

FORMAT = "thinbands.band-complex"


def _fmt(x: mpq, digits: Optional[int]) -> str:
    if digits is None:
        return str(x)
    with decimal.localcontext() as ctx:
        ctx.prec = digits
        return str(decimal.Decimal(int(x.numerator)) / decimal.Decimal(int(x.denominator)))


def to_json(X: BandComplex, digits: Optional[int] = None) -> str:
    """Canonical JSON document.

    Values are exact rational strings tagged ``"precision": "exact"``, or
    decimal strings with ``digits`` significant digits.
    """
    doc = {
        "format": FORMAT,
        "precision": "exact" if digits is None else f"{digits} digits",
        "support": [[_fmt(a, digits), _fmt(b, digits)] for a, b in X.support],
        "bands": [
            {
                "label": b.label,
                "width": _fmt(b.width, digits),
                "base0": _fmt(b.base0, digits),
                "base1": _fmt(b.base1, digits),
                "length": None if b.length is None else _fmt(b.length, digits),
            }
            for b in X.bands
        ],
    }
    return json.dumps(doc, indent=2, sort_keys=True)


def from_json(text: str) -> BandComplex:
    doc = json.loads(text)
    if doc.get("format") != FORMAT:
        raise DomainError("not a band complex document")
    support = tuple((mpq(a), mpq(b)) for a, b in doc["support"])
    bands = tuple(
        Band(
            width=mpq(b["width"]),
            base0=mpq(b["base0"]),
            base1=mpq(b["base1"]),
            length=None if b.get("length") is None else mpq(b["length"]),
            label=b.get("label", ""),
        )
        for b in doc["bands"]
    )
    return BandComplex(support, bands)
