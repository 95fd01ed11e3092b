"""Certified scalars, Hilbert projective distance and bounded integer relations.

A :class:`Scalar` is a closed interval ``[lo, hi]`` whose endpoints are
binary floating point numbers (dyadic rationals) at a working precision.
Every arithmetic operation rounds its lower endpoint down and its upper
endpoint up, so the exact real result is always enclosed.  Endpoints are
``gmpy2.mpfr`` values; directed rounding comes from MPFR.
"""

from __future__ import annotations

import math
from fractions import Fraction
from typing import Callable, Iterable, Optional, Sequence

import gmpy2
import numpy as np
from gmpy2 import mpfr, mpq

from .errors import AccuracyError, DomainError

DEFAULT_PREC = 128
MAX_PREC = 1 << 14

__all__ = [
    "DEFAULT_PREC",
    "AccuracyError",
    "DomainError",
    "Scalar",
    "as_scalar",
    "hilbert_distance",
    "integer_relation",
    "refine",
    "tribonacci_constant",
]


_CTX_CACHE: dict = {}


def _ctx(prec: int, down: bool):
    key = (prec, down)
    ctx = _CTX_CACHE.get(key)
    if ctx is None:
        ctx = gmpy2.context(
            precision=prec, round=gmpy2.RoundDown if down else gmpy2.RoundUp
        )
        _CTX_CACHE[key] = ctx
    return ctx


def _to_mpq(x) -> Optional[mpq]:
    """Exact rational value of ``x`` or None when ``x`` is not exact."""
    if isinstance(x, bool):
        x = int(x)
    if isinstance(x, (int, type(gmpy2.mpz(0)))):
        return mpq(x)
    if isinstance(x, Fraction):
        return mpq(x.numerator, x.denominator)
    if isinstance(x, type(mpq(0))):
        return x
    if isinstance(x, float):
        if not math.isfinite(x):
            return None
        return mpq(*x.as_integer_ratio())
    return None


def _endpoint(x, prec: int, down: bool) -> mpfr:
    if isinstance(x, type(mpfr(0))):
        return mpfr(x, prec, _ctx(prec, down))
    if isinstance(x, str):
        try:
            x = Fraction(x)
        except ValueError as exc:
            raise DomainError(f"cannot parse {x!r}") from exc
    q = _to_mpq(x)
    if q is None:
        raise TypeError(f"cannot convert {x!r} to an interval endpoint")
    return mpfr(q, prec, _ctx(prec, down))


class Scalar:
    """Closed interval with dyadic endpoints enclosing a real number.

    Instances are immutable.  ``source``, when present, recomputes the same
    quantity at a requested precision and is what :func:`refine` uses.
    """

    __slots__ = ("lo", "hi", "prec", "source")

    def __init__(self, lo, hi=None, prec: int = DEFAULT_PREC,
                 source: Optional[Callable[[int], "Scalar"]] = None):
        if hi is None:
            hi = lo
        lo = _endpoint(lo, prec, True)
        hi = _endpoint(hi, prec, False)
        if gmpy2.is_nan(lo) or gmpy2.is_nan(hi):
            raise DomainError("NaN endpoint")
        if lo > hi:
            raise DomainError(f"empty interval [{lo}, {hi}]")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)
        object.__setattr__(self, "prec", prec)
        object.__setattr__(self, "source", source)

    def __setattr__(self, name, value):
        raise AttributeError("Scalar is immutable")

    @classmethod
    def _raw(cls, lo, hi, prec, source=None) -> "Scalar":
        s = object.__new__(cls)
        object.__setattr__(s, "lo", lo)
        object.__setattr__(s, "hi", hi)
        object.__setattr__(s, "prec", prec)
        object.__setattr__(s, "source", source)
        return s

    @classmethod
    def from_decimal(cls, text: str, prec: int = DEFAULT_PREC) -> "Scalar":
        """Parse a decimal string, rounding outward."""
        q = Fraction(text)
        return cls(q, q, prec)

    @classmethod
    def unbounded(cls, prec: int = DEFAULT_PREC) -> "Scalar":
        """The enclosure ``[0, +inf]`` of an unknown non-negative number."""
        return cls._raw(mpfr(0), mpfr("inf"), prec)

    @classmethod
    def infinity(cls, prec: int = DEFAULT_PREC) -> "Scalar":
        inf = mpfr("inf")
        return cls._raw(inf, inf, prec)

    # -- inspection -----------------------------------------------------
    @property
    def width(self) -> mpfr:
        return _ctx(self.prec, False).sub(self.hi, self.lo)

    @property
    def is_exact(self) -> bool:
        return self.lo == self.hi

    @property
    def mid(self) -> Fraction:
        """Midpoint as an exact Fraction."""
        if gmpy2.is_infinite(self.lo) or gmpy2.is_infinite(self.hi):
            raise DomainError("unbounded interval has no midpoint")
        a = Fraction(*map(int, self.lo.as_integer_ratio()))
        b = Fraction(*map(int, self.hi.as_integer_ratio()))
        return (a + b) / 2

    def contains(self, x) -> bool:
        q = _to_mpq(x)
        if isinstance(x, Scalar):
            return self.lo <= x.lo and x.hi <= self.hi
        if q is None:
            raise TypeError(f"cannot test membership of {x!r}")
        return self.lo <= q <= self.hi

    def straddles(self, x) -> bool:
        """True when ``x`` lies in the closed enclosure (sign of ``self - x`` unknown)."""
        other = as_scalar(x, self.prec)
        return not (self.hi < other.lo or other.hi < self.lo)

    def certainly_lt(self, other) -> bool:
        other = as_scalar(other, self.prec)
        return self.hi < other.lo

    def certainly_gt(self, other) -> bool:
        other = as_scalar(other, self.prec)
        return self.lo > other.hi

    def certainly_positive(self) -> bool:
        return self.lo > 0

    def __float__(self) -> float:
        return float(self.mid)

    def __repr__(self) -> str:
        if self.is_exact:
            return f"Scalar({float(self.lo)!r})"
        return f"Scalar([{float(self.lo)!r}, {float(self.hi)!r}], prec={self.prec})"

    def __eq__(self, other) -> bool:
        if not isinstance(other, Scalar):
            return NotImplemented
        return self.lo == other.lo and self.hi == other.hi

    def __hash__(self):
        return hash((self.lo, self.hi))

    # -- arithmetic -----------------------------------------------------
    def _coerce(self, other) -> "Scalar":
        return as_scalar(other, self.prec)

    def __neg__(self) -> "Scalar":
        # bare unary minus would round to the global 53-bit context
        c = _ctx(self.prec, True)
        return Scalar._raw(c.minus(self.hi), c.minus(self.lo), self.prec)

    def __add__(self, other) -> "Scalar":
        o = self._coerce(other)
        p = max(self.prec, o.prec)
        return Scalar._raw(_ctx(p, True).add(self.lo, o.lo), _ctx(p, False).add(self.hi, o.hi), p)

    __radd__ = __add__

    def __sub__(self, other) -> "Scalar":
        o = self._coerce(other)
        p = max(self.prec, o.prec)
        return Scalar._raw(_ctx(p, True).sub(self.lo, o.hi), _ctx(p, False).sub(self.hi, o.lo), p)

    def __rsub__(self, other) -> "Scalar":
        return self._coerce(other) - self

    def __mul__(self, other) -> "Scalar":
        o = self._coerce(other)
        p = max(self.prec, o.prec)
        d, u = _ctx(p, True), _ctx(p, False)
        pairs = ((self.lo, o.lo), (self.lo, o.hi), (self.hi, o.lo), (self.hi, o.hi))
        lo = min(d.mul(a, b) for a, b in pairs)
        hi = max(u.mul(a, b) for a, b in pairs)
        return Scalar._raw(lo, hi, p)

    __rmul__ = __mul__

    def __truediv__(self, other) -> "Scalar":
        o = self._coerce(other)
        if o.lo <= 0 <= o.hi:
            raise ZeroDivisionError("divisor enclosure contains zero")
        p = max(self.prec, o.prec)
        d, u = _ctx(p, True), _ctx(p, False)
        pairs = ((self.lo, o.lo), (self.lo, o.hi), (self.hi, o.lo), (self.hi, o.hi))
        lo = min(d.div(a, b) for a, b in pairs)
        hi = max(u.div(a, b) for a, b in pairs)
        return Scalar._raw(lo, hi, p)

    def __rtruediv__(self, other) -> "Scalar":
        return self._coerce(other) / self

    def __abs__(self) -> "Scalar":
        if self.lo >= 0:
            return self
        if self.hi <= 0:
            return -self
        return Scalar._raw(mpfr(0), max(_ctx(self.prec, True).minus(self.lo), self.hi), self.prec)

    def log(self) -> "Scalar":
        if self.lo <= 0:
            raise DomainError("log of non-positive enclosure")
        return Scalar._raw(_ctx(self.prec, True).log(self.lo), _ctx(self.prec, False).log(self.hi), self.prec)

    def sqrt(self) -> "Scalar":
        if self.lo < 0:
            raise DomainError("sqrt of negative enclosure")
        return Scalar._raw(_ctx(self.prec, True).sqrt(self.lo), _ctx(self.prec, False).sqrt(self.hi), self.prec)

    def with_source(self, source: Callable[[int], "Scalar"]) -> "Scalar":
        return Scalar._raw(self.lo, self.hi, self.prec, source)


def as_scalar(x, prec: int = DEFAULT_PREC) -> Scalar:
    if isinstance(x, Scalar):
        return x
    return Scalar(x, x, prec)


def imax(values: Iterable[Scalar]) -> Scalar:
    vs = list(values)
    return Scalar._raw(max(v.lo for v in vs), max(v.hi for v in vs), max(v.prec for v in vs))


def imin(values: Iterable[Scalar]) -> Scalar:
    vs = list(values)
    return Scalar._raw(min(v.lo for v in vs), min(v.hi for v in vs), max(v.prec for v in vs))


def refine(x: Scalar, target_width, max_prec: int = MAX_PREC) -> Scalar:
    """Recompute ``x`` at doubling precision until its width drops below ``target_width``."""
    target = as_scalar(target_width)
    if not target.certainly_positive():
        raise DomainError("target width must be positive")
    if x.width < target.lo:
        return x
    if x.source is None:
        raise AccuracyError(f"no way to refine an enclosure of width {float(x.width):.3g}", x.width)
    prec = x.prec
    best = x
    while prec < max_prec:
        prec *= 2
        best = x.source(prec)
        if best.width < target.lo:
            return best
    raise AccuracyError(
        f"precision cap {max_prec} reached with width {float(best.width):.3g}", best.width
    )


def _tribonacci(prec: int) -> Scalar:
    # root of t^3 - t^2 - t - 1 in (1.8, 1.9), certified by exact sign checks
    work = prec + 32
    ctx = gmpy2.context(precision=work)
    r = mpfr("1.8392867552141611", work)
    for _ in range(work.bit_length() + 4):
        f = ctx.sub(ctx.sub(ctx.sub(ctx.mul(ctx.mul(r, r), r), ctx.mul(r, r)), r), 1)
        df = ctx.sub(ctx.sub(ctx.mul(3, ctx.mul(r, r)), ctx.mul(2, r)), 1)
        r = ctx.sub(r, ctx.div(f, df))

    def p(t: mpq) -> mpq:
        return t * t * t - t * t - t - 1

    ulp = mpq(1, 1 << (prec - 2))
    lo = mpfr(mpq(r) - ulp, prec, _ctx(prec, True))
    hi = mpfr(mpq(r) + ulp, prec, _ctx(prec, False))
    while not (p(mpq(lo)) < 0 < p(mpq(hi))):
        ulp *= 2
        lo = mpfr(mpq(r) - ulp, prec, _ctx(prec, True))
        hi = mpfr(mpq(r) + ulp, prec, _ctx(prec, False))
    return Scalar._raw(lo, hi, prec, _tribonacci)


def tribonacci_constant(prec: int = DEFAULT_PREC) -> Scalar:
    """Enclosure of the real root of t^3 = t^2 + t + 1 (about 1.8392867552)."""
    return _tribonacci(prec)


def _exact_vector(v: Sequence) -> Optional[list]:
    out = []
    for x in v:
        q = _to_mpq(x)
        if q is None:
            return None
        out.append(q)
    return out


def hilbert_distance(u: Sequence, v: Sequence, prec: int = DEFAULT_PREC) -> Scalar:
    """Hilbert projective distance ``log(max(u/v) / min(u/v))`` between positive vectors."""
    if len(u) != len(v) or len(u) == 0:
        raise DomainError("vectors must be non-empty and of equal length")
    eu, ev = _exact_vector(u), _exact_vector(v)
    if eu is not None and ev is not None:
        if any(x <= 0 for x in eu) or any(x <= 0 for x in ev):
            raise DomainError("hilbert_distance needs strictly positive coordinates")
        ratios = [a / b for a, b in zip(eu, ev)]
        q = max(ratios) / min(ratios)
        if q == 1:
            return Scalar(0, 0, prec)
        qs = Scalar(q, q, prec)
    else:
        us = [as_scalar(x, prec) for x in u]
        vs = [as_scalar(x, prec) for x in v]
        if not all(x.certainly_positive() for x in us + vs):
            raise DomainError("hilbert_distance needs strictly positive coordinates")
        ratios = [a / b for a, b in zip(us, vs)]
        qs = imax(ratios) / imin(ratios)
        if qs.lo < 1:
            qs = Scalar._raw(mpfr(1), max(qs.hi, mpfr(1)), qs.prec)
    return qs.log()


def integer_relation(values: Sequence, max_coeff: int, tol) -> Optional[tuple]:
    """Smallest integer vector ``c`` with ``|sum c_i v_i| < tol``.

    Coefficients range over ``[-max_coeff, max_coeff]`` and are not all zero.
    Candidates are ordered by height ``max |c_i|`` and then lexicographically,
    so the result is primitive and deterministic.  A candidate is accepted
    only when the interval enclosure of the sum lies strictly inside
    ``(-tol, tol)``.  The search is exhaustive, so ``None`` means no relation
    exists within the bounds.
    """
    if len(values) == 0:
        raise DomainError("values must be non-empty")
    if max_coeff < 1:
        raise DomainError("max_coeff must be >= 1")
    n = len(values)
    vals = [as_scalar(x) for x in values]
    tol_s = as_scalar(tol)
    mids = np.array([float(x.mid) for x in vals])
    span = np.arange(-max_coeff, max_coeff + 1, dtype=np.int64)
    # float prefilter; generous so that certification decides
    slack = float(tol_s.hi) + max_coeff * sum(float(x.width) for x in vals)
    slack += 8 * n * max_coeff * max(float(np.abs(mids).max()), 1.0) * np.finfo(float).eps
    grid = np.stack(np.meshgrid(*([span] * n), indexing="ij"), axis=-1).reshape(-1, n)
    sums = grid.astype(float) @ mids
    height = np.abs(grid).max(axis=1)
    cand = np.nonzero((np.abs(sums) <= slack) & (height > 0))[0]
    cand = cand[np.argsort(height[cand], kind="stable")]
    for idx in cand:
        c = tuple(int(x) for x in grid[idx])
        total = Scalar(0)
        for ci, vi in zip(c, vals):
            if ci:
                total = total + vi * ci
        if (-tol_s).certainly_lt(total) and total.certainly_lt(tol_s):
            return c
    return None
