"""Exact logarithms of rationals and bit quantities of the form ``k - log2 r``."""

from __future__ import annotations

import math
from fractions import Fraction
from functools import total_ordering

import mpmath

# Working precision for every approximate log evaluation.
PREC_BITS = 192
# Width of the certified dyadic enclosure reported for -log values.
INTERVAL_BITS = 40


def pow2(n: int) -> Fraction:
    return Fraction(2) ** n


def floor_log2(q: Fraction | int) -> int:
    q = Fraction(q)
    if q <= 0:
        raise ValueError("log of a nonpositive number")
    n = q.numerator.bit_length() - q.denominator.bit_length()
    while pow2(n) > q:
        n -= 1
    while pow2(n + 1) <= q:
        n += 1
    return n


def ceil_log2(q: Fraction | int) -> int:
    n = floor_log2(q)
    return n if pow2(n) == Fraction(q) else n + 1


def floor_neg_log2(q: Fraction | int) -> int:
    return -ceil_log2(q)


def ceil_neg_log2(q: Fraction | int) -> int:
    return -floor_log2(q)


def log2_mp(q: Fraction | int):
    q = Fraction(q)
    with mpmath.workprec(PREC_BITS):
        return mpmath.log(q.numerator, 2) - mpmath.log(q.denominator, 2)


def enclose(value, width_bits: int = INTERVAL_BITS) -> tuple[Fraction, Fraction]:
    """Dyadic interval of width ``2**-width_bits`` (give or take one step) around an mpf."""
    scale = 2 ** width_bits
    with mpmath.workprec(PREC_BITS):
        scaled = value * scale
        lo = int(mpmath.floor(scaled)) - 1
        hi = int(mpmath.ceil(scaled)) + 1
    return Fraction(lo, scale), Fraction(hi, scale)


@total_ordering
class Bits:
    """The exact number ``offset - log2(ratio)``; ``ratio == 0`` means +infinity.

    Sums stay exact (offsets add, ratios multiply) and comparisons are decided
    in rational arithmetic, so no tolerance is involved.
    """

    __slots__ = ("offset", "ratio")

    def __init__(self, offset: int = 0, ratio: Fraction | int = 1):
        ratio = Fraction(ratio)
        if ratio < 0:
            raise ValueError("ratio must be nonnegative")
        self.offset = int(offset)
        self.ratio = ratio

    @classmethod
    def neg_log(cls, q: Fraction | int) -> "Bits":
        return cls(0, q)

    @classmethod
    def infinite(cls) -> "Bits":
        return cls(0, 0)

    @property
    def is_inf(self) -> bool:
        return self.ratio == 0

    def __add__(self, other) -> "Bits":
        if isinstance(other, Bits):
            return Bits(self.offset + other.offset, self.ratio * other.ratio)
        if isinstance(other, int):
            return Bits(self.offset + other, self.ratio)
        return NotImplemented

    __radd__ = __add__

    def __sub__(self, other) -> "Bits":
        if isinstance(other, int):
            return Bits(self.offset - other, self.ratio)
        if isinstance(other, Bits):
            if other.is_inf:
                raise ValueError("cannot subtract infinity")
            if self.is_inf:
                return Bits.infinite()
            return Bits(self.offset - other.offset, self.ratio / other.ratio)
        return NotImplemented

    def _cmp(self, other: "Bits") -> int:
        if self.is_inf or other.is_inf:
            return (self.is_inf > other.is_inf) - (self.is_inf < other.is_inf)
        # offset_a - log ra  vs  offset_b - log rb   <=>   rb * 2**(oa - ob)  vs  ra
        lhs = other.ratio * pow2(self.offset - other.offset)
        return (lhs > self.ratio) - (lhs < self.ratio)

    def __eq__(self, other) -> bool:
        if isinstance(other, int):
            other = Bits(other)
        if not isinstance(other, Bits):
            return NotImplemented
        return self._cmp(other) == 0

    def __lt__(self, other) -> bool:
        if isinstance(other, int):
            other = Bits(other)
        if not isinstance(other, Bits):
            return NotImplemented
        return self._cmp(other) < 0

    def __hash__(self):
        return hash((self.offset, self.ratio))

    def mp(self):
        if self.is_inf:
            return mpmath.inf
        with mpmath.workprec(PREC_BITS):
            return self.offset - log2_mp(self.ratio)

    def __float__(self) -> float:
        return math.inf if self.is_inf else float(self.mp())

    def interval(self, width_bits: int = INTERVAL_BITS) -> tuple[Fraction, Fraction]:
        if self.is_inf:
            raise ValueError("infinite value has no enclosure")
        return enclose(self.mp(), width_bits)

    def floor(self) -> int:
        return self.offset + floor_neg_log2(self.ratio)

    def ceil(self) -> int:
        return self.offset + ceil_neg_log2(self.ratio)

    def __repr__(self) -> str:
        if self.is_inf:
            return "Bits(inf)"
        return f"Bits({self.offset} - log2({self.ratio}) ~ {float(self):.6f})"

    def to_json(self) -> dict:
        if self.is_inf:
            return {"offset": None, "ratio": "0", "approx": "inf"}
        return {"offset": self.offset, "ratio": str(self.ratio), "approx": round(float(self), 9)}

    @classmethod
    def from_json(cls, d: dict) -> "Bits":
        if d["offset"] is None:
            return cls.infinite()
        return cls(d["offset"], Fraction(d["ratio"]))


def log_bound(x: Bits, scale: int, const: int):
    """``scale * log2(max(x, 0) + 2) + const`` as an mpf (x finite)."""
    with mpmath.workprec(PREC_BITS):
        return scale * mpmath.log(max(x.mp(), 0) + 2, 2) + const


def le_log_slack(a: Bits, b: Bits, scale: int, const: int) -> bool:
    """Decide ``a <= b + scale*log2(b+2) + const`` at high precision.

    Both sides are computed with PREC_BITS of working precision; values that
    agree to within 2**-INTERVAL_BITS are resolved by the exact equality test
    ``a == b + const`` when ``scale == 0`` and counted as satisfied otherwise.
    """
    if a.is_inf:
        return b.is_inf
    if b.is_inf:
        return True
    if scale == 0:
        return a <= b + const
    with mpmath.workprec(PREC_BITS):
        gap = (b.mp() + log_bound(b, scale, const)) - a.mp()
        return gap >= -mpmath.mpf(2) ** -INTERVAL_BITS


def exp_neg_bounds(x: Fraction | int, extra_terms: int = 30) -> tuple[Fraction, Fraction]:
    """Rational ``(lo, hi)`` with ``lo <= exp(-x) <= hi`` for rational ``x >= 0``.

    Uses the Taylor series of ``exp(x)`` with the geometric tail bound
    ``x**(K+1)/(K+1)! * (K+2)/(K+2-x)``.
    """
    x = Fraction(x)
    if x < 0:
        raise ValueError("x must be nonnegative")
    terms = 2 * math.ceil(x) + extra_terms
    term = Fraction(1)
    partial = Fraction(0)
    for k in range(terms + 1):
        partial += term
        term = term * x / (k + 1)
    # term is now x**(K+1)/(K+1)!
    tail = term * Fraction(terms + 2) / (terms + 2 - x)
    return 1 / (partial + tail), 1 / partial


def le_exp_neg(value: Fraction, x: Fraction | int) -> bool:
    """Certified ``value <= exp(-x)``; refines the series until decided."""
    extra = 30
    while True:
        lo, hi = exp_neg_bounds(x, extra)
        if value <= lo:
            return True
        if value > hi:
            return False
        extra *= 2
        if extra > 4000:
            # value equals exp(-x) only if both are 1 (x == 0); a rational cannot equal e**-x otherwise
            return value <= hi
