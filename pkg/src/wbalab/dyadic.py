"""Outward-rounded interval arithmetic over arbitrary-precision dyadic floats.

Endpoints are MPFR values, i.e. exactly representable dyadic rationals.
Every operation rounds the lower endpoint toward -inf and the upper endpoint
toward +inf, so the interval always encloses the true real result.  Width is
relative: a value produced at ``bits`` has radius at most ``2**(-bits+GUARD)``
times its magnitude.
"""

from __future__ import annotations

import math
import os
from fractions import Fraction

import gmpy2
from gmpy2 import mpfr, mpq

GUARD_BITS = 8
DEFAULT_START_BITS = 128
DEFAULT_MAX_BITS = 8192

ENV_MAX_BITS = "WBA_LAB_MAX_BITS"

_LN2 = math.log(2.0)


def bits_ceiling() -> int:
    """Hard precision ceiling; the WBA_LAB_MAX_BITS env var overrides it."""
    raw = os.environ.get(ENV_MAX_BITS)
    if raw is None:
        return DEFAULT_MAX_BITS
    value = int(raw)
    if value < 64:
        raise ValueError(f"{ENV_MAX_BITS} must be at least 64, got {value}")
    return value


_DOWN_CTX: dict[int, "gmpy2.context"] = {}
_UP_CTX: dict[int, "gmpy2.context"] = {}
_ONE = mpfr(1)


def _down(bits: int):
    ctx = _DOWN_CTX.get(bits)
    if ctx is None:
        ctx = gmpy2.context(precision=bits, round=gmpy2.RoundDown)
        _DOWN_CTX[bits] = ctx
    return ctx


def _up(bits: int):
    ctx = _UP_CTX.get(bits)
    if ctx is None:
        ctx = gmpy2.context(precision=bits, round=gmpy2.RoundUp)
        _UP_CTX[bits] = ctx
    return ctx


def _coerce(value):
    # Fractions go through mpq so the conversion is correctly rounded in one step.
    if isinstance(value, Fraction):
        return mpq(value.numerator, value.denominator)
    return value


def to_mpfr_down(value, bits: int) -> mpfr:
    return _down(bits).mul(_coerce(value), _ONE)


def to_mpfr_up(value, bits: int) -> mpfr:
    return _up(bits).mul(_coerce(value), _ONE)


def log2_int(n: int) -> float:
    """float log2 of a positive integer of any size."""
    if n <= 0:
        raise ValueError("log2_int needs a positive integer")
    nbits = n.bit_length()
    if nbits <= 960:
        return math.log2(n)
    shift = nbits - 64
    return math.log2(n >> shift) + shift


def log2_fraction(f: Fraction) -> float:
    """float log2 of a positive rational; -inf for zero."""
    if f == 0:
        return float("-inf")
    if f < 0:
        raise ValueError("log2_fraction needs a nonnegative rational")
    return log2_int(f.numerator) - log2_int(f.denominator)


def log_fraction(f: Fraction) -> float:
    """Natural log of a positive rational as a float; -inf for zero."""
    return log2_fraction(f) * _LN2


class DyadicInterval:
    """Closed interval [lo, hi] with dyadic (MPFR) endpoints."""

    __slots__ = ("lo", "hi")

    def __init__(self, lo: mpfr, hi: mpfr):
        if gmpy2.is_nan(lo) or gmpy2.is_nan(hi) or lo > hi:
            raise ValueError(f"invalid interval endpoints [{lo}, {hi}]")
        self.lo = lo
        self.hi = hi

    # -- constructors ------------------------------------------------------

    @classmethod
    def from_number(cls, value, bits: int = DEFAULT_START_BITS) -> "DyadicInterval":
        """Enclose an exact int/float/Fraction/mpfr."""
        return cls(to_mpfr_down(value, bits), to_mpfr_up(value, bits))

    @classmethod
    def exact(cls, value, bits: int = DEFAULT_START_BITS) -> "DyadicInterval":
        """Point interval; raises if the value is not representable at ``bits``."""
        lo = to_mpfr_down(value, bits)
        hi = to_mpfr_up(value, bits)
        if lo != hi:
            raise ValueError(f"{value!r} is not exactly representable at {bits} bits")
        return cls(lo, hi)

    @classmethod
    def zero(cls, bits: int = DEFAULT_START_BITS) -> "DyadicInterval":
        z = to_mpfr_down(0, bits)
        return cls(z, z)

    # -- queries -----------------------------------------------------------

    @property
    def bits(self) -> int:
        return max(self.lo.precision, self.hi.precision)

    def is_point(self) -> bool:
        return self.lo == self.hi

    def width(self) -> mpfr:
        return _up(self.bits).sub(self.hi, self.lo)

    def mid(self) -> float:
        return 0.5 * (float(self.lo) + float(self.hi))

    def __float__(self) -> float:
        return self.mid()

    def __repr__(self) -> str:
        if self.is_point():
            return f"DyadicInterval({self.lo!r})"
        return f"DyadicInterval([{self.lo!r}, {self.hi!r}])"

    def contains(self, value) -> bool:
        q = _coerce(value)
        return self.lo <= q <= self.hi

    def contains_zero(self) -> bool:
        return self.lo <= 0 <= self.hi

    def overlaps(self, other: "DyadicInterval") -> bool:
        return not (self.hi < other.lo or other.hi < self.lo)

    # -- ordering ----------------------------------------------------------

    def compare(self, other: "DyadicInterval"):
        """-1/0/+1 when certified, None when the intervals overlap.

        0 is only returned for two identical point intervals.
        """
        if self.hi < other.lo:
            return -1
        if self.lo > other.hi:
            return 1
        if self.is_point() and other.is_point() and self.lo == other.lo:
            return 0
        return None

    def cmp_number(self, value):
        q = _coerce(value)
        if self.hi < q:
            return -1
        if self.lo > q:
            return 1
        if self.is_point() and self.lo == q:
            return 0
        return None

    # -- arithmetic --------------------------------------------------------

    def _pair(self, bits):
        b = bits or self.bits
        return _down(b), _up(b)

    def __neg__(self) -> "DyadicInterval":
        return DyadicInterval(-self.hi, -self.lo)

    def __abs__(self) -> "DyadicInterval":
        if self.lo >= 0:
            return self
        if self.hi <= 0:
            return -self
        hi = max(-self.lo, self.hi)
        return DyadicInterval(to_mpfr_down(0, self.bits), hi)

    def add(self, other, bits: int | None = None) -> "DyadicInterval":
        dn, up = self._pair(bits)
        if isinstance(other, DyadicInterval):
            return DyadicInterval(dn.add(self.lo, other.lo), up.add(self.hi, other.hi))
        q = _coerce(other)
        return DyadicInterval(dn.add(self.lo, q), up.add(self.hi, q))

    def sub(self, other, bits: int | None = None) -> "DyadicInterval":
        dn, up = self._pair(bits)
        if isinstance(other, DyadicInterval):
            return DyadicInterval(dn.sub(self.lo, other.hi), up.sub(self.hi, other.lo))
        q = _coerce(other)
        return DyadicInterval(dn.sub(self.lo, q), up.sub(self.hi, q))

    def mul(self, other, bits: int | None = None) -> "DyadicInterval":
        dn, up = self._pair(bits)
        if isinstance(other, DyadicInterval):
            cands = ((self.lo, other.lo), (self.lo, other.hi), (self.hi, other.lo), (self.hi, other.hi))
            lo = min(dn.mul(a, b) for a, b in cands)
            hi = max(up.mul(a, b) for a, b in cands)
            return DyadicInterval(lo, hi)
        q = _coerce(other)
        if q >= 0:
            return DyadicInterval(dn.mul(self.lo, q), up.mul(self.hi, q))
        return DyadicInterval(dn.mul(self.hi, q), up.mul(self.lo, q))

    __add__ = add
    __sub__ = sub
    __mul__ = mul

    def __radd__(self, other):
        return self.add(other)

    def __rmul__(self, other):
        return self.mul(other)

    def __rsub__(self, other):
        return (-self).add(other)

    def square(self, bits: int | None = None) -> "DyadicInterval":
        a = abs(self)
        dn, up = self._pair(bits)
        return DyadicInterval(dn.mul(a.lo, a.lo), up.mul(a.hi, a.hi))

    def sqrt(self, bits: int | None = None) -> "DyadicInterval":
        if self.lo < 0:
            raise ValueError("sqrt of an interval with negative lower endpoint")
        dn, up = self._pair(bits)
        return DyadicInterval(dn.sqrt(self.lo), up.sqrt(self.hi))

    def exp(self, bits: int | None = None) -> "DyadicInterval":
        dn, up = self._pair(bits)
        return DyadicInterval(dn.exp(self.lo), up.exp(self.hi))

    def log(self, bits: int | None = None) -> "DyadicInterval":
        if self.lo <= 0:
            raise ValueError("log of an interval touching (-inf, 0]")
        dn, up = self._pair(bits)
        return DyadicInterval(dn.log(self.lo), up.log(self.hi))

    def pow_fraction(self, exponent: Fraction, bits: int | None = None) -> "DyadicInterval":
        """x**e for a nonnegative interval and positive rational exponent.

        Computed as exp(e*log x) with directed rounding in every step;
        x == 0 is special-cased (0**e = 0).
        """
        if exponent <= 0:
            raise ValueError("pow_fraction requires a positive exponent")
        if self.lo < 0:
            raise ValueError("pow_fraction requires a nonnegative interval")
        b = bits or self.bits
        dn, up = _down(b), _up(b)
        e = mpq(exponent.numerator, exponent.denominator)
        if self.hi == 0:
            z = to_mpfr_down(0, b)
            return DyadicInterval(z, z)
        hi = up.exp(up.mul(e, up.log(self.hi)))
        if self.lo == 0:
            lo = to_mpfr_down(0, b)
        else:
            lo = dn.exp(dn.mul(e, dn.log(self.lo)))
        return DyadicInterval(lo, hi)

    # -- lattice combinators -----------------------------------------------

    def hull(self, other: "DyadicInterval") -> "DyadicInterval":
        return DyadicInterval(min(self.lo, other.lo), max(self.hi, other.hi))

    def max_with(self, other: "DyadicInterval") -> "DyadicInterval":
        return DyadicInterval(max(self.lo, other.lo), max(self.hi, other.hi))

    def min_with(self, other: "DyadicInterval") -> "DyadicInterval":
        return DyadicInterval(min(self.lo, other.lo), min(self.hi, other.hi))


def exp_interval(value, bits: int) -> DyadicInterval:
    """Certified enclosure of exp(value) for an exact int/float/Fraction."""
    return DyadicInterval.from_number(value, bits).exp()


def interval_max(items) -> DyadicInterval:
    out = None
    for it in items:
        out = it if out is None else out.max_with(it)
    if out is None:
        raise ValueError("interval_max of empty sequence")
    return out


def interval_min(items) -> DyadicInterval:
    out = None
    for it in items:
        out = it if out is None else out.min_with(it)
    if out is None:
        raise ValueError("interval_min of empty sequence")
    return out
