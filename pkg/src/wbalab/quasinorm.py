"""Weighted quasi-norm: exact rational comparisons and interval evaluation.

The norm of x in R^d under a weight vector w is max_i |x_i|**(1/w_i).  Its
balls are axis-aligned boxes: ||x||_w <= r iff |x_i| <= r**w_i for every i.
For rational inputs and rational weights every comparison reduces to comparing
integer powers (cross-exponentiation), so ordering decisions are exact; the
interval layer only supplies numeric enclosures of the values themselves.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

from .dyadic import (
    DEFAULT_START_BITS,
    DyadicInterval,
    bits_ceiling,
    interval_max,
    log2_fraction,
)
from .errors import ConfigError, UncertifiableComparison

# Ordering constants returned by the certified comparators.
LT, EQ, GT = -1, 0, 1

# float prescreen slack for log2 comparisons; generous against the ~1e-12
# absolute error of log2_fraction on huge operands.
_PRESCREEN_SLACK = 1e-6


@dataclass(frozen=True)
class WeightVector:
    """Strictly positive rational weights summing to one."""

    entries: tuple[Fraction, ...]

    def __post_init__(self):
        if len(self.entries) < 1:
            raise ConfigError("weight vector needs at least one entry")
        for w in self.entries:
            if not isinstance(w, Fraction):
                raise ConfigError("weights must be exact rationals")
            if w <= 0:
                raise ConfigError(f"weights must be positive, got {w}")
        if sum(self.entries) != 1:
            raise ConfigError(f"weights must sum to 1 exactly, got {sum(self.entries)}")

    @classmethod
    def of(cls, *weights) -> "WeightVector":
        return cls(tuple(Fraction(w) for w in weights))

    @classmethod
    def equal(cls, d: int) -> "WeightVector":
        return cls(tuple(Fraction(1, d) for _ in range(d)))

    @classmethod
    def parse(cls, text: str) -> "WeightVector":
        """Parse comma-separated rationals like ``"2/3,1/3"``."""
        try:
            parts = tuple(Fraction(p.strip()) for p in text.split(",") if p.strip())
        except (ValueError, ZeroDivisionError) as exc:
            raise ConfigError(f"cannot parse weights {text!r}: {exc}") from None
        return cls(parts)

    @property
    def d(self) -> int:
        return len(self.entries)

    @property
    def w_min(self) -> Fraction:
        return min(self.entries)

    @property
    def w_max(self) -> Fraction:
        return max(self.entries)

    def inv(self, i: int) -> Fraction:
        return 1 / self.entries[i]

    def inverse_exponents(self) -> tuple[Fraction, ...]:
        return tuple(1 / w for w in self.entries)

    def triangle_constant(self) -> Fraction:
        """Exponent of 2 in the weak triangle inequality: (1-w_min)/w_min."""
        return (1 - self.w_min) / self.w_min

    def __str__(self) -> str:
        return ",".join(str(w) for w in self.entries)


def pow_cmp(a: Fraction, ea: Fraction, b: Fraction, eb: Fraction) -> int:
    """Exact sign of a**ea - b**eb for a, b >= 0 and ea, eb > 0."""
    if a < 0 or b < 0:
        raise ValueError("pow_cmp requires nonnegative bases")
    if a == 0:
        return EQ if b == 0 else LT
    if b == 0:
        return GT
    if a == b and ea == eb:
        return EQ
    # Raising both sides to lcm(ea.den, eb.den) makes the exponents integral.
    k = ea.denominator * eb.denominator // math.gcd(ea.denominator, eb.denominator)
    u = ea.numerator * (k // ea.denominator)
    v = eb.numerator * (k // eb.denominator)
    g = math.gcd(u, v)
    u //= g
    v //= g
    la = u * log2_fraction(a)
    lb = v * log2_fraction(b)
    slack = _PRESCREEN_SLACK * (1.0 + abs(la) + abs(lb))
    if la < lb - slack:
        return LT
    if la > lb + slack:
        return GT
    lhs = a.numerator**u * b.denominator**v
    rhs = b.numerator**v * a.denominator**u
    if lhs < rhs:
        return LT
    if lhs > rhs:
        return GT
    return EQ


@dataclass(frozen=True)
class RadicalValue:
    """Exact nonnegative real of the form base**exponent (rational base >= 0,
    rational exponent > 0).  Quasi-norm values of rational vectors live here."""

    base: Fraction
    exponent: Fraction

    @classmethod
    def zero(cls) -> "RadicalValue":
        return cls(Fraction(0), Fraction(1))

    @classmethod
    def of_fraction(cls, f: Fraction) -> "RadicalValue":
        if f < 0:
            raise ValueError("RadicalValue must be nonnegative")
        return cls(f, Fraction(1))

    def is_zero(self) -> bool:
        return self.base == 0

    def cmp(self, other: "RadicalValue") -> int:
        return pow_cmp(self.base, self.exponent, other.base, other.exponent)

    def cmp_fraction(self, s: Fraction) -> int:
        if s < 0:
            return GT
        return pow_cmp(self.base, self.exponent, Fraction(s), Fraction(1))

    def __lt__(self, other: "RadicalValue") -> bool:
        return self.cmp(other) == LT

    def __le__(self, other: "RadicalValue") -> bool:
        return self.cmp(other) != GT

    def log(self) -> float:
        """Natural log as a float; -inf at zero."""
        if self.is_zero():
            return float("-inf")
        return float(self.exponent) * log2_fraction(self.base) * math.log(2.0)

    def __float__(self) -> float:
        if self.is_zero():
            return 0.0
        return math.exp(self.log())

    def interval(self, bits: int = DEFAULT_START_BITS) -> DyadicInterval:
        if self.is_zero():
            return DyadicInterval.zero(bits)
        return DyadicInterval.from_number(self.base, bits).pow_fraction(self.exponent)


def wnorm(xs: Sequence[Fraction], w: WeightVector) -> RadicalValue:
    """Exact quasi-norm of a rational vector: the maximizing |x_i|**(1/w_i)."""
    if len(xs) != w.d:
        raise ConfigError(f"dimension mismatch: point has {len(xs)}, weights {w.d}")
    best: RadicalValue | None = None
    for x, wi in zip(xs, w.entries):
        cand = RadicalValue(abs(Fraction(x)), 1 / wi)
        if best is None or cand.cmp(best) == GT:
            best = cand
    assert best is not None
    return best


def wnorm_le(xs: Sequence[Fraction], w: WeightVector, bound: Fraction) -> bool:
    """||x||_w <= bound, coordinatewise: |x_i| <= bound**w_i exactly."""
    if bound < 0:
        return False
    for x, wi in zip(xs, w.entries):
        if pow_cmp(abs(Fraction(x)), 1 / wi, Fraction(bound), Fraction(1)) == GT:
            return False
    return True


def wnorm_lt(xs: Sequence[Fraction], w: WeightVector, bound: "RadicalValue") -> bool:
    """||x||_w < bound with an exact RadicalValue bound."""
    for x, wi in zip(xs, w.entries):
        if pow_cmp(abs(Fraction(x)), 1 / wi, bound.base, bound.exponent) != LT:
            return False
    return True


def wnorm_le_value(xs: Sequence[Fraction], w: WeightVector, bound: "RadicalValue") -> bool:
    for x, wi in zip(xs, w.entries):
        if pow_cmp(abs(Fraction(x)), 1 / wi, bound.base, bound.exponent) == GT:
            return False
    return True


def wnorm_cmp(xs: Sequence[Fraction], ys: Sequence[Fraction], w: WeightVector) -> int:
    return wnorm(xs, w).cmp(wnorm(ys, w))


# ---------------------------------------------------------------------------
# Interval-certified surface (points with DyadicInterval coordinates)
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class WVector:
    """A point of R^d with interval-certified coordinates."""

    coords: tuple[DyadicInterval, ...]

    @classmethod
    def from_numbers(cls, values: Iterable, bits: int = DEFAULT_START_BITS) -> "WVector":
        return cls(tuple(DyadicInterval.from_number(v, bits) for v in values))

    @property
    def d(self) -> int:
        return len(self.coords)

    def exact_fractions(self) -> tuple[Fraction, ...] | None:
        """Recover exact rational coordinates when every interval is a point."""
        import gmpy2

        out = []
        for c in self.coords:
            if not c.is_point():
                return None
            q = gmpy2.mpq(c.lo)
            out.append(Fraction(int(q.numerator), int(q.denominator)))
        return tuple(out)


def quasi_norm(x: WVector, w: WeightVector, bits: int | None = None) -> DyadicInterval:
    """Certified enclosure of max_i |x_i|**(1/w_i)."""
    if x.d != w.d:
        raise ConfigError(f"dimension mismatch: point has {x.d}, weights {w.d}")
    b = bits or max(c.bits for c in x.coords)
    terms = [abs(c).pow_fraction(1 / wi, bits=b) for c, wi in zip(x.coords, w.entries)]
    return interval_max(terms)


def quasi_norm_compare(
    x: WVector,
    y: WVector,
    w: WeightVector,
    max_bits: int | None = None,
    start_bits: int = DEFAULT_START_BITS,
) -> int:
    """Certified ordering of ||x||_w vs ||y||_w.

    Escalates interval precision geometrically; for exact rational inputs the
    final fallback is exact cross-exponentiation, so EQ is only ever returned
    when certified.  Raises UncertifiableComparison otherwise.
    """
    ceiling = max_bits or bits_ceiling()
    bits = min(start_bits, ceiling)
    while True:
        nx = quasi_norm(x, w, bits=bits)
        ny = quasi_norm(y, w, bits=bits)
        c = nx.compare(ny)
        if c is not None:
            return c
        if bits >= ceiling:
            break
        bits = min(2 * bits, ceiling)
    fx = x.exact_fractions()
    fy = y.exact_fractions()
    if fx is not None and fy is not None:
        return wnorm_cmp(fx, fy, w)
    raise UncertifiableComparison(
        f"quasi-norm comparison undecided at {ceiling} bits",
        context={"bits": ceiling},
    )


def scale_w(x: WVector, s, w: WeightVector, bits: int | None = None) -> WVector:
    """Apply the horizontal part of the flow: coordinate i scales by e**(w_i s)."""
    if x.d != w.d:
        raise ConfigError(f"dimension mismatch: point has {x.d}, weights {w.d}")
    b = bits or max(c.bits for c in x.coords)
    out = []
    for c, wi in zip(x.coords, w.entries):
        factor = DyadicInterval.from_number(s, b).mul(wi).exp()
        out.append(c.mul(factor, bits=b))
    return WVector(tuple(out))
