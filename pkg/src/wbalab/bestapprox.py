"""Exact enumeration of weighted best-approximation sequences.

Records (p_n, q_n, r_n) are admitted under the strict definition: q is a
record denominator iff its nearest-integer residual beats the running minimum
over all smaller q, and p minimizes at its own q (componentwise nearest
integer, half-ties rounded toward -inf).  All admissions are decided exactly
on rational data; a float prescreen merely skips hopeless comparisons.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence

from .dyadic import DEFAULT_START_BITS, DyadicInterval, log2_fraction, log2_int
from .errors import ConfigError, InsufficientHorizon
from .lattice import ThetaFlowWindows
from .quasinorm import LT, EQ, GT, RadicalValue, WeightVector, pow_cmp

_LN2 = math.log(2.0)


# ---------------------------------------------------------------------------
# Theta vectors
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ThetaVector:
    """Exact rational target vector, reduced to [0,1)^d.

    Sampled vectors are dyadic (denominator 2^P); user-supplied ones may have
    any exact rational coordinates.  Translation by Z^d does not change the
    record radii or denominators, so the [0,1) reduction is harmless.
    """

    nums: tuple[int, ...]
    den: int
    provenance: str = "user-supplied"

    def __post_init__(self):
        if self.den < 1:
            raise ConfigError("theta denominator must be positive")
        for n in self.nums:
            if not 0 <= n < self.den:
                raise ConfigError("theta numerators must be reduced to [0, den)")

    @classmethod
    def from_fractions(cls, coords, provenance: str = "user-supplied") -> "ThetaVector":
        fr = [Fraction(c) for c in coords]
        if not fr:
            raise ConfigError("theta needs at least one coordinate")
        den = 1
        for c in fr:
            den = den * c.denominator // math.gcd(den, c.denominator)
        nums = tuple((c.numerator * (den // c.denominator)) % den for c in fr)
        return cls(nums, den, provenance)

    @classmethod
    def parse(cls, text: str) -> "ThetaVector":
        try:
            return cls.from_fractions([Fraction(p.strip()) for p in text.split(",") if p.strip()])
        except (ValueError, ZeroDivisionError) as exc:
            raise ConfigError(f"cannot parse theta {text!r}: {exc}") from None

    @classmethod
    def random(cls, d: int, bits: int, rng, provenance: str = "sampled") -> "ThetaVector":
        """Uniform dyadic sample in [0,1)^d at the given precision."""
        if bits < 64:
            raise ConfigError("sampled theta precision must be at least 64 bits")
        den = 1 << bits
        nums = tuple(rng.getrandbits(bits) for _ in range(d))
        return cls(nums, den, provenance)

    @property
    def d(self) -> int:
        return len(self.nums)

    @property
    def precision_bits(self) -> int:
        return self.den.bit_length()

    @property
    def coords(self) -> tuple[Fraction, ...]:
        return tuple(Fraction(n, self.den) for n in self.nums)

    def is_zero(self) -> bool:
        return all(n == 0 for n in self.nums)

    def __str__(self) -> str:
        return ",".join(str(c) for c in self.coords)


def _nearest_ints(theta: ThetaVector, q: int):
    """Componentwise nearest p to q*theta with half-ties rounded down.

    Returns (p, residual numerators over theta.den, tie flag).
    """
    den = theta.den
    two_den = 2 * den
    p = []
    rems = []
    tie = False
    for num in theta.nums:
        t = q * num
        pi = (2 * t + den - 1) // two_den
        rem = t - pi * den
        if 2 * rem == den:
            tie = True
        p.append(pi)
        rems.append(rem)
    return p, rems, tie


def nearest_p(theta: ThetaVector, q: int, w: WeightVector):
    """Minimizing p for denominator q and the residual quasi-norm.

    Returns (p, r) with r a RadicalValue (exact); use .interval() for an
    enclosure.
    """
    if q < 1:
        raise ConfigError("q must be >= 1")
    if theta.d != w.d:
        raise ConfigError("theta/weight dimension mismatch")
    p, rems, _ = _nearest_ints(theta, q)
    return tuple(p), _residual_norm(rems, theta.den, w)


def _residual_norm(rems: Sequence[int], den: int, w: WeightVector) -> RadicalValue:
    best: Optional[RadicalValue] = None
    for rem, wi in zip(rems, w.entries):
        cand = RadicalValue(Fraction(abs(rem), den), 1 / wi)
        if best is None or cand.cmp(best) == GT:
            best = cand
    assert best is not None
    return best


def _residual_log(rems: Sequence[int], lden: float, inv_w: Sequence[float]) -> float:
    """Float log2 of the residual quasi-norm (prescreen only)."""
    out = float("-inf")
    for rem, iw in zip(rems, inv_w):
        if rem:
            v = (log2_int(rem if rem > 0 else -rem) - lden) * iw
        else:
            v = float("-inf")
        if v > out:
            out = v
    return out


# ---------------------------------------------------------------------------
# Records and sequences
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class BestApproxRecord:
    p: tuple[int, ...]
    q: int
    r_exact: RadicalValue
    r: DyadicInterval
    certified: bool = True

    @property
    def log_q(self) -> float:
        return log2_int(self.q) * _LN2

    @property
    def log_r(self) -> float:
        return self.r_exact.log()


@dataclass(frozen=True)
class BestApproxSequence:
    theta: ThetaVector
    w: WeightVector
    records: tuple[BestApproxRecord, ...]
    terminal: bool
    horizon_q: int
    ties_logged: int = 0
    norm: str = "weighted"  # "weighted" or "sup" (regular sequences)

    def q_sequence(self) -> list[int]:
        return [r.q for r in self.records]

    def records_upto(self, q_limit: int) -> list[BestApproxRecord]:
        return [r for r in self.records if r.q <= q_limit]

    def betas(self) -> list[float]:
        """beta_n = q_{n+1} * r_n for consecutive record pairs."""
        out = []
        for prev, nxt in zip(self.records, self.records[1:]):
            out.append(math.exp(log2_int(nxt.q) * _LN2 + prev.r_exact.log()))
        return out

    def validate(self):
        """Hard invariants: q strictly up, r strictly down, primitivity,
        beta_n in (0, 1].  Raises on any violation."""
        recs = self.records
        for a, b in zip(recs, recs[1:]):
            if b.q <= a.q:
                raise AssertionError(f"q not strictly increasing at q={b.q}")
            if self.norm == "weighted" and b.r_exact.cmp(a.r_exact) != LT:
                raise AssertionError(f"r not strictly decreasing at q={b.q}")
        for r in recs:
            g = r.q
            for x in r.p:
                g = math.gcd(g, x)
            if g != 1:
                raise AssertionError(f"record ({r.p}, {r.q}) is not primitive")
        if self.norm == "weighted":
            for a, b in zip(recs, recs[1:]):
                if a.r_exact.is_zero():
                    raise AssertionError("record radius hit zero before the last record")
                # beta <= 1  <=>  r_n <= 1/q_{n+1}
                if a.r_exact.cmp_fraction(Fraction(1, b.q)) == GT:
                    raise AssertionError(
                        f"Minkowski bound violated: q={b.q} * r(q={a.q}) > 1"
                    )
        return self


def _make_record(p, q, r_exact, bits=DEFAULT_START_BITS) -> BestApproxRecord:
    return BestApproxRecord(tuple(p), q, r_exact, r_exact.interval(bits))


# ---------------------------------------------------------------------------
# Brute-force oracle enumeration
# ---------------------------------------------------------------------------


def enumerate_best_approx_bruteforce(
    theta: ThetaVector, w: WeightVector, q_max: int
) -> BestApproxSequence:
    """Literal scan over q = 1..q_max; exact record admission."""
    if q_max < 1:
        raise ConfigError("q_max must be >= 1")
    if theta.d != w.d:
        raise ConfigError("theta/weight dimension mismatch")
    den = theta.den
    lden = log2_int(den)
    inv_w = [float(1 / wi) for wi in w.entries]
    records: list[BestApproxRecord] = []
    ties = 0
    r_cur: Optional[RadicalValue] = None
    log_cur = float("inf")
    terminal = False
    horizon = q_max
    for q in range(1, q_max + 1):
        p, rems, tie = _nearest_ints(theta, q)
        lv = _residual_log(rems, lden, inv_w)
        if lv > log_cur + 1e-9:
            continue  # certainly no record
        r_cand = _residual_norm(rems, den, w)
        if r_cur is not None and r_cand.cmp(r_cur) != LT:
            continue
        records.append(_make_record(p, q, r_cand))
        if tie:
            ties += 1
        r_cur = r_cand
        log_cur = lv
        if r_cand.is_zero():
            terminal = True
            horizon = q
            break
    seq = BestApproxSequence(theta, w, tuple(records), terminal, horizon, ties)
    return seq.validate()


# ---------------------------------------------------------------------------
# Flow-window (fast) enumeration
# ---------------------------------------------------------------------------


def enumerate_best_approx_fast(
    theta: ThetaVector,
    w: WeightVector,
    n_max: Optional[int] = None,
    t_budget: Optional[float] = None,
    q_max: Optional[int] = None,
) -> BestApproxSequence:
    """Record enumeration via lattice vectors entering the unit disk along the
    flow: window n covers denominators q in (e^n, e^{n+1}].

    Produces the same records as the brute-force scan on any common horizon
    without touching intermediate denominators.
    """
    if n_max is None and t_budget is None and q_max is None:
        raise ConfigError("need at least one of n_max, t_budget, q_max")
    if n_max is not None and n_max < 1:
        raise ConfigError("n_max must be >= 1")
    if theta.d != w.d:
        raise ConfigError("theta/weight dimension mismatch")

    den = theta.den
    lden = log2_int(den)
    inv_w = [float(1 / wi) for wi in w.entries]
    weights_f = [float(wi) for wi in w.entries]

    p1, rems, tie = _nearest_ints(theta, 1)
    r_cur = _residual_norm(rems, den, w)
    records = [_make_record(p1, 1, r_cur)]
    ties = 1 if tie else 0
    terminal = r_cur.is_zero()
    horizon = 1

    windows = ThetaFlowWindows(theta, w)
    n = 0
    while not terminal:
        if n_max is not None and len(records) >= n_max:
            break
        if t_budget is not None and n + 1 > t_budget:
            break
        if q_max is not None and horizon >= q_max:
            break
        # records in this window satisfy |y_i| <= (e^n r_cur)^{w_i} in
        # a_n-coordinates; 10% inflation absorbs interval slack
        shift = n + r_cur.log()
        horiz = [max(math.exp(shift * wf), 1e-280) * 1.10 for wf in weights_f]
        cands = windows.candidates(n, horiz, math.e * 1.10)
        qs = sorted({q for (_p, q) in cands if q >= 2})
        for q in qs:
            if q_max is not None and q > q_max:
                continue
            if not windows.q_in_window(q, n):
                continue
            p, rems, tie = _nearest_ints(theta, q)
            lv = _residual_log(rems, lden, inv_w)
            if lv > r_cur.log() / _LN2 + 1e-9:
                continue
            r_cand = _residual_norm(rems, den, w)
            if r_cand.cmp(r_cur) != LT:
                continue
            records.append(_make_record(p, q, r_cand))
            if tie:
                ties += 1
            r_cur = r_cand
            if r_cand.is_zero():
                terminal = True
                horizon = q
                break
            if n_max is not None and len(records) >= n_max:
                break
            shift = n + r_cur.log()
        if not terminal:
            n += 1
            horizon = _floor_exp(n)
            if q_max is not None:
                horizon = min(horizon, q_max)
    seq = BestApproxSequence(theta, w, tuple(records), terminal, horizon, ties)
    return seq.validate()


def _floor_exp(n: int) -> int:
    """Largest integer certified <= e^n."""
    if n == 0:
        return 1
    bits = int(n / _LN2) + 64
    while True:
        iv = DyadicInterval.from_number(n, bits).exp()
        lo = _mpfr_floor(iv.lo)
        hi = _mpfr_floor(iv.hi)
        if lo == hi:
            return lo
        bits *= 2


def _mpfr_floor(x) -> int:
    import gmpy2

    return int(gmpy2.floor(x))


# ---------------------------------------------------------------------------
# Regular best approximations (sup-norm minima along the same flow)
# ---------------------------------------------------------------------------


class _EnvelopeVec:
    """Piecewise-linear log-height of a lattice vector along the flow:
    log h(t) = max_i (log|x_i| + w_i t)  vs  (log q - t)."""

    __slots__ = ("p", "q", "slopes", "icepts", "sup_dist", "all_zero")

    def __init__(self, p, q, rems, den, weights_f, lden):
        self.p = tuple(p)
        self.q = q
        slopes = []
        icepts = []
        maxabs = 0
        for rem, wf in zip(rems, weights_f):
            a = -rem if rem < 0 else rem
            if a > maxabs:
                maxabs = a
            slopes.append(wf)
            icepts.append((log2_int(a) - lden) * _LN2 if a else float("-inf"))
        if q > 0:
            slopes.append(-1.0)
            icepts.append(log2_int(q) * _LN2)
        self.slopes = slopes
        self.icepts = icepts
        self.sup_dist = Fraction(maxabs, den)
        self.all_zero = maxabs == 0

    def value(self, t: float) -> float:
        return max(s * t + c for s, c in zip(self.slopes, self.icepts))

    def breakpoints(self, a: float, b: float) -> list[float]:
        """Interior switch points of the active line on [a, b]."""
        pts = []
        lines = list(zip(self.slopes, self.icepts))
        for i in range(len(lines)):
            for j in range(i + 1, len(lines)):
                s1, c1 = lines[i]
                s2, c2 = lines[j]
                if s1 == s2 or c1 == float("-inf") or c2 == float("-inf"):
                    continue
                t = (c2 - c1) / (s1 - s2)
                if a < t < b:
                    pts.append(t)
        return pts


def _first_beat(u: _EnvelopeVec, v: _EnvelopeVec, a: float, b: float, eps: float):
    """Earliest t in (a, b] with u(t) < v(t) - eps, or None."""
    pts = sorted(set([a, b] + u.breakpoints(a, b) + v.breakpoints(a, b)))
    for t0, t1 in zip(pts, pts[1:]):
        g0 = u.value(t0) - v.value(t0)
        g1 = u.value(t1) - v.value(t1)
        if g0 < -eps and t0 > a:
            return t0
        if g1 < -eps:
            if g0 <= -eps:
                return max(t0, a + 1e-15)
            # linear crossing of g = -eps inside (t0, t1]
            t = t0 + (g0 + eps) * (t1 - t0) / (g0 - g1)
            return min(max(t, t0), t1)
    return None


def enumerate_regular_best_approx(
    theta: ThetaVector,
    w: WeightVector,
    n_max: Optional[int] = None,
    t_budget: Optional[float] = None,
) -> BestApproxSequence:
    """Vectors realizing the sup-norm minimum lambda_1 along the weighted flow,
    in order of first realization.

    The per-window candidate pool provably contains every realizer (Minkowski
    keeps lambda_1 <= 1); crossings are located on the piecewise-linear
    log-heights with a small hysteresis, so vectors realizing the minimum only
    on a sub-float-width interval can be missed (ties are measure zero).
    """
    if n_max is None and t_budget is None:
        raise ConfigError("need n_max or t_budget")
    if theta.d != w.d:
        raise ConfigError("theta/weight dimension mismatch")
    den = theta.den
    lden = log2_int(den)
    weights_f = [float(wi) for wi in w.entries]
    windows = ThetaFlowWindows(theta, w)
    eps = 1e-11

    realized: list[_EnvelopeVec] = []
    realized_keys: set = set()
    vcur: Optional[_EnvelopeVec] = None
    terminal = False
    n = 0
    horizon = 1
    while not terminal:
        if t_budget is not None and n + 1 > t_budget:
            break
        if n_max is not None and len(realized) >= n_max:
            break
        horiz = [1.15] * w.d
        cands = windows.candidates(n, horiz, math.e * 1.15)
        pool: dict = {}
        for p, q in cands:
            key = (tuple(p), q)
            if key not in pool:
                pool[key] = _EnvelopeVec(p, q, _rems_for(theta, p, q), den, weights_f, lden)
        vecs = list(pool.values())
        if vcur is not None and (vcur.p, vcur.q) not in pool:
            vecs.append(vcur)
        if not vecs:
            n += 1
            continue
        t0 = float(n) if n > 0 else 1e-9
        t1 = float(n + 1)
        vcur = min(vecs, key=lambda v: (v.value(t0), v.q, v.p))
        _mark(vcur, realized, realized_keys)
        while True:
            best_t, best_u = None, None
            for u in vecs:
                if u is vcur:
                    continue
                t = _first_beat(u, vcur, t0, t1, eps)
                if t is not None and (best_t is None or t < best_t):
                    best_t, best_u = t, u
            if best_t is None:
                break
            t0 = best_t
            vcur = best_u
            _mark(vcur, realized, realized_keys)
            if vcur.all_zero:
                terminal = True
                break
        if vcur is not None and vcur.all_zero:
            terminal = True
        n += 1
        horizon = _floor_exp(n)
        if n_max is not None and len(realized) >= n_max:
            break

    records = []
    for v in realized:
        r_val = RadicalValue.of_fraction(v.sup_dist)
        records.append(_make_record(v.p, v.q, r_val))
    return BestApproxSequence(
        theta, w, tuple(records), terminal, horizon, 0, norm="sup"
    )


def _rems_for(theta: ThetaVector, p, q):
    return [q * num - pi * theta.den for pi, num in zip(p, theta.nums)]


def _mark(v: _EnvelopeVec, realized: list, keys: set):
    key = (v.p, v.q)
    if key not in keys:
        keys.add(key)
        realized.append(v)


# ---------------------------------------------------------------------------
# Prefix equivalence
# ---------------------------------------------------------------------------


def prefix_equivalent(a: Sequence[int], b: Sequence[int], min_overlap: int = 3):
    """Smallest (k0, l0), 1-indexed, with a[k0-1+i] == b[l0-1+i] over the full
    common horizon; None when no alignment works.

    Raises InsufficientHorizon when the best alignment certifies fewer than
    ``min_overlap`` overlapping terms.
    """
    if not a or not b:
        raise ConfigError("prefix_equivalent needs nonempty sequences")
    la, lb = len(a), len(b)
    for total in range(2, la + lb + 1):
        for k0 in range(max(1, total - lb), min(la, total - 1) + 1):
            l0 = total - k0
            overlap = min(la - k0, lb - l0) + 1
            if overlap < 1:
                continue
            if all(a[k0 - 1 + i] == b[l0 - 1 + i] for i in range(overlap)):
                if overlap < min_overlap:
                    raise InsufficientHorizon(
                        f"only {overlap} overlapping terms after alignment ({k0},{l0})"
                    )
                return (k0, l0)
    return None
