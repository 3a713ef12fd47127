"""Unimodular lattices, the weighted diagonal flow, and region enumeration.

The flow acts by a_t = diag(e^{w_1 t}, ..., e^{w_d t}, e^{-t}); its orbits over
theta-lattices are tracked exactly (integer vectors filtered by exact rational
tests), with MPFR intervals used only to build provably covering coefficient
boxes for the enumeration.  General lattices (arbitrary bases) get the same
machinery with interval-certified membership.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Optional, Sequence

import gmpy2
from gmpy2 import mpfr

from .dyadic import (
    DEFAULT_START_BITS,
    DyadicInterval,
    bits_ceiling,
    log2_int,
    to_mpfr_down,
    to_mpfr_up,
    _down,
    _up,
)
from .errors import (
    BoundaryAmbiguous,
    ConfigError,
    EnumerationBudgetExceeded,
    PrecisionExhausted,
)
from .quasinorm import LT, GT, RadicalValue, WeightVector, pow_cmp

_LN2 = math.log(2.0)


# ---------------------------------------------------------------------------
# Flow parameters
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class FlowParams:
    """Exponent data of the diagonal flow.

    Vector case: expanding = w (d weights), contracting = (1,), giving
    diag(e^{w_i t}, e^{-t}).  Matrix case: expanding = a (m weights),
    contracting = b (n weights).  Each block sums to one, so det(a_t) = 1
    identically in t.
    """

    expanding: WeightVector
    contracting: WeightVector

    @classmethod
    def vector(cls, w: WeightVector) -> "FlowParams":
        return cls(w, WeightVector.of(1))

    @classmethod
    def matrix(cls, a: WeightVector, b: WeightVector) -> "FlowParams":
        return cls(a, b)

    @property
    def N(self) -> int:
        return self.expanding.d + self.contracting.d

    def exponents(self) -> tuple[Fraction, ...]:
        return tuple(self.expanding.entries) + tuple(-b for b in self.contracting.entries)

    def det_exponent(self) -> Fraction:
        return sum(self.exponents(), Fraction(0))

    def max_rate(self) -> Fraction:
        return max(abs(e) for e in self.exponents())


def precision_schedule(t: float, fp: FlowParams, guard: int = 128) -> int:
    """Working bits needed at flow time t: the condition number of a_t grows
    like e^{(1+w_max)|t|}."""
    rate = 1 + float(fp.max_rate())
    return max(DEFAULT_START_BITS, int(math.ceil(rate * abs(t) / _LN2)) + guard)


# ---------------------------------------------------------------------------
# Small integer/numeric matrix helpers (N <= 4 throughout)
# ---------------------------------------------------------------------------


def _identity_int(n: int) -> list[list[int]]:
    return [[1 if i == j else 0 for i in range(n)] for j in range(n)]  # column-major


def _mat_mul_int(a_cols: Sequence[Sequence[int]], b_cols: Sequence[Sequence[int]]) -> list[list[int]]:
    """Column-major integer matrix product A*B."""
    n = len(a_cols[0])
    out = []
    for bcol in b_cols:
        col = [0] * n
        for j, coeff in enumerate(bcol):
            if coeff:
                acol = a_cols[j]
                for i in range(n):
                    col[i] += coeff * acol[i]
        out.append(col)
    return out


def _mat_vec_int(cols: Sequence[Sequence[int]], c: Sequence[int]) -> list[int]:
    n = len(cols[0])
    out = [0] * n
    for j, coeff in enumerate(c):
        if coeff:
            col = cols[j]
            for i in range(n):
                out[i] += coeff * col[i]
    return out


def _det_fraction(cols: Sequence[Sequence[Fraction]]) -> Fraction:
    n = len(cols)
    if n == 1:
        return Fraction(cols[0][0])
    if n == 2:
        return cols[0][0] * cols[1][1] - cols[1][0] * cols[0][1]
    det = Fraction(0)
    for j in range(n):
        minor = [[cols[k][i] for i in range(1, n)] for k in range(n) if k != j]
        term = Fraction(cols[j][0]) * _det_fraction(minor)
        det += term if j % 2 == 0 else -term
    return det


def _dot(u, v):
    s = u[0] * v[0]
    for i in range(1, len(u)):
        s += u[i] * v[i]
    return s


def _lll_transform(cols: Sequence[Sequence[mpfr]], delta: float = 0.75, max_rounds: int = 6000) -> list[list[int]]:
    """Integer unimodular U (column-major) such that cols*U is LLL-ish reduced.

    Heuristic numeric reduction; correctness downstream never relies on its
    quality, only on U being unimodular by construction.
    """
    n = len(cols)
    B = [list(col) for col in cols]
    U = _identity_int(n)
    half = mpfr("0.5")

    def gso():
        star, mu, norms = [], [[mpfr(0)] * n for _ in range(n)], []
        for j in range(n):
            v = list(B[j])
            for i in range(j):
                if norms[i] > 0:
                    m = _dot(B[j], star[i]) / norms[i]
                else:
                    m = mpfr(0)
                mu[j][i] = m
                v = [v[k] - m * star[i][k] for k in range(n)]
            star.append(v)
            norms.append(_dot(v, v))
        return star, mu, norms

    k = 1
    rounds = 0
    while k < n and rounds < max_rounds:
        rounds += 1
        star, mu, norms = gso()
        changed = False
        for j in range(k - 1, -1, -1):
            m = mu[k][j]
            if abs(m) > half:
                r = int(gmpy2.rint(m))
                B[k] = [B[k][i] - r * B[j][i] for i in range(n)]
                U[k] = [U[k][i] - r * U[j][i] for i in range(n)]
                changed = True
        if changed:
            star, mu, norms = gso()
        if norms[k] < (mpfr(delta) - mu[k][k - 1] ** 2) * norms[k - 1]:
            B[k], B[k - 1] = B[k - 1], B[k]
            U[k], U[k - 1] = U[k - 1], U[k]
            k = max(k - 1, 1)
        else:
            k += 1
    return U


def _approx_inverse(cols: Sequence[Sequence[mpfr]]) -> list[list[mpfr]]:
    """Row-major numeric inverse by Gauss-Jordan with partial pivoting."""
    n = len(cols)
    a = [[cols[j][i] for j in range(n)] for i in range(n)]  # row-major copy
    inv = [[mpfr(1) if i == j else mpfr(0) for j in range(n)] for i in range(n)]
    for col in range(n):
        piv = max(range(col, n), key=lambda r: abs(a[r][col]))
        if a[piv][col] == 0:
            raise ZeroDivisionError("singular basis in _approx_inverse")
        a[col], a[piv] = a[piv], a[col]
        inv[col], inv[piv] = inv[piv], inv[col]
        scale = a[col][col]
        a[col] = [x / scale for x in a[col]]
        inv[col] = [x / scale for x in inv[col]]
        for r in range(n):
            if r != col and a[r][col] != 0:
                f = a[r][col]
                a[r] = [x - f * y for x, y in zip(a[r], a[col])]
                inv[r] = [x - f * y for x, y in zip(inv[r], inv[col])]
    return inv


def _cover_bounds(
    r_cols: Sequence[Sequence[DyadicInterval]],
    j_rows: Sequence[Sequence[mpfr]],
    limits: Sequence[float],
    bits: int,
) -> Optional[list[int]]:
    """Rigorous per-coordinate coefficient bounds covering {c : R c in Box}.

    With J an approximate inverse of R, any solution satisfies
    c = J x - (J R - I) c, so |c_j| <= sum_k |J_jk| H_k + Delta * |c|_inf.
    Returns None when Delta >= 1/2 (precision or reduction too weak).
    """
    n = len(r_cols)
    up = _up(max(bits, 64))
    delta = mpfr(0)
    for j in range(n):
        row_err = mpfr(0)
        for l in range(n):
            acc_lo = mpfr(0)
            acc_hi = mpfr(0)
            dn = _down(max(bits, 64))
            for k in range(n):
                e = r_cols[l][k]
                jv = j_rows[j][k]
                prods = (dn.mul(jv, e.lo), dn.mul(jv, e.hi))
                acc_lo = dn.add(acc_lo, min(prods))
                prods_u = (up.mul(jv, e.lo), up.mul(jv, e.hi))
                acc_hi = up.add(acc_hi, max(prods_u))
            target = mpfr(1) if j == l else mpfr(0)
            err = max(abs(up.sub(acc_hi, target)), abs(up.sub(target, acc_lo)))
            row_err = up.add(row_err, err)
        delta = max(delta, row_err)
    if delta >= mpfr("0.5"):
        return None
    bvals = []
    for j in range(n):
        b = mpfr(0)
        for k in range(n):
            b = up.add(b, up.mul(abs(j_rows[j][k]), mpfr(limits[k])))
        bvals.append(b)
    binf = max(bvals)
    bounds = []
    for j in range(n):
        c = up.add(bvals[j], up.div(up.mul(delta, binf), up.sub(mpfr(1), delta)))
        bounds.append(int(math.floor(float(c) + 1e-9)))
    return bounds


def _coeff_box(bounds: Sequence[int], budget: int) -> Iterable[tuple[int, ...]]:
    """Nonzero integer vectors in the box, one per +/- pair (first nonzero > 0)."""
    total = 1
    for c in bounds:
        total *= 2 * c + 1
        if total > 2 * budget:
            raise EnumerationBudgetExceeded(
                f"coefficient box of size ~{total} exceeds budget {budget}"
            )
    ranges = [range(-c, c + 1) for c in bounds]
    for c in itertools.product(*ranges):
        for x in c:
            if x > 0:
                yield c
                break
            if x < 0:
                break


def _gcd_vec(c: Sequence[int]) -> int:
    g = 0
    for x in c:
        g = math.gcd(g, x)
        if g == 1:
            return 1
    return g


# ---------------------------------------------------------------------------
# Regions
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Region:
    """Disk D_r (horizontal w-ball at height exactly 1), cylinder C_r
    (|last| <= 1), or a tall cylinder with vertical half-height e."""

    kind: str  # "disk" | "cylinder" | "cylinder_tall"
    r: RadicalValue
    w: WeightVector
    e: Fraction = Fraction(1)

    def __post_init__(self):
        if self.kind not in ("disk", "cylinder", "cylinder_tall"):
            raise ConfigError(f"unknown region kind {self.kind!r}")
        if self.kind != "cylinder_tall" and self.e != 1:
            raise ConfigError("vertical bound e is only for cylinder_tall")
        if self.e <= 0:
            raise ConfigError("vertical bound must be positive")

    @classmethod
    def disk(cls, r, w: WeightVector) -> "Region":
        return cls("disk", _as_radical(r), w)

    @classmethod
    def cylinder(cls, r, w: WeightVector) -> "Region":
        return cls("cylinder", _as_radical(r), w)

    @classmethod
    def cylinder_tall(cls, r, w: WeightVector, e) -> "Region":
        return cls("cylinder_tall", _as_radical(r), w, Fraction(e))

    def vertical_bound(self) -> Fraction:
        return self.e if self.kind == "cylinder_tall" else Fraction(1)


def _as_radical(r) -> RadicalValue:
    if isinstance(r, RadicalValue):
        return r
    return RadicalValue.of_fraction(Fraction(r))


# ---------------------------------------------------------------------------
# UnimodularLattice
# ---------------------------------------------------------------------------

_DET_TOL = 1e-9


@dataclass
class UnimodularLattice:
    """(d+1)-dimensional unimodular lattice given by basis columns.

    ``exact_cols`` carries exact rational entries when available (theta
    lattices, assembled section samples); ``cols`` is the interval companion
    at ``bits`` precision.  Integer column operations are the only basis
    changes ever applied, so the generated lattice is preserved exactly.
    """

    cols: tuple[tuple[DyadicInterval, ...], ...]
    exact_cols: Optional[tuple[tuple[Fraction, ...], ...]]
    log_time: float = 0.0
    origin: str = "explicit"
    bits: int = DEFAULT_START_BITS

    @property
    def N(self) -> int:
        return len(self.cols)

    @classmethod
    def from_exact(cls, cols, origin: str = "explicit", bits: int = DEFAULT_START_BITS,
                   det_tol: float = _DET_TOL) -> "UnimodularLattice":
        exact = tuple(tuple(Fraction(x) for x in col) for col in cols)
        det = _det_fraction(exact)
        if abs(float(det) - 1.0) > det_tol and abs(float(det) + 1.0) > det_tol:
            raise ConfigError(f"basis determinant {float(det)} is not +-1")
        icols = tuple(
            tuple(DyadicInterval.from_number(x, bits) for x in col) for col in exact
        )
        return cls(icols, exact, 0.0, origin, bits)

    def det_interval(self) -> DyadicInterval:
        return _det_interval(self.cols, self.bits)

    def midpoint_cols(self) -> list[list[mpfr]]:
        return [[gmpy2.mpfr(0.5) * (e.lo + e.hi) for e in col] for col in self.cols]

    # -- basis maintenance ---------------------------------------------------

    def reduced(self) -> tuple["UnimodularLattice", list[list[int]]]:
        """Size-reduce columns; returns (new lattice, unimodular transform U)."""
        U = _lll_transform(self.midpoint_cols())
        cols = _apply_transform_interval(self.cols, U, self.bits)
        exact = None
        if self.exact_cols is not None:
            exact = tuple(
                tuple(
                    sum((Fraction(U[j][k]) * self.exact_cols[k][i] for k in range(self.N)), Fraction(0))
                    for i in range(self.N)
                )
                for j in range(self.N)
            )
        return (
            UnimodularLattice(cols, exact, self.log_time, self.origin, self.bits),
            U,
        )


def _det_interval(cols, bits) -> DyadicInterval:
    n = len(cols)
    if n == 1:
        return cols[0][0]
    if n == 2:
        return cols[0][0].mul(cols[1][1], bits=bits).sub(cols[1][0].mul(cols[0][1], bits=bits))
    det = DyadicInterval.zero(bits)
    for j in range(n):
        minor = [[cols[k][i] for i in range(1, n)] for k in range(n) if k != j]
        term = cols[j][0].mul(_det_interval(minor, bits), bits=bits)
        det = det.add(term) if j % 2 == 0 else det.sub(term)
    return det


def _apply_transform_interval(cols, U, bits):
    n = len(cols)
    out = []
    for ucol in U:
        col = [DyadicInterval.zero(bits) for _ in range(n)]
        for k, coeff in enumerate(ucol):
            if coeff:
                for i in range(n):
                    col[i] = col[i].add(cols[k][i].mul(coeff, bits=bits))
        out.append(tuple(col))
    return tuple(out)


def make_theta_lattice(theta) -> UnimodularLattice:
    """Lambda_theta = u(-theta) Z^{d+1}: identity basis with -theta stacked in
    the last column's first d rows."""
    d = theta.d
    cols = []
    for j in range(d):
        cols.append(tuple(Fraction(1) if i == j else Fraction(0) for i in range(d + 1)))
    last = tuple(-c for c in theta.coords) + (Fraction(1),)
    cols.append(last)
    return UnimodularLattice.from_exact(cols, origin="theta-lattice")


def apply_flow(L: UnimodularLattice, fp: FlowParams, t, bits: Optional[int] = None,
               reduce: bool = True) -> UnimodularLattice:
    """Left-multiply the basis by a_t (row i scales by e^{e_i t})."""
    if fp.N != L.N:
        raise ConfigError(f"flow dimension {fp.N} != lattice dimension {L.N}")
    if t == 0:
        return L
    need = precision_schedule(abs(float(t)) + abs(L.log_time), fp)
    b = bits or max(L.bits, need)
    ceiling = bits_ceiling()
    if b > ceiling:
        raise PrecisionExhausted(
            f"flow time needs {b} bits, ceiling is {ceiling}", needed_bits=b, ceiling=ceiling
        )
    exps = fp.exponents()
    factors = [DyadicInterval.from_number(t, b).mul(e).exp() for e in exps]
    cols = tuple(
        tuple(col[i].mul(factors[i], bits=b) for i in range(L.N)) for col in L.cols
    )
    out = UnimodularLattice(cols, None, L.log_time + float(t), L.origin, b)
    if reduce:
        out, _ = out.reduced()
    return out


# ---------------------------------------------------------------------------
# Region enumeration and minima
# ---------------------------------------------------------------------------


def _region_box_limits(region: Region, N: int) -> list[float]:
    if region.r.is_zero():
        r_ub = 0.0
        limits = [1e-12 for _ in region.w.entries]
    else:
        lr = region.r.log()
        limits = [
            min(math.exp(lr * float(wi)), 1e300) * 1.1 + 1e-12 for wi in region.w.entries
        ]
    limits.append(float(region.vertical_bound()) * 1.1 + 1e-12)
    assert len(limits) == N
    return limits


def _enumerate_cover(L: UnimodularLattice, limits: Sequence[float], budget: int):
    """Coefficient vectors (original-basis coordinates) covering the box."""
    work = L
    ceiling = bits_ceiling()
    while True:
        red, U = work.reduced()
        J = _approx_inverse(red.midpoint_cols())
        bounds = _cover_bounds(red.cols, J, limits, red.bits)
        if bounds is not None:
            break
        if work.exact_cols is None or 2 * work.bits > ceiling:
            raise PrecisionExhausted(
                f"cannot certify enumeration cover at {red.bits} bits",
                needed_bits=2 * red.bits,
                ceiling=ceiling,
            )
        work = UnimodularLattice.from_exact(
            work.exact_cols, origin=work.origin, bits=2 * work.bits
        )
    for c in _coeff_box(bounds, budget):
        yield _mat_vec_int(U, c)


def _membership_exact(point: Sequence[Fraction], region: Region):
    """True/False membership for an exact point (always decidable)."""
    n = len(point)
    last = point[n - 1]
    if region.kind == "disk":
        if last != 1:
            return False
    else:
        if abs(last) > region.vertical_bound():
            return False
    for x, wi in zip(point[: n - 1], region.w.entries):
        if pow_cmp(abs(x), 1 / wi, region.r.base, region.r.exponent) == GT:
            return False
    return True


def _membership_interval(point: Sequence[DyadicInterval], region: Region, bits: int):
    """Certified True/False, or None when an inequality is too close to call."""
    n = len(point)
    last = point[n - 1]
    if region.kind == "disk":
        c = last.cmp_number(1)
        if c is None:
            return None  # spans 1 without pinning it: equality not certifiable
        if c != 0:
            return False
    else:
        c = abs(last).cmp_number(region.vertical_bound())
        if c == 1:
            return False
        if c is None:
            return None
    rint = region.r.interval(bits)
    for x, wi in zip(point[: n - 1], region.w.entries):
        term = abs(x).pow_fraction(1 / wi, bits=bits)
        if term.hi <= rint.lo:
            continue  # certified inside
        if term.lo > rint.hi:
            return False
        return None
    return True


def enumerate_in_region(
    L: UnimodularLattice,
    region: Region,
    budget: int = 200_000,
    on_ambiguous: str = "raise",
) -> list[tuple[int, ...]]:
    """All primitive lattice vectors in the region, as integer coordinate
    vectors w.r.t. the lattice's basis columns (one representative per +-pair,
    except disks, where the sign with last coordinate +1 is returned)."""
    if region.w.d + 1 != L.N:
        raise ConfigError("region weight dimension does not match lattice")
    out = []
    for c in _enumerate_cover(L, _region_box_limits(region, L.N), budget):
        if _gcd_vec(c) != 1:
            continue
        for sign in (1, -1):
            cc = tuple(sign * x for x in c)
            if L.exact_cols is not None:
                point = [
                    sum((Fraction(cc[j]) * L.exact_cols[j][i] for j in range(L.N)), Fraction(0))
                    for i in range(L.N)
                ]
                member = _membership_exact(point, region)
            else:
                point = [
                    _interval_combo(L.cols, cc, i, L.bits) for i in range(L.N)
                ]
                member = _membership_interval(point, region, L.bits)
                if member is None:
                    if on_ambiguous == "raise":
                        raise BoundaryAmbiguous(
                            f"membership of {cc} in {region.kind} not certifiable at {L.bits} bits"
                        )
                    member = False
            if member:
                out.append(cc)
            if region.kind != "disk":
                break  # +-pairs listed once for symmetric regions
    out.sort()
    return out


def _interval_combo(cols, c, i, bits):
    acc = DyadicInterval.zero(bits)
    for j, coeff in enumerate(c):
        if coeff:
            acc = acc.add(cols[j][i].mul(coeff, bits=bits))
    return acc


_EUCLID_MINKOWSKI = {1: 2 / math.sqrt(math.pi), 2: 1.2407, 3: 1.3389, 4: 1.4225, 5: 1.5013}


def _minima_candidates(L: UnimodularLattice, limit: float, budget: int):
    limits = [limit * 1.05 + 1e-12] * L.N
    return _enumerate_cover(L, limits, budget)


def lambda1_sup(L: UnimodularLattice, budget: int = 200_000) -> DyadicInterval:
    """Certified enclosure of the shortest sup-norm length (is <= 1)."""
    best = None
    for c in _minima_candidates(L, 1.0, budget):
        if _gcd_vec(c) != 1:
            continue
        norms = [abs(_point_coord(L, c, i)) for i in range(L.N)]
        n = norms[0]
        for x in norms[1:]:
            n = n.max_with(x)
        best = n if best is None else best.min_with(n)
    if best is None:
        raise EnumerationBudgetExceeded("no candidate vector found for lambda1_sup")
    return best


def lambda1_w(L: UnimodularLattice, w: WeightVector, budget: int = 200_000) -> DyadicInterval:
    """Shortest length in the mixed quasi-norm max(||pi(v)||_w, |v_last|)."""
    if w.d + 1 != L.N:
        raise ConfigError("weight dimension does not match lattice")
    best = None
    for c in _minima_candidates(L, 1.0, budget):
        if _gcd_vec(c) != 1:
            continue
        terms = [
            abs(_point_coord(L, c, i)).pow_fraction(1 / wi, bits=L.bits)
            for i, wi in enumerate(w.entries)
        ]
        terms.append(abs(_point_coord(L, c, L.N - 1)))
        n = terms[0]
        for x in terms[1:]:
            n = n.max_with(x)
        best = n if best is None else best.min_with(n)
    if best is None:
        raise EnumerationBudgetExceeded("no candidate vector found for lambda1_w")
    return best


def lambda1_euclid(L: UnimodularLattice, budget: int = 200_000) -> DyadicInterval:
    radius = _EUCLID_MINKOWSKI.get(L.N, math.sqrt(L.N))
    best = None
    for c in _minima_candidates(L, radius, budget):
        # Euclidean minimum may be non-primitive only for multiples, which are
        # never shorter; primitive filter is still sound.
        if _gcd_vec(c) != 1:
            continue
        sq = DyadicInterval.zero(L.bits)
        for i in range(L.N):
            sq = sq.add(_point_coord(L, c, i).square())
        n = sq.sqrt()
        best = n if best is None else best.min_with(n)
    if best is None:
        raise EnumerationBudgetExceeded("no candidate vector found for lambda1_euclid")
    return best


def delta_fn(L: UnimodularLattice, budget: int = 200_000) -> DyadicInterval:
    """sup over nonzero v of log(1/||v||_2), i.e. -log of the Euclidean minimum."""
    lam = lambda1_euclid(L, budget)
    return -lam.log()


def _point_coord(L: UnimodularLattice, c, i) -> DyadicInterval:
    if L.exact_cols is not None:
        val = sum((Fraction(c[j]) * L.exact_cols[j][i] for j in range(L.N)), Fraction(0))
        return DyadicInterval.from_number(val, L.bits)
    return _interval_combo(L.cols, c, i, L.bits)


# ---------------------------------------------------------------------------
# Section-point classification
# ---------------------------------------------------------------------------

NOT_IN_S1 = "not_in_S1"
S1_NOT_SHARP = "S1_not_sharp"
S1_SHARP = "S1_sharp"


@dataclass(frozen=True)
class SectionClassification:
    kind: str
    witness: Optional[tuple[int, ...]] = None  # lattice coordinates
    r_value: Optional[RadicalValue] = None
    r_interval: Optional[DyadicInterval] = None
    in_B: Optional[bool] = None


def classify_section_point(
    L: UnimodularLattice, w: WeightVector, budget: int = 200_000
) -> SectionClassification:
    """Membership in S_1 / S_1^# and, for sharp points, the witness test
    C_{r(Lambda)} cap primitives == {+-witness}."""
    disk = Region.disk(Fraction(1), w)
    hits = enumerate_in_region(L, disk, budget=budget)
    if not hits:
        return SectionClassification(NOT_IN_S1)
    if len(hits) > 1:
        return SectionClassification(S1_NOT_SHARP)
    witness = hits[0]
    if L.exact_cols is None:
        # the disk test above only certifies for exact bases, so this is
        # unreachable in practice; keep the guard for interval-only callers
        raise BoundaryAmbiguous(
            "classify_section_point needs an exact basis to certify the cylinder test"
        )
    point = [
        sum((Fraction(witness[j]) * L.exact_cols[j][i] for j in range(L.N)), Fraction(0))
        for i in range(L.N)
    ]
    from .quasinorm import wnorm

    r_val = wnorm(point[: L.N - 1], w)
    r_int = r_val.interval(L.bits)
    cyl = Region.cylinder(r_val, w)
    inside = enumerate_in_region(L, cyl, budget=budget)
    others = [c for c in inside if c != witness and tuple(-x for x in c) != witness]
    return SectionClassification(S1_SHARP, witness, r_val, r_int, len(others) == 0)


# ---------------------------------------------------------------------------
# Windowed enumeration along a theta-orbit
# ---------------------------------------------------------------------------


class ThetaFlowWindows:
    """Candidate generator for lattice vectors of Lambda_theta entering
    bounded boxes along the flow, window by window (step Delta = 1).

    The working basis is u(-theta) * U with U integer unimodular, recomputed
    exactly from theta's integer data each window; MPFR intervals only decide
    how large the covering coefficient box must be, so a precision shortfall
    can enlarge the search but never lose a vector.
    """

    def __init__(self, theta, w: WeightVector, bits: int = 160, budget: int = 250_000):
        if theta.d != w.d:
            raise ConfigError("theta/weight dimension mismatch")
        self.theta = theta
        self.w = w
        self.N = w.d + 1
        self.bits = bits
        self.budget = budget
        self._U = _identity_int(self.N)
        # V = den * u(-theta) * U, integer matrix over common denominator den
        den = theta.den
        self._V = []
        for j in range(self.N):
            col = [den if i == j else 0 for i in range(self.N)]
            self._V.append(col)
        for i, num in enumerate(theta.nums):
            self._V[self.N - 1][i] = -num
        self._V[self.N - 1][self.N - 1] = den
        self._window = -1
        self._float_cols: Optional[list[list[mpfr]]] = None
        self._exp_cache: dict[tuple[int, int], DyadicInterval] = {}

    # -- exp(n * w_i) intervals ------------------------------------------------

    def _exp_iv(self, n: int, idx: int, bits: int) -> DyadicInterval:
        # idx < d: e^{n w_idx}; idx == d: e^{-n}
        key = (n, idx)
        iv = self._exp_cache.get(key)
        if iv is None or iv.bits < bits:
            if idx < self.w.d:
                exponent = Fraction(n) * self.w.entries[idx]
            else:
                exponent = Fraction(-n)
            iv = DyadicInterval.from_number(exponent, bits).exp()
            self._exp_cache[key] = iv
        return iv

    def q_in_window(self, q: int, n: int) -> bool:
        """Certified e^n < q <= e^{n+1} (decidable: e^n is irrational for n>=1)."""
        if q < 1:
            raise ValueError("q must be positive")
        return self._cmp_q_exp(q, n) == GT and self._cmp_q_exp(q, n + 1) != GT

    def window_of_q(self, q: int) -> int:
        if q <= 1:
            raise ValueError("window_of_q needs q >= 2")
        n = int(math.floor(log2_int(q) * _LN2))
        for cand in (n - 1, n, n + 1):
            if cand >= 0 and self.q_in_window(q, cand):
                return cand
        raise AssertionError("window_of_q failed to localize")

    @staticmethod
    def _cmp_q_exp(q: int, n: int) -> int:
        """sign(q - e^n), exact (never zero for n >= 1)."""
        if n == 0:
            return LT if q < 1 else (0 if q == 1 else GT)
        bits = max(64, q.bit_length() + 32)
        while True:
            iv = DyadicInterval.from_number(n, bits).exp()
            c = iv.cmp_number(q)
            if c is not None:
                return -c
            bits *= 2
            if bits > 1 << 22:
                raise PrecisionExhausted("cannot separate q from e^n")

    # -- window advance ----------------------------------------------------

    def _interval_basis(self, n: int, bits: int) -> list[list[DyadicInterval]]:
        den = self.theta.den
        cols = []
        for j in range(self.N):
            col = []
            for i in range(self.N):
                v = self._V[j][i]
                iv = _ratio_interval(v, den, bits)
                col.append(iv.mul(self._exp_iv(n, i, bits), bits=bits))
            cols.append(col)
        return cols

    def _advance(self, n: int) -> list[list[DyadicInterval]]:
        bits = self.bits
        ceiling = bits_ceiling()
        while True:
            cols = self._interval_basis(n, bits)
            mids = [[gmpy2.mpfr(0.5) * (e.lo + e.hi) for e in col] for col in cols]
            U2 = _lll_transform(mids)
            if not _is_identity(U2):
                self._U = _mat_mul_int(self._U, U2)
                self._V = _mat_mul_int(self._V, U2)
                cols = self._interval_basis(n, bits)
                mids = [[gmpy2.mpfr(0.5) * (e.lo + e.hi) for e in col] for col in cols]
            self._cols = cols
            self._J = _approx_inverse(mids)
            probe = _cover_bounds(cols, self._J, [1.0] * self.N, bits)
            if probe is not None:
                self._window = n
                self._bits_used = bits
                return cols
            if bits >= ceiling:
                raise PrecisionExhausted(
                    f"window {n} cover not certifiable at {bits} bits",
                    needed_bits=2 * bits,
                    ceiling=ceiling,
                )
            bits = min(2 * bits, ceiling)

    def candidates(
        self,
        n: int,
        horiz_limits: Sequence[float],
        v_limit: float,
    ) -> list[tuple[tuple[int, ...], int]]:
        """Integer vectors (p, q), q >= 0 normalized, covering the box
        {|y_i| <= horiz_limits[i], |y_last| <= v_limit} in a_n-coordinates."""
        if len(horiz_limits) != self.w.d:
            raise ConfigError("need one horizontal limit per coordinate")
        cols = self._advance(n)
        limits = [max(h, 0.0) for h in horiz_limits] + [v_limit]
        bounds = _cover_bounds(cols, self._J, limits, self._bits_used)
        if bounds is None:
            raise PrecisionExhausted(f"box cover failed in window {n}")
        seen = set()
        out = []
        for c in _coeff_box(bounds, self.budget):
            vec = _mat_vec_int(self._U, c)
            q = vec[-1]
            if q < 0 or (q == 0 and _first_nonzero_negative(vec)):
                vec = [-x for x in vec]
                q = vec[-1]
            key = tuple(vec)
            if key in seen:
                continue
            seen.add(key)
            out.append((tuple(vec[:-1]), q))
        return out


def _ratio_interval(num: int, den: int, bits: int) -> DyadicInterval:
    """Correctly rounded num/den without rational normalization (no gcd)."""
    dn, up = _down(bits), _up(bits)
    if num >= 0:
        lo = dn.div(to_mpfr_down(num, bits), to_mpfr_up(den, bits))
        hi = up.div(to_mpfr_up(num, bits), to_mpfr_down(den, bits))
    else:
        lo = dn.div(to_mpfr_down(num, bits), to_mpfr_down(den, bits))
        hi = up.div(to_mpfr_up(num, bits), to_mpfr_up(den, bits))
    return DyadicInterval(lo, hi)


def _is_identity(U: Sequence[Sequence[int]]) -> bool:
    for j, col in enumerate(U):
        for i, x in enumerate(col):
            if x != (1 if i == j else 0):
                return False
    return True


def _first_nonzero_negative(vec: Sequence[int]) -> bool:
    for x in vec:
        if x != 0:
            return x < 0
    return False
