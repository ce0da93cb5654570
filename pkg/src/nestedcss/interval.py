"""Outward-rounded interval arithmetic on IEEE doubles.

Python exposes no rounding-mode control.  Sums and products are computed in
round-to-nearest and checked with error-free transforms (TwoSum, Dekker's
TwoProduct); an inexact result is stepped one ulp outward with
``math.nextafter``, an exact one is kept.  Library ``log``/``log2``/``exp``
(glibc, documented below one ulp) are widened by one ulp unless the result is
known exact (log of 1, log2 of a power of two, exp of 0).

``ienclose`` maps a registered function id and a box to an enclosure of the
function's range on the box.
"""

from __future__ import annotations

import decimal
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Sequence

INF = math.inf
_SPLIT = 134217729.0  # 2^27 + 1
_BIG = 2.0**996
_TINY = 2.0**-960


class UnknownFunction(KeyError):
    pass


class DomainViolation(ValueError):
    pass


def down(x: float) -> float:
    return math.nextafter(x, -INF)


def up(x: float) -> float:
    return math.nextafter(x, INF)


def _two_sum_err(a: float, b: float, s: float) -> float:
    bp = s - a
    ap = s - bp
    return (a - ap) + (b - bp)


def add_dn(a: float, b: float) -> float:
    s = a + b
    if not math.isfinite(s):
        return s if s == -INF or (a == INF or b == INF) else 1.7976931348623157e308
    e = _two_sum_err(a, b, s)
    return down(s) if e < 0 else s


def add_up(a: float, b: float) -> float:
    s = a + b
    if not math.isfinite(s):
        return s if s == INF or (a == -INF or b == -INF) else -1.7976931348623157e308
    e = _two_sum_err(a, b, s)
    return up(s) if e > 0 else s


def sub_dn(a: float, b: float) -> float:
    return add_dn(a, -b)


def sub_up(a: float, b: float) -> float:
    return add_up(a, -b)


def _split(a: float) -> tuple[float, float]:
    c = _SPLIT * a
    hi = c - (c - a)
    return hi, a - hi


def _prod_err(a: float, b: float, p: float) -> float | None:
    """Exact p - a*b residual sign source; None when the transform is not safe."""
    if a == 0.0 or b == 0.0:
        return 0.0
    if not math.isfinite(p) or abs(a) > _BIG or abs(b) > _BIG or abs(p) < _TINY:
        return None
    ah, al = _split(a)
    bh, bl = _split(b)
    return ((ah * bh - p) + ah * bl + al * bh) + al * bl


def mul_dn(a: float, b: float) -> float:
    p = a * b
    e = _prod_err(a, b, p)
    if e is None:
        return down(p) if math.isfinite(p) or p == INF else p
    return down(p) if e < 0 else p


def mul_up(a: float, b: float) -> float:
    p = a * b
    e = _prod_err(a, b, p)
    if e is None:
        return up(p) if math.isfinite(p) or p == -INF else p
    return up(p) if e > 0 else p


def _div_resid(a: float, b: float, q: float) -> float | None:
    """Sign carrier of a/b - q (same sign as (a - q*b)/b); None if unsafe."""
    if a == 0.0:
        return 0.0
    if not math.isfinite(q) or abs(q) < _TINY or abs(q) > _BIG or abs(b) > _BIG or abs(a) < _TINY:
        return None
    p = q * b
    e = _prod_err(q, b, p)
    if e is None:
        return None
    r = (a - p) - e
    return r / b if r != 0 else 0.0


def div_dn(a: float, b: float) -> float:
    q = a / b
    r = _div_resid(a, b, q)
    if r is None:
        return down(q)
    return down(q) if r < 0 else q


def div_up(a: float, b: float) -> float:
    q = a / b
    r = _div_resid(a, b, q)
    if r is None:
        return up(q)
    return up(q) if r > 0 else q


def _is_pow2(x: float) -> bool:
    return x > 0 and math.frexp(x)[0] == 0.5


def log2_dn(x: float) -> float:
    if x <= 0:
        return -INF
    if x == INF:
        return INF
    v = math.log2(x)
    return v if _is_pow2(x) else down(v)


def log2_up(x: float) -> float:
    if x <= 0:
        return -INF
    if x == INF:
        return INF
    v = math.log2(x)
    return v if _is_pow2(x) else up(v)


def log_dn(x: float) -> float:
    if x <= 0:
        return -INF
    v = math.log(x)
    return v if x == 1.0 else down(v)


def log_up(x: float) -> float:
    if x <= 0:
        return -INF
    v = math.log(x)
    return v if x == 1.0 else up(v)


def exp_dn(x: float) -> float:
    if x == 0.0:
        return 1.0
    return max(0.0, down(math.exp(x)))


def exp_up(x: float) -> float:
    if x == 0.0:
        return 1.0
    return up(math.exp(x))


def pow_dn(x: float, n: int) -> float:
    """Lower bound of x**n for x >= 0."""
    r, b = 1.0, x
    while n:
        if n & 1:
            r = mul_dn(r, b)
        n >>= 1
        if n:
            b = mul_dn(b, b)
    return r


def pow_up(x: float, n: int) -> float:
    r, b = 1.0, x
    while n:
        if n & 1:
            r = mul_up(r, b)
        n >>= 1
        if n:
            b = mul_up(b, b)
    return r


def frac_dn(q: Fraction) -> float:
    f = float(q)
    return f if Fraction(f) <= q else down(f)


def frac_up(q: Fraction) -> float:
    f = float(q)
    return f if Fraction(f) >= q else up(f)


# ln 2 and 1/ln 2 bounds
LN2_DN = down(math.log(2.0))
LN2_UP = up(math.log(2.0))
INV_LN2_DN = div_dn(1.0, LN2_UP)
INV_LN2_UP = div_up(1.0, LN2_DN)


@dataclass(frozen=True, slots=True)
class Interval:
    lo: float
    hi: float

    def __post_init__(self) -> None:
        if math.isnan(self.lo) or math.isnan(self.hi):
            raise DomainViolation("NaN endpoint")
        if self.lo > self.hi:
            raise DomainViolation(f"empty interval [{self.lo}, {self.hi}]")

    @classmethod
    def point(cls, x: float) -> "Interval":
        return cls(x, x)

    @classmethod
    def of(cls, x) -> "Interval":
        if isinstance(x, Interval):
            return x
        if isinstance(x, Fraction):
            return cls(frac_dn(x), frac_up(x))
        if isinstance(x, int) and abs(x) > 2**53:
            q = Fraction(x)
            return cls(frac_dn(q), frac_up(q))
        return cls(float(x), float(x))

    @classmethod
    def ratio(cls, p: int, q: int) -> "Interval":
        return cls.of(Fraction(p, q))

    @property
    def width(self) -> float:
        return self.hi - self.lo

    @property
    def mid(self) -> float:
        return 0.5 * (self.lo + self.hi)

    def contains(self, x: float) -> bool:
        return self.lo <= x <= self.hi

    def __add__(self, o) -> "Interval":
        o = Interval.of(o)
        return Interval(add_dn(self.lo, o.lo), add_up(self.hi, o.hi))

    __radd__ = __add__

    def __neg__(self) -> "Interval":
        return Interval(-self.hi, -self.lo)

    def __sub__(self, o) -> "Interval":
        o = Interval.of(o)
        return Interval(sub_dn(self.lo, o.hi), sub_up(self.hi, o.lo))

    def __rsub__(self, o) -> "Interval":
        return Interval.of(o) - self

    def __mul__(self, o) -> "Interval":
        o = Interval.of(o)
        if self.lo >= 0 and o.lo >= 0:
            return Interval(mul_dn(self.lo, o.lo), mul_up(self.hi, o.hi))
        pairs = [(self.lo, o.lo), (self.lo, o.hi), (self.hi, o.lo), (self.hi, o.hi)]
        return Interval(min(mul_dn(a, b) for a, b in pairs), max(mul_up(a, b) for a, b in pairs))

    __rmul__ = __mul__

    def __truediv__(self, o) -> "Interval":
        o = Interval.of(o)
        if o.lo <= 0 <= o.hi:
            raise DomainViolation("division by an interval containing 0")
        pairs = [(self.lo, o.lo), (self.lo, o.hi), (self.hi, o.lo), (self.hi, o.hi)]
        return Interval(min(div_dn(a, b) for a, b in pairs), max(div_up(a, b) for a, b in pairs))

    def __rtruediv__(self, o) -> "Interval":
        return Interval.of(o) / self

    def __pow__(self, n: int) -> "Interval":
        if not isinstance(n, int) or n < 0:
            raise DomainViolation("only nonnegative integer powers")
        if n == 0:
            return Interval(1.0, 1.0)
        if self.lo >= 0:
            return Interval(pow_dn(self.lo, n), pow_up(self.hi, n))
        if self.hi <= 0:
            r = Interval(pow_dn(-self.hi, n), pow_up(-self.lo, n))
            return r if n % 2 == 0 else -r
        m = max(-self.lo, self.hi)
        if n % 2 == 0:
            return Interval(0.0, pow_up(m, n))
        return Interval(-pow_up(-self.lo, n), pow_up(self.hi, n))

    def hull(self, o: "Interval") -> "Interval":
        return Interval(min(self.lo, o.lo), max(self.hi, o.hi))

    def clamp(self, lo: float, hi: float) -> "Interval":
        return Interval(max(lo, min(self.lo, hi)), min(hi, max(self.hi, lo)))


def ilog2(x: Interval) -> Interval:
    if x.hi < 0:
        raise DomainViolation("log2 of a negative interval")
    return Interval(log2_dn(x.lo), log2_up(x.hi))


def ilog(x: Interval) -> Interval:
    if x.hi < 0:
        raise DomainViolation("log of a negative interval")
    return Interval(log_dn(x.lo), log_up(x.hi))


def iexp(x: Interval) -> Interval:
    return Interval(exp_dn(x.lo), exp_up(x.hi))


def _xlog2x_bounds(p: float) -> tuple[float, float]:
    """Bounds for p * log2(p), p in [0, 1], with 0 log 0 = 0."""
    if p <= 0.0:
        return 0.0, 0.0
    l_lo, l_hi = log2_dn(p), log2_up(p)
    # p >= 0 and log2 p <= 0: product bounds
    return mul_dn(p, l_lo), mul_up(p, l_hi)


def h2_point(p: float) -> Interval:
    """Enclosure of h2 at a float p in [0, 1]."""
    if not (0.0 <= p <= 1.0):
        raise DomainViolation(f"h2 argument {p} outside [0, 1]")
    q_lo, q_hi = sub_dn(1.0, p), sub_up(1.0, p)
    a_lo, a_hi = _xlog2x_bounds(p)
    if q_lo == q_hi:
        b_lo, b_hi = _xlog2x_bounds(q_lo)
    else:
        # x log2 x is decreasing on [0, 1/e] and increasing after; take both ends
        c1, c2 = _xlog2x_bounds(q_lo), _xlog2x_bounds(q_hi)
        b_lo, b_hi = min(c1[0], c2[0]), max(c1[1], c2[1])
        if q_lo <= 1 / math.e <= q_hi:
            b_lo = min(b_lo, -0.5307378455)  # min of x log2 x is -1/(e ln 2) = -0.53073784542...
    lo = -add_up(a_hi, b_hi)
    hi = -add_dn(a_lo, b_lo)
    return Interval(max(0.0, lo), min(1.0, hi))


_DEC = decimal.Context(prec=40)
_DEC_LN2 = _DEC.ln(decimal.Decimal(2))
_DEC_EXACT = decimal.Context(prec=1200)  # 1 - p is exact for any double p in (0, 1)


def h2_tight(p: float) -> Interval:
    """Two-ulp enclosure of h2 at a float p, via 40-digit decimal logs.

    The decimal error (~1e-38 relative) is far below half an ulp, so one ulp
    either side of the correctly rounded double is a rigorous enclosure.  About
    30x slower than ``h2_point``; used for degenerate boxes only.
    """
    if not (0.0 <= p <= 1.0):
        raise DomainViolation(f"h2 argument {p} outside [0, 1]")
    if p in (0.0, 1.0):
        return Interval(0.0, 0.0)
    if p == 0.5:
        return Interval(1.0, 1.0)
    P = decimal.Decimal(p)
    Q = _DEC_EXACT.subtract(1, P)
    s = _DEC.add(_DEC.multiply(P, _DEC.ln(P)), _DEC.multiply(Q, _DEC.ln(Q)))
    v = float(_DEC.divide(-s, _DEC_LN2))
    return Interval(max(0.0, down(v)), min(1.0, up(v)))


def ih2(x: Interval) -> Interval:
    """Range of h2 over x in [0, 1]: increasing on [0, 1/2], decreasing on [1/2, 1]."""
    if x.lo < 0 or x.hi > 1:
        raise DomainViolation("h2 argument outside [0, 1]")
    if x.lo == x.hi:
        return h2_tight(x.lo)
    if x.hi <= 0.5:
        return Interval(h2_point(x.lo).lo, h2_point(x.hi).hi)
    if x.lo >= 0.5:
        return Interval(h2_point(x.hi).lo, h2_point(x.lo).hi)
    lo = min(h2_point(x.lo).lo, h2_point(x.hi).lo)
    return Interval(lo, 1.0)


def h2_up(p: float) -> float:
    return h2_point(p).hi


def h2_dn(p: float) -> float:
    return h2_point(p).lo


def kl_point(p: float, q: Interval) -> Interval:
    """D(p || q) in bits for a float p in [0, 1] and q a (narrow) interval inside (0, 1)."""
    if q.lo <= 0 or q.hi >= 1:
        raise DomainViolation("kl second argument must lie in (0, 1)")
    P = Interval.point(p)
    out = Interval(0.0, 0.0)
    if p > 0:
        out = out + P * ilog2(P / q)
    if p < 1:
        P1 = 1.0 - P
        out = out + P1 * ilog2(P1 / (1.0 - q))
    return out


def ikl(p: float, q: Interval) -> Interval:
    """Range of D(p || q) over q: convex in q, minimum 0 at q = p."""
    a = kl_point(p, Interval.point(q.lo))
    b = kl_point(p, Interval.point(q.hi))
    if q.hi <= p:
        return Interval(b.lo, a.hi)
    if q.lo >= p:
        return Interval(a.lo, b.hi)
    return Interval(0.0, max(a.hi, b.hi))


# function registry

Box = Sequence[Interval]


@dataclass(frozen=True)
class EncloseResult:
    value: Interval
    method: str


_REGISTRY: dict[str, Callable] = {}


def register(name: str):
    def deco(fn):
        _REGISTRY[name] = fn
        return fn

    return deco


def registered() -> list[str]:
    return sorted(_REGISTRY)


def ienclose(fn_id: str, box: Box, params: dict | None = None) -> Interval:
    try:
        fn = _REGISTRY[fn_id]
    except KeyError:
        raise UnknownFunction(fn_id) from None
    return fn(list(box), params or {})


@register("h2")
def _enc_h2(box, params):
    return ih2(box[0])


@register("kl")
def _enc_kl(box, params):
    return ikl(params["p"], box[0])


@register("square_minus_one")
def _enc_sq(box, params):
    return box[0] ** 2 - 1.0
