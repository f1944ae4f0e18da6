"""Certified rational enclosures of real quantities.

Everything downstream that multiplies, exponentiates or compares bound
values goes through this module, so the contract is strict: every
function returns an interval ``[lo, hi]`` of exact ``Fraction`` endpoints
that provably contains the true real value.  Arithmetic on enclosures is
exact (Fractions never round); only the transcendental leaves (log, exp,
non-exact roots) introduce width, and they do so with directed rounding
on scaled integers.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Union

Rat = Union[Fraction, int]


class PrecisionError(ArithmeticError):
    """Raised when a certified computation cannot reach the requested width."""


def iroot(n: int, k: int) -> int:
    """Floor of the k-th root of a nonnegative integer."""
    if n < 0:
        raise ValueError("iroot of negative integer")
    if k < 1:
        raise ValueError("iroot order must be >= 1")
    if n < 2 or k == 1:
        return n
    if k == 2:
        return math.isqrt(n)
    # Newton iteration from a bit-length seed; converges from above.
    x = 1 << ((n.bit_length() - 1) // k + 1)
    while True:
        t = ((k - 1) * x + n // x ** (k - 1)) // k
        if t >= x:
            break
        x = t
    while x ** k > n:
        x -= 1
    while (x + 1) ** k <= n:
        x += 1
    return x


@dataclass(frozen=True)
class Enclosure:
    """Closed interval [lo, hi] with exact rational endpoints."""

    lo: Fraction
    hi: Fraction

    def __post_init__(self):
        if self.lo > self.hi:
            raise ValueError(f"inverted enclosure [{self.lo}, {self.hi}]")

    @staticmethod
    def point(v: Rat) -> "Enclosure":
        v = Fraction(v)
        return Enclosure(v, v)

    @property
    def width(self) -> Fraction:
        return self.hi - self.lo

    @property
    def is_point(self) -> bool:
        return self.lo == self.hi

    def midpoint(self) -> Fraction:
        return (self.lo + self.hi) / 2

    def __add__(self, other: "Enclosure") -> "Enclosure":
        return Enclosure(self.lo + other.lo, self.hi + other.hi)

    def __sub__(self, other: "Enclosure") -> "Enclosure":
        return Enclosure(self.lo - other.hi, self.hi - other.lo)

    def __neg__(self) -> "Enclosure":
        return Enclosure(-self.hi, -self.lo)

    def __mul__(self, other: "Enclosure") -> "Enclosure":
        ps = (self.lo * other.lo, self.lo * other.hi,
              self.hi * other.lo, self.hi * other.hi)
        return Enclosure(min(ps), max(ps))

    def scale(self, c: Rat) -> "Enclosure":
        c = Fraction(c)
        if c >= 0:
            return Enclosure(self.lo * c, self.hi * c)
        return Enclosure(self.hi * c, self.lo * c)

    def shift(self, c: Rat) -> "Enclosure":
        c = Fraction(c)
        return Enclosure(self.lo + c, self.hi + c)

    def pow_int(self, k: int) -> "Enclosure":
        if k < 0:
            return self.pow_int(-k).reciprocal()
        if k == 0:
            return Enclosure.point(1)
        if self.lo >= 0:
            return Enclosure(self.lo ** k, self.hi ** k)
        if self.hi <= 0:
            lo, hi = self.lo ** k, self.hi ** k
            return Enclosure(min(lo, hi), max(lo, hi))
        if k % 2 == 0:
            return Enclosure(Fraction(0), max(self.lo ** k, self.hi ** k))
        return Enclosure(self.lo ** k, self.hi ** k)

    def reciprocal(self) -> "Enclosure":
        if self.lo <= 0 <= self.hi:
            raise ZeroDivisionError("reciprocal of enclosure containing 0")
        return Enclosure(1 / self.hi, 1 / self.lo)

    def hull(self, other: "Enclosure") -> "Enclosure":
        return Enclosure(min(self.lo, other.lo), max(self.hi, other.hi))

    def contains(self, v: Rat) -> bool:
        return self.lo <= v <= self.hi

    def contains_zero(self) -> bool:
        return self.lo <= 0 <= self.hi

    def sign(self) -> int:
        """Certified sign: +1/-1 when the interval excludes 0, 0 when it IS 0."""
        if self.lo > 0:
            return 1
        if self.hi < 0:
            return -1
        if self.lo == self.hi == 0:
            return 0
        raise PrecisionError("sign of enclosure straddling zero")

    def rounded(self, bits: int) -> "Enclosure":
        """Outward-round endpoints to denominators 2**bits (bounds growth)."""
        s = 1 << bits
        lo = Fraction(math.floor(self.lo * s), s)
        hi = Fraction(math.ceil(self.hi * s), s)
        return Enclosure(lo, hi)

    def rounded_rel(self, bits: int) -> "Enclosure":
        """Outward-round keeping ~bits of precision relative to magnitude."""
        m = max(abs(self.lo), abs(self.hi))
        if m == 0:
            return self
        e = m.numerator.bit_length() - m.denominator.bit_length()
        return self.rounded(bits + max(0, -e) + 1)

    def __repr__(self) -> str:
        return f"Enclosure({self.lo}, {self.hi})"


def _atanh_small(num: int, den: int, bits: int) -> tuple[Fraction, Fraction]:
    """Bounds on atanh(num/den) for 0 <= num/den <= 1/3, by series.

    Works in fixed point at scale 2**W so the term sizes stay flat even
    when num/den has huge numerators.
    """
    if num == 0:
        return Fraction(0), Fraction(0)
    w = bits + 16
    scale = 1 << w
    zlo = (num << w) // den
    zhi = -((-(num << w)) // den)  # ceil
    z2lo, z2hi = (zlo * zlo) >> w, ((zhi * zhi) >> w) + 1
    plo, phi = zlo, zhi
    slo, shi = 0, 0
    j = 0
    while True:
        d = 2 * j + 1
        slo += plo // d
        shi += phi // d + 1
        # advance power by z^2 with directed rounding
        plo = (plo * z2lo) >> w
        phi = ((phi * z2hi) >> w) + 1
        j += 1
        if phi < d + 2:
            # geometric tail: sum_{i>=j} z^{2i+1}/(2i+1) <= p_hi / (1 - z^2)
            tail = (phi * scale) // (scale - z2hi) + 1
            shi += tail
            break
        if j > 8 * w:
            raise PrecisionError("atanh series failed to converge")
    return Fraction(slo, scale), Fraction(shi, scale)


@lru_cache(maxsize=None)
def log2_bounds(bits: int) -> Enclosure:
    """Certified enclosure of log 2 with width < 2**-bits."""
    lo, hi = _atanh_small(1, 3, bits + 4)
    return Enclosure(2 * lo, 2 * hi)


def log_bounds(x: Rat, bits: int) -> Enclosure:
    """Certified enclosure of the natural log of a positive rational."""
    x = Fraction(x)
    if x.numerator.bit_length() + x.denominator.bit_length() <= 512:
        return _log_bounds_small(x, bits)
    return _log_bounds_impl(x, bits)


@lru_cache(maxsize=8192)
def _log_bounds_small(x: Fraction, bits: int) -> Enclosure:
    return _log_bounds_impl(x, bits)


def _log_bounds_impl(x: Fraction, bits: int) -> Enclosure:
    if x <= 0:
        raise ValueError("log of nonpositive value")
    if x == 1:
        return Enclosure.point(0)
    if x < 1:
        return -log_bounds(1 / x, bits)
    num, den = x.numerator, x.denominator
    # x = m * 2**e with m in [1, 2)
    e = num.bit_length() - den.bit_length()
    if e >= 0:
        mn, md = num, den << e
    else:
        mn, md = num << (-e), den
    if mn < md:
        mn <<= 1
        e -= 1
    # ln m = 2 atanh((m-1)/(m+1)), argument in [0, 1/3)
    lo, hi = _atanh_small(mn - md, mn + md, bits + 6)
    lnm = Enclosure(2 * lo, 2 * hi)
    if e == 0:
        return lnm
    return lnm + log2_bounds(bits + 6 + e.bit_length()).scale(e)


def _fix_pow(base: int, m: int, w: int, up: bool) -> int:
    """Directed bound on (base/2^w)^m, scaled by 2^w (base >= 0, m >= 1)."""
    result = 1 << w
    b = base
    mm = m
    while mm:
        if mm & 1:
            p = result * b
            result = -((-p) >> w) if up else p >> w
        mm >>= 1
        if mm:
            p = b * b
            b = -((-p) >> w) if up else p >> w
    return result


def _exp_unit(num: int, den: int, bits: int) -> tuple[Fraction, Fraction]:
    """Bounds on exp(num/den) for |num/den| <= 1, fixed-point series."""
    w = bits + 16
    scale = 1 << w
    tlo = (num << w) // den
    thi = -((-(num << w)) // den)
    plo, phi = scale, scale  # t^0
    slo, shi = 0, 0
    j = 0
    fact = 1
    while True:
        slo += plo // fact
        shi += -((-phi) // fact)
        j += 1
        fact *= j
        nlo = min(plo * tlo, plo * thi, phi * tlo, phi * thi) >> w
        nhi = (max(plo * tlo, plo * thi, phi * tlo, phi * thi) >> w) + 1
        plo, phi = nlo, nhi
        if max(abs(plo), abs(phi)) < fact and fact > scale:
            # remaining |sum_{i>=j} t^i/i!| < 2 scaled units at this cutoff
            slo -= 3
            shi += 3
            break
        if j > 4 * w:
            raise PrecisionError("exp series failed to converge")
    return Fraction(slo, scale), Fraction(shi, scale)


def exp_bounds(x: Rat, bits: int) -> Enclosure:
    """Certified enclosure of exp(x) for rational x.

    Width is relative: at most ~2**-bits of the magnitude of the result.
    """
    x = Fraction(x)
    if x == 0:
        return Enclosure.point(1)
    neg = x < 0
    ax = -x if neg else x
    m = int(math.ceil(ax))
    mbits = bits + 2 * m.bit_length() + 8
    lo, hi = _exp_unit(ax.numerator, ax.denominator * m, mbits)
    if lo <= 0:
        raise PrecisionError("exp series underflow")
    if m > 1:
        w = mbits + 16  # matches the _exp_unit scale
        s = 1 << w
        llo = Fraction(_fix_pow(lo.numerator * s // lo.denominator, m, w, False), s)
        lhi = Fraction(_fix_pow(-((-hi.numerator * s) // hi.denominator),
                                m, w, True), s)
        enc = Enclosure(llo, lhi)
    else:
        enc = Enclosure(lo, hi)
    if neg:
        enc = enc.reciprocal()
    return enc.rounded_rel(bits + 8)


def sqrt_bounds(x: Rat, bits: int) -> Enclosure:
    return root_bounds(x, 2, bits)


def root_bounds(x: Rat, k: int, bits: int) -> Enclosure:
    """Certified enclosure of x**(1/k) for x >= 0, exact when possible."""
    x = Fraction(x)
    if x < 0:
        raise ValueError("root of negative value")
    if x == 0:
        return Enclosure.point(0)
    num, den = x.numerator, x.denominator
    rn, rd = iroot(num, k), iroot(den, k)
    if rn ** k == num and rd ** k == den:
        return Enclosure.point(Fraction(rn, rd))
    s = bits + 4
    t = (num << (k * s)) // den
    lo = Fraction(iroot(t, k), 1 << s)
    t2 = ((num << (k * s)) + den - 1) // den
    hi = Fraction(iroot(t2, k) + 1, 1 << s)
    return Enclosure(lo, hi)


# Direct integer-power computations stay exact below this many result bits;
# beyond it pow_bounds switches to the exp/log route.
_POW_EXACT_BIT_LIMIT = 1 << 14


def pow_bounds(base: Rat, exponent: Rat, bits: int) -> Enclosure:
    """Certified enclosure of base**exponent for base > 0, rational exponent."""
    base = Fraction(base)
    exponent = Fraction(exponent)
    if base <= 0:
        raise ValueError("pow_bounds requires a positive base")
    if exponent == 0 or base == 1:
        return Enclosure.point(1)
    p, q = exponent.numerator, exponent.denominator
    est_bits = abs(p) * max(base.numerator.bit_length(),
                            base.denominator.bit_length())
    if q == 1 and est_bits <= _POW_EXACT_BIT_LIMIT:
        return Enclosure.point(base ** p)
    if est_bits <= _POW_EXACT_BIT_LIMIT and q <= 64:
        powed = base ** abs(p)
        enc = root_bounds(powed, q, bits + 4)
        if p < 0:
            enc = enc.reciprocal()
        return enc
    lg = log_bounds(base, bits + exponent_guard(exponent))
    arg = lg.scale(exponent)
    return Enclosure(exp_bounds(arg.lo, bits + 8).lo,
                     exp_bounds(arg.hi, bits + 8).hi)


def exponent_guard(exponent: Fraction) -> int:
    return abs(exponent.numerator).bit_length() + 16


def pow_upper(base: Rat, exponent: Rat, bits: int = 64) -> Fraction:
    return pow_bounds(base, exponent, bits).hi


def pow_lower(base: Rat, exponent: Rat, bits: int = 64) -> Fraction:
    return pow_bounds(base, exponent, bits).lo


def exp_sqrt_log_bounds(c: Rat, h: Rat, bits: int = 64) -> Enclosure:
    """Certified enclosure of exp(c * sqrt(log h)) for h > 1."""
    lg = log_bounds(h, bits + 8)
    if lg.lo < 0:
        raise ValueError("exp_sqrt_log_bounds requires h > 1")
    rt = Enclosure(sqrt_bounds(lg.lo, bits + 8).lo,
                   sqrt_bounds(lg.hi, bits + 8).hi).scale(c)
    return Enclosure(exp_bounds(rt.lo, bits + 8).lo,
                     exp_bounds(rt.hi, bits + 8).hi)


def format_decimal(x: Rat, places: int, direction: str = "up") -> str:
    """Exact decimal rendering with directed rounding ('up', 'down', 'nearest')."""
    x = Fraction(x)
    s = 10 ** places
    scaled = x * s
    if direction == "up":
        n = math.ceil(scaled)
    elif direction == "down":
        n = math.floor(scaled)
    elif direction == "nearest":
        n = math.floor(scaled + Fraction(1, 2))
    else:
        raise ValueError(f"unknown rounding direction {direction!r}")
    sign = "-" if n < 0 else ""
    n = abs(n)
    whole, frac = divmod(n, s)
    if places == 0:
        return f"{sign}{whole}"
    return f"{sign}{whole}.{frac:0{places}d}"


def parse_number(text: str) -> Fraction:
    """Parse 'p/q', integer, or decimal text into an exact Fraction."""
    text = text.strip()
    if "/" in text:
        num, den = text.split("/", 1)
        return Fraction(int(num), int(den))
    return Fraction(text)
