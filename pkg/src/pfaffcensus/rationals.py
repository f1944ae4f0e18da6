"""Exact rationals, heights, and height-bounded enumeration.

The height of a reduced fraction a/b (b >= 1) is max(|a|, b); the height
of a point is the max over its coordinates.  This is the affine height,
not the projective one.  ``fractions.Fraction`` already guarantees the
reduced-form invariants (gcd 1, positive denominator, 0 == 0/1), so it
is the rational type throughout the package.
"""

from __future__ import annotations

import math
from bisect import bisect_left, bisect_right
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Iterator


def height(q: Fraction) -> int:
    """max(|numerator|, denominator) of a reduced rational; always >= 1."""
    return max(abs(q.numerator), q.denominator)


@dataclass(frozen=True, order=True)
class RationalPoint:
    x: Fraction
    y: Fraction

    def height(self) -> int:
        return max(height(self.x), height(self.y))


def point_height(p: RationalPoint) -> int:
    return p.height()


def check_height_bound(H: int) -> int:
    if not isinstance(H, int) or H < 1:
        raise ValueError(f"height bound must be an integer >= 1, got {H!r}")
    return H


def iter_rationals(H: int) -> Iterator[Fraction]:
    """All reduced a/b with max(|a|, b) <= H, unordered (denominator sweep)."""
    check_height_bound(H)
    yield Fraction(0)
    for b in range(1, H + 1):
        for a in range(1, H + 1):
            if math.gcd(a, b) == 1:
                yield Fraction(a, b)
                yield Fraction(-a, b)


@lru_cache(maxsize=32)
def enumerate_rationals(H: int) -> tuple[Fraction, ...]:
    """All rationals of height <= H in strictly increasing order."""
    return tuple(sorted(iter_rationals(H)))


def count_rationals(H: int) -> int:
    """|{q : height(q) <= H}| without enumerating (totient sieve)."""
    check_height_bound(H)
    phi = list(range(H + 1))
    for p in range(2, H + 1):
        if phi[p] == p:  # p prime
            for m in range(p, H + 1, p):
                phi[m] -= phi[m] // p
    # pairs (a, b), 1 <= a, b <= H, gcd 1: 2*sum(phi) - 1; each gives +-a/b
    pairs = 2 * sum(phi[1:]) - 1
    return 1 + 2 * pairs


def _next_den_bounded(x: Fraction, n: int) -> Fraction:
    """Smallest fraction strictly greater than x with denominator <= n."""
    fl = x.numerator // x.denominator
    f = x - fl
    if f == 0:
        return fl + Fraction(1, n)
    # Stern-Brocot walk between L = 0/1 and R = 1/1 for the fractional part.
    ln_, ld, rn, rd = 0, 1, 1, 1
    fn, fd = f.numerator, f.denominator
    while True:
        mn, md = ln_ + rn, ld + rd
        if md > n:
            return fl + Fraction(rn, rd)
        if mn * fd <= fn * md:
            # mediant <= f: move L toward f along L + k*R
            # largest k with (ln + k rn) * fd <= fn * (ld + k rd)
            num = fn * ld - ln_ * fd
            den = rn * fd - fn * rd  # > 0 since R > f
            k = num // den if den > 0 else (n - ld) // rd
            k = max(1, min(k, (n - ld) // rd))
            ln_, ld = ln_ + k * rn, ld + k * rd
        else:
            # mediant > f: move R toward f along R + k*L, keeping R > f
            den = fn * ld - ln_ * fd  # f - L scaled; may be 0 when L == f
            if den == 0:
                k = (n - rd) // ld
            else:
                num = rn * fd - fn * rd
                k = (num - 1) // den  # largest k with R + kL still > f
                k = min(k, (n - rd) // ld)
            k = max(1, min(k, (n - rd) // ld))
            rn, rd = rn + k * ln_, rd + k * ld


def next_of_height(x: Fraction, H: int) -> Fraction | None:
    """Smallest rational of height <= H strictly greater than x, or None."""
    check_height_bound(H)
    if x >= H:
        return None
    cur = x
    while True:
        cur = _next_den_bounded(cur, H)
        if cur > H:
            return None
        if abs(cur.numerator) <= H:
            return cur


# Above this many expected Stern-Brocot steps fall back to filtering the
# cached full enumeration (wide-interval queries).
_WALK_BUDGET = 4096


def rationals_in_interval(lo: Fraction, hi: Fraction, H: int) -> list[Fraction]:
    """All rationals of height <= H in [lo, hi] (endpoints included).

    Irrational endpoints must be supplied as outward-rounded rational
    enclosures by the caller; the result may then over-include at the
    endpoints but never omits an interior rational.
    """
    check_height_bound(H)
    lo, hi = Fraction(lo), Fraction(hi)
    if lo > hi:
        return []
    lo = max(lo, Fraction(-H))
    hi = min(hi, Fraction(H))
    if lo > hi:
        return []
    if (hi - lo) * H * H > _WALK_BUDGET:
        every = enumerate_rationals(H)
        i = bisect_left(every, lo)
        j = bisect_right(every, hi)
        return list(every[i:j])
    out = []
    if height(lo) <= H:
        out.append(lo)
        cur = lo
    else:
        cur = next_of_height(lo, H)
        if cur is None or cur > hi:
            return out
        out.append(cur)
    while True:
        cur = next_of_height(cur, H)
        if cur is None or cur > hi:
            return out
        out.append(cur)


def simplest_between(lo: Fraction, hi: Fraction) -> Fraction:
    """The unique simplest rational strictly inside (lo, hi)."""
    if lo >= hi:
        raise ValueError("empty open interval")
    # integer strictly inside?
    n = lo.numerator // lo.denominator + 1
    if lo < n < hi:
        return Fraction(n)
    fl = lo.numerator // lo.denominator
    if lo == fl:
        # interval (fl, hi) with hi <= fl+1: simplest = fl + 1/ceil-ish
        inv = hi - fl
        k = inv.denominator // inv.numerator + 1
        return fl + Fraction(1, k)
    return fl + 1 / simplest_between(1 / (hi - fl), 1 / (lo - fl))


def format_rational(q: Fraction) -> str:
    """Serialize as 'p/q', with '/q' omitted when the denominator is 1."""
    if q.denominator == 1:
        return str(q.numerator)
    return f"{q.numerator}/{q.denominator}"


def parse_rational(text: str) -> Fraction:
    text = text.strip()
    if "/" in text:
        num, den = text.split("/", 1)
        q = Fraction(int(num), int(den))
    else:
        q = Fraction(int(text))
    return q


def format_point(p: RationalPoint) -> str:
    return f"{format_rational(p.x)},{format_rational(p.y)}"


def parse_point(text: str) -> RationalPoint:
    xs, ys = text.strip().split(",", 1)
    return RationalPoint(parse_rational(xs), parse_rational(ys))
