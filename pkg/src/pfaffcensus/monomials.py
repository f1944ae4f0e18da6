"""Monomial supports, their derived exponents, and plane curves.

A support is a finite set J of exponent pairs (h, k).  The derived
quantities are

    D = |J|                 R = sum of h+k over J
    s = max h               t = max k              S = D*(s + t)
    rho = 2R / (D(D-1))     sigma = 2S / (D(D-1))
    C   = (D! * D^R)^(2/(D(D-1))) + 1

C is irrational; we store a certified rational upper bound within 1e-6,
since every downstream use multiplies C into an upper bound and outward
rounding keeps those bounds valid.

Note on degree-d supports: `total_degree_set(d)` contains all pairs with
h + k <= d, so D = (d+1)(d+2)/2.  The shorthand d(d-1)/2 that sometimes
gets quoted for degree-d interpolation counts does NOT hold for this
support; rho = 8/(3(d+3)) and sigma = 3*rho do, exactly.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Mapping, Optional

from .enclosures import Enclosure, exp_bounds, log_bounds
from .rationals import RationalPoint, format_rational, parse_rational


def _canon(pairs) -> tuple[tuple[int, int], ...]:
    seen = set(map(tuple, pairs))
    for h, k in seen:
        if h < 0 or k < 0:
            raise ValueError(f"negative exponent pair ({h}, {k})")
    # graded lex: by total degree, then by k (so x before y within a degree)
    return tuple(sorted(seen, key=lambda hk: (hk[0] + hk[1], hk[1], hk[0])))


@dataclass(frozen=True)
class MonomialSet:
    """Finite exponent support with a canonical (graded-lex) order."""

    pairs: tuple[tuple[int, int], ...]

    @staticmethod
    def of(pairs) -> "MonomialSet":
        pairs = _canon(pairs)
        if not pairs:
            raise ValueError("monomial set must be nonempty")
        return MonomialSet(pairs)

    def __len__(self) -> int:
        return len(self.pairs)

    def __contains__(self, hk) -> bool:
        return tuple(hk) in set(self.pairs)

    def describe(self) -> str:
        return "{" + ",".join(f"x^{h}y^{k}" for h, k in self.pairs) + "}"


def box_set(beta: int, gamma: int) -> MonomialSet:
    """Full grid 0 <= h < beta, 0 <= k < gamma."""
    if beta < 2 or gamma < 2:
        raise ValueError(f"box_set requires beta, gamma >= 2, got ({beta}, {gamma})")
    return MonomialSet.of((h, k) for h in range(beta) for k in range(gamma))


def total_degree_set(d: int) -> MonomialSet:
    """All pairs with h + k <= d."""
    if d < 1:
        raise ValueError(f"total_degree_set requires d >= 1, got {d}")
    return MonomialSet.of((h, k) for h in range(d + 1) for k in range(d + 1 - h))


@dataclass(frozen=True)
class MonomialParameters:
    D: int
    R: int
    s: int
    t: int
    S: int
    rho: Optional[Fraction]
    sigma: Optional[Fraction]
    c_upper: Optional[Fraction]


@lru_cache(maxsize=None)
def _c_upper(D: int, R: int) -> Fraction:
    # C - 1 = exp((ln D! + R ln D) / (D(D-1)/2)); certified upper, gap < 1e-6
    bits = 40
    ln_fact = Enclosure.point(0)
    for k in range(2, D + 1):
        ln_fact = ln_fact + log_bounds(k, bits + 16)
    arg = (ln_fact + log_bounds(D, bits + 16).scale(R)).scale(
        Fraction(2, D * (D - 1)))
    enc = Enclosure(exp_bounds(arg.lo, bits).lo, exp_bounds(arg.hi, bits).hi)
    if enc.width >= Fraction(1, 2 * 10 ** 6):
        raise ArithmeticError("C enclosure too wide")
    return enc.rounded(28).hi + 1


@lru_cache(maxsize=None)
def parameters(M: MonomialSet) -> MonomialParameters:
    """Derived exponents for a support; rho/sigma/C need D >= 2."""
    D = len(M.pairs)
    R = sum(h + k for h, k in M.pairs)
    s = max(h for h, _ in M.pairs)
    t = max(k for _, k in M.pairs)
    S = D * (s + t)
    if D < 2:
        return MonomialParameters(D, R, s, t, S, None, None, None)
    denom = D * (D - 1)
    return MonomialParameters(
        D, R, s, t, S,
        rho=Fraction(2 * R, denom),
        sigma=Fraction(2 * S, denom),
        c_upper=_c_upper(D, R),
    )


@dataclass(frozen=True)
class PlaneCurve:
    """Bivariate polynomial with support constrained to a MonomialSet."""

    support: MonomialSet
    coeffs: tuple[Fraction, ...]  # aligned with support.pairs

    def __post_init__(self):
        if len(self.coeffs) != len(self.support.pairs):
            raise ValueError("coefficient list does not match support size")
        if all(c == 0 for c in self.coeffs):
            raise ValueError("curve must have a nonzero coefficient")

    @staticmethod
    def from_terms(terms: Mapping[tuple[int, int], Fraction],
                   support: MonomialSet | None = None) -> "PlaneCurve":
        nz = {hk: Fraction(c) for hk, c in terms.items() if c != 0}
        if support is None:
            support = MonomialSet.of(nz.keys())
        else:
            outside = set(nz) - set(support.pairs)
            if outside:
                raise ValueError(f"terms outside support: {sorted(outside)}")
        return PlaneCurve(support,
                          tuple(nz.get(hk, Fraction(0)) for hk in support.pairs))

    def terms(self) -> dict[tuple[int, int], Fraction]:
        return {hk: c for hk, c in zip(self.support.pairs, self.coeffs) if c != 0}

    def bidegree(self) -> tuple[int, int]:
        nz = self.terms()
        return (max(h for h, _ in nz), max(k for _, k in nz))

    def degree_in_y(self) -> int:
        return max(k for _, k in self.terms())

    def __str__(self) -> str:
        parts = []
        for (h, k), c in self.terms().items():
            mono = "".join((f"x^{h}" if h else "", f"y^{k}" if k else "")) or "1"
            parts.append(f"{format_rational(c)}*{mono}")
        return " + ".join(parts)


def evaluate_curve(G: PlaneCurve, P: RationalPoint) -> Fraction:
    """Exact value of G at a rational point."""
    total = Fraction(0)
    for (h, k), c in zip(G.support.pairs, G.coeffs):
        if c != 0:
            total += c * P.x ** h * P.y ** k
    return total


def monomial_row(M: MonomialSet, P: RationalPoint) -> tuple[Fraction, ...]:
    """The interpolation-matrix row (x^h y^k for (h,k) in J, canonical order)."""
    return tuple(P.x ** h * P.y ** k for h, k in M.pairs)


def curve_to_json(G: PlaneCurve) -> dict:
    return {
        "support": [[h, k] for h, k in G.support.pairs],
        "coeffs": [format_rational(c) for c in G.coeffs],
    }


def curve_from_json(obj: dict) -> PlaneCurve:
    support_pairs = [tuple(p) for p in obj["support"]]
    support = MonomialSet.of(support_pairs)
    raw = obj["coeffs"]
    if len(raw) != len(support_pairs):
        raise ValueError("coeffs length does not match support length")
    by_pair: dict[tuple[int, int], Fraction] = {}
    for pair, c in zip(support_pairs, raw):
        if isinstance(c, list):  # tolerate singleton-wrapped entries
            if len(c) != 1:
                raise ValueError(f"malformed coefficient entry {c!r}")
            c = c[0]
        by_pair[tuple(pair)] = parse_rational(str(c))
    # reject anything outside the declared support (from_terms re-checks)
    return PlaneCurve.from_terms(by_pair, support)


def curve_dumps(G: PlaneCurve) -> str:
    return json.dumps(curve_to_json(G), sort_keys=True)
