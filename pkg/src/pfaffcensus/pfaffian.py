"""Pfaffian chains and functions over one variable.

A chain of order r and degree alpha is a triangular family f_1..f_r with
f_j' = g_j(x, f_1..f_j), deg g_j <= alpha.  A function of degree
(alpha, beta) is P(x, f_1..f_r) with deg P <= beta.  The module provides
symbolic derivatives with degree bookkeeping, the classical zero-count
bounds, certified interval evaluation through pluggable chain
evaluators, and sign partitioning of intervals.

Coefficients are elements of Q[log q1, log q2, ...] (exact rationals
plus formal log-of-rational symbols), so chains like y = 2^x whose
defining polynomial carries log 2 stay first class.  Zero testing on
coefficients is formal: a coefficient is reported zero only when it is
the zero polynomial in the log symbols, never by numeric coincidence.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Callable, Iterable, Optional, Sequence

from .enclosures import (Enclosure, PrecisionError, exp_bounds, log_bounds,
                         iroot, pow_bounds)
from .rationals import format_rational, parse_rational, simplest_between

DEFAULT_MAX_BITS = 256


def _canonical_log(q: Fraction) -> tuple[Fraction, int]:
    """Normalize log q to (base, multiplier): base > 1, maximal root taken."""
    if q <= 0 or q == 1:
        raise ValueError(f"log symbol requires positive q != 1, got {q}")
    mult = 1
    if q < 1:
        q, mult = 1 / q, -1
    num, den = q.numerator, q.denominator
    top = max(num.bit_length(), 2)
    for j in range(top, 1, -1):
        rn, rd = iroot(num, j), iroot(den, j)
        if rn ** j == num and rd ** j == den and (rn, rd) != (1, 1):
            return Fraction(rn, rd), mult * j
    return q, mult


@dataclass(frozen=True)
class Const:
    """Polynomial in formal log(q) symbols with rational coefficients.

    terms maps a sorted tuple of log-arguments (a multiset, so products
    of logs are fine) to a rational coefficient; the empty tuple is the
    rational part.
    """

    terms: tuple[tuple[tuple[Fraction, ...], Fraction], ...]

    @staticmethod
    def _norm(d: dict[tuple[Fraction, ...], Fraction]) -> "Const":
        items = tuple(sorted(
            ((k, v) for k, v in d.items() if v != 0),
            key=lambda kv: (len(kv[0]), kv[0]),
        ))
        return Const(items)

    @staticmethod
    def rational(v) -> "Const":
        v = Fraction(v)
        return Const._norm({(): v})

    @staticmethod
    def log_of(q, times=1) -> "Const":
        base, mult = _canonical_log(Fraction(q))
        return Const._norm({(base,): Fraction(times) * mult})

    ZERO: "Const" = None  # filled in below
    ONE: "Const" = None

    def as_dict(self) -> dict[tuple[Fraction, ...], Fraction]:
        return dict(self.terms)

    @property
    def is_zero(self) -> bool:
        return not self.terms

    @property
    def is_rational(self) -> bool:
        return all(len(k) == 0 for k, _ in self.terms)

    def rational_value(self) -> Fraction:
        if not self.is_rational:
            raise ValueError(f"constant {self} is not rational")
        return self.terms[0][1] if self.terms else Fraction(0)

    def __add__(self, other: "Const") -> "Const":
        d = self.as_dict()
        for k, v in other.terms:
            d[k] = d.get(k, Fraction(0)) + v
        return Const._norm(d)

    def __neg__(self) -> "Const":
        return Const(tuple((k, -v) for k, v in self.terms))

    def __sub__(self, other: "Const") -> "Const":
        return self + (-other)

    def __mul__(self, other: "Const") -> "Const":
        d: dict[tuple[Fraction, ...], Fraction] = {}
        for k1, v1 in self.terms:
            for k2, v2 in other.terms:
                k = tuple(sorted(k1 + k2))
                d[k] = d.get(k, Fraction(0)) + v1 * v2
        return Const._norm(d)

    def scale(self, c) -> "Const":
        c = Fraction(c)
        return Const(tuple((k, v * c) for k, v in self.terms)) if c else Const(())

    def enclosure(self, bits: int) -> Enclosure:
        return _const_enclosure(self, bits)

    def to_json(self):
        if self.is_rational:
            return format_rational(self.rational_value())
        if len(self.terms) == 1 and len(self.terms[0][0]) == 1:
            (q,), coeff = self.terms[0]
            name = "log2" if q == 2 else f"log({format_rational(q)})"
            return {"const": name, "times": format_rational(coeff)}
        out = []
        for syms, coeff in self.terms:
            entry = {"times": format_rational(coeff)}
            if syms:
                entry["logs"] = [format_rational(q) for q in syms]
            out.append(entry)
        return {"sum": out}

    @staticmethod
    def from_json(obj) -> "Const":
        if isinstance(obj, str):
            return Const.rational(parse_rational(obj))
        if isinstance(obj, (int, float)):
            return Const.rational(Fraction(str(obj)))
        if isinstance(obj, dict) and "const" in obj:
            # {"const": "log2", "times": "p/q"}
            name = obj["const"]
            times = parse_rational(str(obj.get("times", "1")))
            if name.startswith("log"):
                arg = name[3:].lstrip("(").rstrip(")")
                return Const.log_of(parse_rational(arg), times)
            raise ValueError(f"unknown named constant {name!r}")
        if isinstance(obj, dict) and "sum" in obj:
            total = Const.rational(0)
            for entry in obj["sum"]:
                part = Const.rational(parse_rational(entry["times"]))
                for q in entry.get("logs", ()):
                    part = part * Const.log_of(parse_rational(q))
                total = total + part
            return total
        raise ValueError(f"cannot parse constant {obj!r}")

    def __str__(self) -> str:
        if self.is_zero:
            return "0"
        parts = []
        for syms, coeff in self.terms:
            s = format_rational(coeff)
            for q in syms:
                s += f"*log({format_rational(q)})"
            parts.append(s)
        return " + ".join(parts)


@lru_cache(maxsize=8192)
def _const_enclosure(c: Const, bits: int) -> Enclosure:
    total = Enclosure.point(0)
    for syms, coeff in c.terms:
        part = Enclosure.point(coeff)
        for q in syms:
            part = part * log_bounds(q, bits + 8)
        total = total + part
    return total


Const.ZERO = Const(())
Const.ONE = Const.rational(1)


Monomial = tuple  # exponent tuple (e_x, e_1, ..., e_r)


@dataclass(frozen=True)
class ChainPoly:
    """Polynomial in x and the chain slots y_1..y_r over Const coefficients."""

    nvars: int  # r + 1
    terms: tuple[tuple[Monomial, Const], ...]

    @staticmethod
    def _norm(nvars: int, d: dict[Monomial, Const]) -> "ChainPoly":
        items = tuple(sorted(
            ((m, c) for m, c in d.items() if not c.is_zero),
            key=lambda mc: (sum(mc[0]), mc[0]),
        ))
        return ChainPoly(nvars, items)

    @staticmethod
    def from_terms(nvars: int, terms: dict) -> "ChainPoly":
        d = {}
        for m, c in terms.items():
            m = tuple(m)
            if len(m) != nvars:
                raise ValueError(f"monomial {m} has wrong arity (want {nvars})")
            if any(e < 0 for e in m):
                raise ValueError(f"negative exponent in {m}")
            c = c if isinstance(c, Const) else Const.rational(c)
            d[m] = d.get(m, Const.ZERO) + c
        return ChainPoly._norm(nvars, d)

    @staticmethod
    def zero(nvars: int) -> "ChainPoly":
        return ChainPoly(nvars, ())

    @staticmethod
    def var(nvars: int, idx: int) -> "ChainPoly":
        m = tuple(1 if i == idx else 0 for i in range(nvars))
        return ChainPoly(nvars, ((m, Const.ONE),))

    @property
    def is_zero(self) -> bool:
        return not self.terms

    def total_degree(self) -> int:
        return max((sum(m) for m, _ in self.terms), default=0)

    def __add__(self, other: "ChainPoly") -> "ChainPoly":
        d = dict(self.terms)
        for m, c in other.terms:
            d[m] = d.get(m, Const.ZERO) + c
        return ChainPoly._norm(self.nvars, d)

    def __neg__(self) -> "ChainPoly":
        return ChainPoly(self.nvars, tuple((m, -c) for m, c in self.terms))

    def __sub__(self, other: "ChainPoly") -> "ChainPoly":
        return self + (-other)

    def __mul__(self, other: "ChainPoly") -> "ChainPoly":
        d: dict[Monomial, Const] = {}
        for m1, c1 in self.terms:
            for m2, c2 in other.terms:
                m = tuple(a + b for a, b in zip(m1, m2))
                prod = c1 * c2
                d[m] = d.get(m, Const.ZERO) + prod
        return ChainPoly._norm(self.nvars, d)

    def scale_const(self, c: Const) -> "ChainPoly":
        d = {m: cc * c for m, cc in self.terms}
        return ChainPoly._norm(self.nvars, d)

    def shift_rational(self, v) -> "ChainPoly":
        zero_m = (0,) * self.nvars
        d = dict(self.terms)
        d[zero_m] = d.get(zero_m, Const.ZERO) + Const.rational(v)
        return ChainPoly._norm(self.nvars, d)

    def diff(self, idx: int) -> "ChainPoly":
        d: dict[Monomial, Const] = {}
        for m, c in self.terms:
            e = m[idx]
            if e == 0:
                continue
            m2 = tuple(v - 1 if i == idx else v for i, v in enumerate(m))
            d[m2] = d.get(m2, Const.ZERO) + c.scale(e)
        return ChainPoly._norm(self.nvars, d)

    def pad_to(self, nvars: int) -> "ChainPoly":
        if nvars < self.nvars:
            raise ValueError("cannot shrink arity")
        extra = nvars - self.nvars
        return ChainPoly(nvars, tuple(
            (m + (0,) * extra, c) for m, c in self.terms))

    def evaluate_enclosure(self, values: Sequence[Enclosure], bits: int) -> Enclosure:
        """Certified enclosure given enclosures for (x, y_1..y_r)."""
        total = Enclosure.point(0)
        for m, c in self.terms:
            part = c.enclosure(bits)
            for val, e in zip(values, m):
                if e:
                    part = part * val.pow_int(e)
            total = total + part
        return total.rounded_rel(bits + 16)

    def evaluate_exact(self, values: Sequence[Fraction]) -> Fraction:
        """Exact value; requires all coefficients rational."""
        total = Fraction(0)
        for m, c in self.terms:
            part = c.rational_value()
            for val, e in zip(values, m):
                if e:
                    part *= val ** e
            total += part
        return total

    @property
    def all_rational(self) -> bool:
        return all(c.is_rational for _, c in self.terms)

    def uses_chain(self) -> bool:
        return any(any(m[1:]) for m, _ in self.terms)

    def to_json(self) -> list:
        return [{"exponents": list(m), "coeff": c.to_json()} for m, c in self.terms]

    @staticmethod
    def from_json(obj: list, nvars: int) -> "ChainPoly":
        d = {}
        for entry in obj:
            m = tuple(entry["exponents"])
            d[m] = Const.from_json(entry["coeff"])
        return ChainPoly.from_terms(nvars, d) if d else ChainPoly.zero(nvars)

    def __str__(self) -> str:
        if not self.terms:
            return "0"
        names = ["x"] + [f"y{i}" for i in range(1, self.nvars)]
        parts = []
        for m, c in self.terms:
            mono = "*".join(f"{n}^{e}" for n, e in zip(names, m) if e) or "1"
            parts.append(f"({c})*{mono}")
        return " + ".join(parts)


class ChainEvaluator:
    """Base for pluggable certified evaluators of the chain functions."""

    name = "abstract"

    def values(self, x: Fraction, bits: int) -> list[Enclosure]:
        raise NotImplementedError

    def values_over(self, X: Enclosure, bits: int) -> list[Enclosure]:
        raise NotImplementedError

    def exact_values(self, x: Fraction) -> Optional[list[Fraction]]:
        """Chain values as exact rationals when representable, else None."""
        return None

    def contains(self, x: Fraction) -> bool:
        return True


@dataclass(frozen=True)
class ExpEvaluator(ChainEvaluator):
    name: str = "exp"

    def values(self, x, bits):
        return [exp_bounds(x, bits)]

    def values_over(self, X, bits):
        return [Enclosure(exp_bounds(X.lo, bits).lo, exp_bounds(X.hi, bits).hi)]

    def exact_values(self, x):
        return [Fraction(1)] if x == 0 else None


def _exact_rational_power(q: Fraction, x: Fraction) -> Optional[Fraction]:
    """q**x as an exact rational when that is small and representable."""
    b = x.denominator
    if b > 64:
        return None
    if b > 1:
        rn, rd = iroot(q.numerator, b), iroot(q.denominator, b)
        if rn ** b != q.numerator or rd ** b != q.denominator:
            return None
        q = Fraction(rn, rd)
    p = x.numerator
    if abs(p) * max(q.numerator.bit_length(), q.denominator.bit_length()) > (1 << 14):
        return None
    return q ** p


@dataclass(frozen=True)
class PowBaseEvaluator(ChainEvaluator):
    """Chain (q^x,) for rational q > 0, q != 1; g_1 = log(q) * y1."""

    q: Fraction
    name: str = "qpow"

    def _point(self, x, bits):
        return pow_bounds(self.q, x, bits)

    def values(self, x, bits):
        return [self._point(x, bits)]

    def values_over(self, X, bits):
        a = self._point(X.lo, bits)
        b = self._point(X.hi, bits)
        return [a.hull(b)]  # monotone either way

    def exact_values(self, x):
        v = _exact_rational_power(self.q, x)
        return None if v is None else [v]


@dataclass(frozen=True)
class LogEvaluator(ChainEvaluator):
    """Chain (1/x, log x) on x > 0."""

    name: str = "log"

    def values(self, x, bits):
        if x <= 0:
            raise ValueError("log chain requires x > 0")
        return [Enclosure.point(1 / x), log_bounds(x, bits)]

    def values_over(self, X, bits):
        if X.lo <= 0:
            raise ValueError("log chain requires x > 0")
        return [Enclosure(1 / X.hi, 1 / X.lo),
                Enclosure(log_bounds(X.lo, bits).lo, log_bounds(X.hi, bits).hi)]

    def exact_values(self, x):
        return [1 / x, Fraction(0)] if x == 1 else None

    def contains(self, x):
        return x > 0


@dataclass(frozen=True)
class PowerFnEvaluator(ChainEvaluator):
    """Chain (1/x, x^e) on x > 0 for rational exponent e."""

    e: Fraction
    name: str = "xpow"

    def values(self, x, bits):
        if x <= 0:
            raise ValueError("power chain requires x > 0")
        return [Enclosure.point(1 / x), pow_bounds(x, self.e, bits)]

    def values_over(self, X, bits):
        if X.lo <= 0:
            raise ValueError("power chain requires x > 0")
        a = pow_bounds(X.lo, self.e, bits)
        b = pow_bounds(X.hi, self.e, bits)
        return [Enclosure(1 / X.hi, 1 / X.lo), a.hull(b)]

    def exact_values(self, x):
        if x <= 0:
            return None
        v = _exact_rational_power(x, self.e)
        return None if v is None else [1 / x, v]

    def contains(self, x):
        return x > 0


@dataclass(frozen=True)
class RationalFunc:
    """num(x)/den(x) with rational coefficients (den nonvanishing on domain)."""

    num: tuple[Fraction, ...]  # ascending powers
    den: tuple[Fraction, ...]

    def __call__(self, x: Fraction) -> Fraction:
        n = sum(c * x ** i for i, c in enumerate(self.num))
        d = sum(c * x ** i for i, c in enumerate(self.den))
        return n / d

    def over(self, X: Enclosure) -> Enclosure:
        def poly_enc(cs):
            t = Enclosure.point(0)
            for i, c in enumerate(cs):
                if c:
                    t = t + X.pow_int(i).scale(c)
            return t
        return poly_enc(self.num) * poly_enc(self.den).reciprocal()


@dataclass(frozen=True)
class RationalEvaluator(ChainEvaluator):
    """Chain of explicit rational functions; evaluation is exact."""

    funcs: tuple[RationalFunc, ...]
    name: str = "rational"

    def values(self, x, bits):
        return [Enclosure.point(f(x)) for f in self.funcs]

    def values_over(self, X, bits):
        return [f.over(X) for f in self.funcs]

    def exact_values(self, x):
        return [f(x) for f in self.funcs]


@dataclass(frozen=True)
class PfaffianChain:
    """Triangular chain f_1..f_r with certified evaluator and open domain."""

    r: int
    alpha: int
    g: tuple[ChainPoly, ...]  # g[j] defines f_{j+1}'
    evaluator: ChainEvaluator
    domain: tuple[Optional[Fraction], Optional[Fraction]] = (None, None)

    def __post_init__(self):
        if self.r < 1 or self.alpha < 1:
            raise ValueError("chain needs r >= 1 and alpha >= 1")
        if len(self.g) != self.r:
            raise ValueError("need one defining polynomial per chain slot")
        for j, gj in enumerate(self.g):
            if gj.total_degree() > self.alpha:
                raise ValueError(f"deg g_{j+1} > alpha")
            for m, _ in gj.terms:
                if any(m[i] for i in range(j + 2, self.r + 1)):
                    raise ValueError(f"g_{j+1} uses a later chain slot "
                                     "(violates triangularity)")

    def contains(self, x: Fraction) -> bool:
        lo, hi = self.domain
        if lo is not None and x <= lo:
            return False
        if hi is not None and x >= hi:
            return False
        return self.evaluator.contains(x)


@dataclass(frozen=True)
class PfaffianFunction:
    chain: PfaffianChain
    P: ChainPoly
    beta: int

    def __post_init__(self):
        if self.beta < 1:
            raise ValueError("beta must be >= 1")
        if self.P.total_degree() > self.beta:
            raise ValueError("deg P exceeds declared beta")
        if self.P.nvars != self.chain.r + 1:
            raise ValueError("P arity does not match chain order")

    @property
    def order(self) -> int:
        return self.chain.r

    @property
    def alpha(self) -> int:
        return self.chain.alpha

    def degree(self) -> tuple[int, int]:
        return (self.chain.alpha, self.beta)


def derivative(f: PfaffianFunction) -> PfaffianFunction:
    """Symbolic derivative; same chain, degree grows by at most alpha - 1."""
    chain = f.chain
    P = f.P
    out = P.diff(0)
    for j in range(chain.r):
        dj = P.diff(j + 1)
        if not dj.is_zero:
            out = out + dj * chain.g[j].pad_to(P.nvars)
    declared = min(out.total_degree(), f.beta + chain.alpha - 1)
    declared = max(declared, 1)
    return PfaffianFunction(chain, out, declared)


def derivatives_up_to(f: PfaffianFunction, k: int) -> list[PfaffianFunction]:
    """[f, f', ..., f^(k)]; cached by repeated symbolic differentiation."""
    out = [f]
    for _ in range(k):
        out.append(derivative(out[-1]))
    return out


def zero_count_bound(r: int, alpha: int, beta: int, d: int) -> int:
    """Upper bound on zeros of P(x, f(x)) for nonalgebraic pfaffian f,
    deg P = d: 2^(r(r-1)/2) * d*beta * (r*alpha + d*beta)^r."""
    for name, v in (("r", r), ("alpha", alpha), ("beta", beta), ("d", d)):
        if v < 1:
            raise ValueError(f"{name} must be >= 1, got {v}")
    db = d * beta
    return 2 ** (r * (r - 1) // 2) * db * (r * alpha + db) ** r


def inverse_derivative_zero_bound(r: int, alpha: int, beta: int, k: int) -> int:
    """Upper bound on zeros of the k-th derivative of the local inverse of f.

    The inverse derivative is Q_k(f', .., f^(k)) / (f')^(2k-1) with
    deg Q_k = k - 1, so its zeros are zeros of a same-chain pfaffian
    function of degree (k-1)(beta + k(alpha-1)).  The classical display
    is ambiguous between an inner term r*alpha and a bare r; both are
    computed and the larger is returned so downstream budgets stay upper
    bounds either way (they agree whenever alpha = 1).
    """
    for name, v in (("r", r), ("alpha", alpha), ("beta", beta), ("k", k)):
        if v < 1:
            raise ValueError(f"{name} must be >= 1, got {v}")
    dd = (k - 1) * (beta + k * (alpha - 1))
    if dd == 0:
        return 0
    pre = 2 ** (r * (r - 1) // 2) * dd
    return max(pre * (r * alpha + dd) ** r, pre * (r + dd) ** r)


def evaluate(f: PfaffianFunction, x: Fraction, bits: int,
             max_bits: int = DEFAULT_MAX_BITS) -> Enclosure:
    """Certified enclosure of f(x) with absolute width < 2**-bits."""
    x = Fraction(x)
    if not f.chain.contains(x):
        raise ValueError(f"{x} outside chain domain")
    exact = f.chain.evaluator.exact_values(x)
    if exact is not None and f.P.all_rational:
        return Enclosure.point(f.P.evaluate_exact([x] + exact))
    target = Fraction(1, 1 << bits)
    work = bits + 16
    while True:
        vals = [Enclosure.point(x)] + f.chain.evaluator.values(x, work)
        enc = f.P.evaluate_enclosure(vals, work)
        if enc.width < target:
            return enc
        if work >= max_bits:
            raise PrecisionError(
                f"cannot reach width 2^-{bits} at x={x} (working bits {work})")
        work = min(2 * work, max_bits)


def evaluate_over(f: PfaffianFunction, X: Enclosure, bits: int) -> Enclosure:
    """Enclosure of f over the whole interval X (no width promise)."""
    vals = [X] + f.chain.evaluator.values_over(X, bits)
    return f.P.evaluate_enclosure(vals, bits)


def enclosure_at(f: PfaffianFunction, x: Fraction, work: int) -> Enclosure:
    """Single evaluation pass at fixed working precision.

    Unlike `evaluate` this makes no absolute-width promise, so it stays
    usable for sign questions about astronomically large values.
    """
    exact = f.chain.evaluator.exact_values(x)
    if exact is not None and f.P.all_rational:
        return Enclosure.point(f.P.evaluate_exact([x] + exact))
    vals = [Enclosure.point(x)] + f.chain.evaluator.values(x, work)
    return f.P.evaluate_enclosure(vals, work)


# ---------------------------------------------------------------------------
# Root isolation and sign partitioning
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Cut:
    """A partition boundary: an exact rational or a certified bracket."""

    lo: Fraction
    hi: Fraction
    exact: bool

    @staticmethod
    def at(x: Fraction) -> "Cut":
        return Cut(x, x, True)

    def __str__(self) -> str:
        if self.exact:
            return format_rational(self.lo)
        return f"({format_rational(self.lo)},{format_rational(self.hi)})"


def certified_sign(f: PfaffianFunction, x: Fraction, max_bits: int) -> int:
    """Sign of f(x): +-1 certified, 0 only when exactly zero."""
    exact = f.chain.evaluator.exact_values(x)
    if exact is not None and f.P.all_rational:
        v = f.P.evaluate_exact([x] + exact)
        return 0 if v == 0 else (1 if v > 0 else -1)
    work = 64
    while True:
        enc = enclosure_at(f, x, work)
        if enc.lo > 0:
            return 1
        if enc.hi < 0:
            return -1
        if enc.lo == enc.hi == 0:
            return 0
        if work >= max_bits:
            raise PrecisionError(f"sign undecidable at x={x} within {max_bits} bits")
        work = min(2 * work, max_bits)


def _midpoint(a: Fraction, b: Fraction) -> Fraction:
    return (a + b) / 2


def _bisect_bracket(f: PfaffianFunction, lo: Fraction, hi: Fraction,
                    slo: int, shi: int, width: Fraction,
                    max_bits: int) -> Cut:
    """Shrink a sign-change bracket below the requested width."""
    assert slo * shi < 0
    while hi - lo >= width:
        mid = _midpoint(lo, hi)
        sm = certified_sign(f, mid, max_bits)
        if sm == 0:
            return Cut.at(mid)
        if sm == slo:
            lo = mid
        else:
            hi = mid
    return Cut(lo, hi, False)


class _Tower:
    """Lazily extended list f, f', f'', ... of one function's derivatives."""

    def __init__(self, f: PfaffianFunction):
        self.fs = [f]

    def __getitem__(self, i: int) -> PfaffianFunction:
        while len(self.fs) <= i:
            self.fs.append(derivative(self.fs[-1]))
        return self.fs[i]


def isolate_zeros(f: PfaffianFunction, lo: Fraction, hi: Fraction,
                  max_bits: int = DEFAULT_MAX_BITS,
                  depth_limit: int = 80,
                  tower_limit: int = 8) -> list[Cut]:
    """Certified cuts at every zero of f strictly inside (lo, hi).

    Interval evaluation prunes zero-free pieces; a zero is certified
    either exactly (hit at a rational point) or as a sign-change bracket
    once some higher derivative is one-signed, walking up the derivative
    tower to handle zeros shared with lower-order derivatives.  Suspected
    tangential zeros that never certify raise PrecisionError instead of
    guessing.
    """
    tower = _Tower(f)
    width_target = (hi - lo) / (1 << 24)
    out: list[Cut] = []

    def no_interior(level: int, a: Fraction, b: Fraction) -> bool:
        """True when tower[level] certifiably has no zero in open (a, b)."""
        g = tower[level]
        if g.P.is_zero:
            return False
        enc = evaluate_over(g, Enclosure(a, b), 96)
        if not enc.contains_zero():
            return True
        if level + 1 > tower_limit:
            return False
        gp = tower[level + 1]
        if gp.P.is_zero:
            # g is constant as a function; one sample decides
            return certified_sign(g, _midpoint(a, b), max_bits) != 0
        if not no_interior(level + 1, a, b):
            return False
        # g' one-signed inside, so g is strictly monotone on [a, b]
        sa = certified_sign(g, a, max_bits)
        sb = certified_sign(g, b, max_bits)
        if sa == 0 and sb == 0:
            raise PrecisionError(
                f"monotone function vanishing at both ends of [{a}, {b}]")
        if sa == 0 or sb == 0:
            return True
        return sa == sb

    def rec(a: Fraction, b: Fraction, sa: int, sb: int, depth: int):
        enc = evaluate_over(f, Enclosure(a, b), 96)
        if not enc.contains_zero():
            return
        if no_interior(1, a, b):
            # f strictly monotone on [a, b]
            if sa == 0 or sb == 0 or sa == sb:
                return
            out.append(_bisect_bracket(f, a, b, sa, sb, width_target, max_bits))
            return
        if depth >= depth_limit:
            raise PrecisionError(
                f"zero isolation stalled on [{a}, {b}] (tangential zero?)")
        mid = _midpoint(a, b)
        sm = certified_sign(f, mid, max_bits)
        if sm == 0:
            out.append(Cut.at(mid))
        rec(a, mid, sa, sm, depth + 1)
        rec(mid, b, sm, sb, depth + 1)

    sa = certified_sign(f, lo, max_bits)
    sb = certified_sign(f, hi, max_bits)
    rec(lo, hi, sa, sb, 0)
    return sorted(out, key=lambda c: c.lo)


def _separate_cuts(cuts: list[Cut]) -> list[Cut]:
    """Merge coincident exact cuts; overlapping brackets are an error."""
    cuts = sorted(cuts, key=lambda c: (c.lo, c.hi))
    out: list[Cut] = []
    for c in cuts:
        if out and c.lo < out[-1].hi:
            if c.exact and out[-1].exact and c.lo == out[-1].lo:
                continue
            raise PrecisionError(
                f"cannot separate partition cuts {out[-1]} and {c}")
        if out and c.exact and out[-1].exact and c.lo == out[-1].lo:
            continue
        out.append(c)
    return out


@dataclass(frozen=True)
class SignPiece:
    """Open subinterval with a certified sign per derivative order.

    signs[j-1] is the sign of f^(j) on the interior: +1, -1, or 0 for
    identically zero.
    """

    left: Cut
    right: Cut
    signs: tuple[int, ...]


def sign_partition(f: PfaffianFunction, lo: Fraction, hi: Fraction, m: int,
                   max_bits: int = DEFAULT_MAX_BITS) -> list[SignPiece]:
    """Partition [lo, hi] so each f^(j), j = 1..m, is one-signed or
    identically zero on every open piece."""
    if m < 1:
        raise ValueError("m must be >= 1")
    if lo >= hi:
        raise ValueError("empty interval")
    derivs = derivatives_up_to(f, m)[1:]  # f^(1) .. f^(m)
    ident_zero = [d.P.is_zero for d in derivs]
    cuts: list[Cut] = []
    for j in range(m, 0, -1):
        if ident_zero[j - 1]:
            continue
        cuts.extend(isolate_zeros(derivs[j - 1], lo, hi, max_bits=max_bits))
    cuts = _separate_cuts([c for c in cuts if lo < c.lo and c.hi < hi])
    bounds = [Cut.at(lo)] + cuts + [Cut.at(hi)]
    pieces = []
    for left, right in zip(bounds, bounds[1:]):
        if left.hi >= right.lo:
            raise PrecisionError("partition cuts leave no interior room")
        sample = simplest_between(left.hi, right.lo)
        signs = []
        for j in range(1, m + 1):
            if ident_zero[j - 1]:
                signs.append(0)
            else:
                s = certified_sign(derivs[j - 1], sample, max_bits)
                if s == 0:
                    raise PrecisionError(
                        f"derivative order {j} vanishes at sample {sample}")
                signs.append(s)
        pieces.append(SignPiece(left, right, tuple(signs)))
    return pieces


SLOPE_FALLING = "slope<=-1"
SLOPE_MIDDLE = "-1<=slope<=1"
SLOPE_RISING = "slope>=1"


@dataclass(frozen=True)
class SlopePiece:
    left: Cut
    right: Cut
    label: str


def slope_trichotomy(f: PfaffianFunction, lo: Fraction, hi: Fraction,
                     max_bits: int = DEFAULT_MAX_BITS) -> list[SlopePiece]:
    """Split [lo, hi] at solutions of f' = +-1 and label each piece."""
    if lo >= hi:
        raise ValueError("empty interval")
    d1 = derivative(f)
    cuts: list[Cut] = []
    for shift in (1, -1):
        g = PfaffianFunction(f.chain, d1.P.shift_rational(-shift),
                             max(d1.beta, 1))
        if g.P.is_zero:
            continue  # slope identically +-1: single middle piece
        cuts.extend(isolate_zeros(g, lo, hi, max_bits=max_bits))
    cuts = _separate_cuts([c for c in cuts if lo < c.lo and c.hi < hi])
    bounds = [Cut.at(lo)] + cuts + [Cut.at(hi)]
    pieces = []
    for left, right in zip(bounds, bounds[1:]):
        sample = simplest_between(left.hi, right.lo)
        if d1.P.is_zero:
            pieces.append(SlopePiece(left, right, SLOPE_MIDDLE))
            continue
        work = 64
        while True:
            enc = enclosure_at(d1, sample, work)
            if enc.hi < -1:
                label = SLOPE_FALLING
                break
            if enc.lo > 1:
                label = SLOPE_RISING
                break
            if -1 <= enc.lo and enc.hi <= 1:
                label = SLOPE_MIDDLE
                break
            if enc.is_point:
                label = SLOPE_MIDDLE  # exactly +-1 counts as middle
                break
            if work >= max_bits:
                raise PrecisionError(f"slope label undecidable at {sample}")
            work = min(2 * work, max_bits)
        pieces.append(SlopePiece(left, right, label))
    return pieces


def slope_piece_budget(r: int, alpha: int, beta: int) -> int:
    """Certified cap on the number of trichotomy pieces."""
    return 2 * zero_count_bound(r, alpha, max(beta + alpha - 1, 1), 1) + 1


# ---------------------------------------------------------------------------
# Built-in chains
# ---------------------------------------------------------------------------


def chain_exp() -> PfaffianChain:
    """f_1 = e^x on all of R (g_1 = y1)."""
    g1 = ChainPoly.from_terms(2, {(0, 1): 1})
    return PfaffianChain(1, 1, (g1,), ExpEvaluator())


def chain_pow_base(q) -> PfaffianChain:
    """f_1 = q^x for rational q > 0, q != 1 (g_1 = log(q) y1)."""
    q = Fraction(q)
    g1 = ChainPoly.from_terms(2, {(0, 1): Const.log_of(q)})
    return PfaffianChain(1, 1, (g1,), PowBaseEvaluator(q))


def chain_reciprocal_quadratic() -> PfaffianChain:
    """f_1 = 1/(1 + x^2) (g_1 = -2 x y1^2, alpha = 3)."""
    g1 = ChainPoly.from_terms(2, {(1, 2): -2})
    ev = RationalEvaluator((RationalFunc((Fraction(1),),
                                         (Fraction(1), Fraction(0), Fraction(1))),))
    return PfaffianChain(1, 3, (g1,), ev)


def chain_log() -> PfaffianChain:
    """(f_1, f_2) = (1/x, log x) on x > 0 (alpha = 2, r = 2)."""
    g1 = ChainPoly.from_terms(3, {(0, 2, 0): -1})
    g2 = ChainPoly.from_terms(3, {(0, 1, 0): 1})
    return PfaffianChain(2, 2, (g1, g2), LogEvaluator(), (Fraction(0), None))


def chain_power(e) -> PfaffianChain:
    """(f_1, f_2) = (1/x, x^e) on x > 0 for rational e (alpha = 2, r = 2)."""
    e = Fraction(e)
    g1 = ChainPoly.from_terms(3, {(0, 2, 0): -1})
    g2 = ChainPoly.from_terms(3, {(0, 1, 1): e})
    return PfaffianChain(2, 2, (g1, g2), PowerFnEvaluator(e), (Fraction(0), None))


def function_of_chain(chain: PfaffianChain, slot: int = 1,
                      beta: int = 1) -> PfaffianFunction:
    """The pfaffian function f = y_slot on the given chain."""
    P = ChainPoly.var(chain.r + 1, slot)
    return PfaffianFunction(chain, P, beta)


# ---------------------------------------------------------------------------
# JSON wire format
# ---------------------------------------------------------------------------

_EVALUATOR_TAGS = {"exp", "exp2", "qpow", "log", "xpow", "rational"}


def function_to_json(f: PfaffianFunction) -> dict:
    chain = f.chain
    ev = chain.evaluator
    if isinstance(ev, ExpEvaluator):
        tag, extra = "exp", {}
    elif isinstance(ev, PowBaseEvaluator):
        if ev.q == 2:
            tag, extra = "exp2", {}
        else:
            tag, extra = "qpow", {"base": format_rational(ev.q)}
    elif isinstance(ev, LogEvaluator):
        tag, extra = "log", {}
    elif isinstance(ev, PowerFnEvaluator):
        tag, extra = "xpow", {"exponent": format_rational(ev.e)}
    elif isinstance(ev, RationalEvaluator):
        tag = "rational"
        extra = {"chain_functions": [
            {"num": [format_rational(c) for c in fn.num],
             "den": [format_rational(c) for c in fn.den]}
            for fn in ev.funcs]}
    else:
        raise ValueError(f"unknown evaluator {ev!r}")
    lo, hi = chain.domain
    return {
        "r": chain.r,
        "alpha": chain.alpha,
        "g": [gj.to_json() for gj in chain.g],
        "P": f.P.to_json(),
        "beta": f.beta,
        "domain": [None if lo is None else format_rational(lo),
                   None if hi is None else format_rational(hi)],
        "evaluator": tag,
        **extra,
    }


def function_from_json(obj: dict) -> PfaffianFunction:
    r = int(obj["r"])
    alpha = int(obj["alpha"])
    nvars = r + 1
    tag = obj["evaluator"]
    if tag not in _EVALUATOR_TAGS:
        raise ValueError(f"unknown evaluator tag {tag!r}")
    if tag == "exp":
        ev: ChainEvaluator = ExpEvaluator()
    elif tag == "exp2":
        ev = PowBaseEvaluator(Fraction(2))
    elif tag == "qpow":
        ev = PowBaseEvaluator(parse_rational(obj["base"]))
    elif tag == "log":
        ev = LogEvaluator()
    elif tag == "xpow":
        ev = PowerFnEvaluator(parse_rational(obj["exponent"]))
    else:
        ev = RationalEvaluator(tuple(
            RationalFunc(tuple(parse_rational(c) for c in fn["num"]),
                         tuple(parse_rational(c) for c in fn["den"]))
            for fn in obj["chain_functions"]))
    dom = obj.get("domain", [None, None])
    lo = None if dom[0] is None else parse_rational(str(dom[0]))
    hi = None if dom[1] is None else parse_rational(str(dom[1]))
    g = tuple(ChainPoly.from_json(gj, nvars) for gj in obj["g"])
    chain = PfaffianChain(r, alpha, g, ev, (lo, hi))
    P = ChainPoly.from_json(obj["P"], nvars)
    return PfaffianFunction(chain, P, int(obj["beta"]))
