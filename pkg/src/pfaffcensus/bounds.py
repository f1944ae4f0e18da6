"""Explicit counting bounds for pfaff and algebraic curves.

Two pipelines are assembled here.  For a nonalgebraic pfaff curve of
order r and degree (alpha, beta), the count of height-<= H rational
points is bounded by

    interval_budget(r, alpha, beta, D)
      * 6 d^2 4^(1/rho) 2^rho H^(4 rho)     (curves per interval)
      * zero_count_bound(r, alpha, beta, d) (points per curve)

minimized over the auxiliary degree d >= 2, with rho = 8/(3(d+3)); past
an explicit crossover height this minimum drops below the uniform
envelope exp(5 sqrt(log H)).  For an irreducible algebraic curve of
bidegree (b, c) with d = max(b, c),

    N(X, H) <= (6d)^10 4^d H^(2/d) (log H)^5.

Logs are natural throughout: the d-optimization only balances with
natural log.  Every returned numeric bound is outward rounded.

The per-interval curve count carries the full H power 2^rho H^(4 rho)
(the shorthand display that drops it is dimensionally short one factor);
`pfaff_curves_per_interval` can also report that literal shorthand for
comparison, but pipelines always use the full form.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Optional

from .enclosures import (Enclosure, exp_bounds, exp_sqrt_log_bounds,
                         log_bounds, log2_bounds, pow_bounds)
from .monomials import PlaneCurve, total_degree_set, parameters
from .rationals import RationalPoint, height
from .cover import PreconditionError


def pfaff_interval_budget(r: int, alpha: int, beta: int, D: int) -> int:
    """Exact interval count budget for the slope/inverse-derivative split:

    2^(1+r(r-1)/2) ((r+1)(alpha+beta))^(r+1)
      * D^2 2^(r(r-1)) (beta + D(alpha-1)) (r + D(beta + D(alpha-1)))^r
    """
    if r < 1 or alpha < 1 or beta < 1 or D < 2:
        raise PreconditionError(
            f"need r, alpha, beta >= 1 and D >= 2; got ({r}, {alpha}, {beta}, {D})")
    tri = 2 ** (1 + r * (r - 1) // 2) * ((r + 1) * (alpha + beta)) ** (r + 1)
    inner = beta + D * (alpha - 1)
    sub = D * D * 2 ** (r * (r - 1)) * inner * (r + D * inner) ** r
    return tri * sub


def slope_split_count(r: int, alpha: int, beta: int) -> int:
    """Exact count 2*2^(r(r-1)/2) (beta+alpha-1) (r alpha+beta+alpha-1)^r + 1."""
    bp = beta + alpha - 1
    return 2 * 2 ** (r * (r - 1) // 2) * bp * (r * alpha + bp) ** r + 1


def degree_support_size(d: int) -> int:
    """|total_degree_set(d)| = (d+1)(d+2)/2 (not the d(d-1)/2 shorthand)."""
    return (d + 1) * (d + 2) // 2


def degree_rho(d: int) -> Fraction:
    """rho of total_degree_set(d), exactly 8/(3(d+3))."""
    return Fraction(8, 3 * (d + 3))


def pfaff_curves_per_interval(d: int, H, bits: int = 64,
                              literal: bool = False) -> Fraction:
    """Certified upper bound on curves needed per interval at degree d.

    Full form: 6 d^2 4^(1/rho) 2^rho H^(4 rho).  With literal=True the
    H-independent shorthand 6 d^2 4^(1/rho) 2^rho is returned instead.
    """
    if d < 2:
        raise PreconditionError(f"d >= 2 fails: d = {d}")
    rho = degree_rho(d)
    val = (6 * d * d
           * pow_bounds(4, 1 / rho, bits).hi
           * pow_bounds(2, rho, bits).hi)
    if literal:
        return val
    H = Fraction(H)
    if H < 3:
        raise PreconditionError(f"H >= 3 fails: H = {H}")
    return val * pow_bounds(H, 4 * rho, bits).hi


def pfaff_zero_bound(r: int, alpha: int, beta: int, d: int) -> int:
    from .pfaffian import zero_count_bound
    return zero_count_bound(r, alpha, beta, d)


def pfaff_pipeline(r: int, alpha: int, beta: int, H, d: int,
                   bits: int = 64) -> Fraction:
    """Certified upper bound budget * curves-per-interval * points-per-curve."""
    D = degree_support_size(d)
    return (pfaff_interval_budget(r, alpha, beta, D)
            * pfaff_curves_per_interval(d, H, bits)
            * pfaff_zero_bound(r, alpha, beta, d))


def uniform_pfaff_bound(H, bits: int = 64) -> Enclosure:
    """Certified enclosure of exp(5 sqrt(log H)) for H > 1."""
    return exp_sqrt_log_bounds(5, H, bits)


# -- log-space machinery for the crossover search ---------------------------


@lru_cache(maxsize=None)
def _log_pipeline_coeff(r: int, alpha: int, beta: int, d: int,
                        bits: int = 96) -> Enclosure:
    """Enclosure of log of the H-independent pipeline factor at degree d."""
    D = degree_support_size(d)
    rho = degree_rho(d)
    c = (pfaff_interval_budget(r, alpha, beta, D)
         * 6 * d * d * pfaff_zero_bound(r, alpha, beta, d))
    total = log_bounds(c, bits)
    total = total + log2_bounds(bits).scale(2 / rho)  # log 4^(1/rho)
    total = total + log2_bounds(bits).scale(rho)      # log 2^rho
    return total


def _pipeline_le_envelope(r: int, alpha: int, beta: int,
                          x: Enclosure, d_cap: int) -> Optional[bool]:
    """Certified test of min_d pipeline(H) <= exp(5 sqrt(log H)), x = log H.

    Returns True/False when certified either way, None when undecided at
    the working precision.  The d > d_cap tail is ruled out by the
    4^(1/rho) factor alone when (3/8) log 4 * (d+3) already exceeds
    5 sqrt(x).
    """
    sq = pow_bounds(25 * x.hi, Fraction(1, 2), 96)  # 5 sqrt(x) upper
    rhs_hi_sq = 25 * x.hi
    rhs_lo_sq = 25 * x.lo
    any_unknown = False
    all_above = True
    for d in range(2, d_cap + 1):
        K = _log_pipeline_coeff(r, alpha, beta, d)
        a = 4 * degree_rho(d)
        lhs_hi = K.hi + a * x.hi
        lhs_lo = K.lo + a * x.lo
        # lhs <= 5 sqrt(x): compare squares (lhs >= 0 always here)
        if lhs_hi * lhs_hi <= rhs_lo_sq:
            return True
        if lhs_lo * lhs_lo > rhs_hi_sq and lhs_lo > 0:
            continue
        all_above = False
        any_unknown = True
    # tail: for d > d_cap the coefficient alone exceeds the envelope?
    tail_lo = log2_bounds(96).lo * Fraction(3, 4) * (d_cap + 3)  # (3/8)(d+3)log4
    tail_ok = tail_lo * tail_lo > rhs_hi_sq
    if all_above and tail_ok and not any_unknown:
        return False
    if not tail_ok:
        return None
    return None if any_unknown else False


def _d_cap_for(x_hi: Fraction) -> int:
    # need (3/8) log4 (d+3) > 5 sqrt(x): log4 ~ 1.386 -> d + 3 > 9.63 sqrt(x)
    return int(10 * math.isqrt(int(x_hi) + 1)) + 24


@dataclass(frozen=True)
class PfaffCrossover:
    """Certified-probe crossover for the uniform envelope.

    value = 2^k is the least power of two at which the minimized pipeline
    is certified below exp(5 sqrt(log H)); certification is by probes (at
    value, at 64 log-spaced heights above it, and failure at value/2),
    not a symbolic proof for all H.
    """

    r: int
    alpha: int
    beta: int
    k: int
    value: int
    probes_ok: bool
    top_ratio_log_upper: Fraction  # upper bound on log(pipeline/envelope) at top probe


def _x_for_pow2(k: int) -> Enclosure:
    return log2_bounds(192).scale(k)


def pfaff_crossover(r: int, alpha: int, beta: int,
                    probes: int = 64) -> PfaffCrossover:
    """Doubling-plus-bisection search (on the exponent of 2) for the least
    power of two past which the pipeline stays under the envelope."""
    if r < 1 or alpha < 1 or beta < 1:
        raise PreconditionError("need r, alpha, beta >= 1")

    def pred(k: int) -> bool:
        x = _x_for_pow2(k)
        res = _pipeline_le_envelope(r, alpha, beta, x, _d_cap_for(x.hi))
        if res is None:
            raise ArithmeticError(f"crossover predicate undecided at 2^{k}")
        return res

    k = 2
    while not pred(k):
        k *= 2
        if k > 1 << 24:
            raise ArithmeticError("crossover search runaway")
    lo, hi = k // 2, k  # pred(lo) False (or lo = 1), pred(hi) True
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if pred(mid):
            hi = mid
        else:
            lo = mid
    k0 = hi
    probes_ok = pred(k0) and (k0 == 1 or not pred(k0 - 1))
    top_margin = None
    for i in range(1, probes + 1):
        ki = k0 + max(1, (k0 * i) // probes)
        x = _x_for_pow2(ki)
        res = _pipeline_le_envelope(r, alpha, beta, x, _d_cap_for(x.hi))
        probes_ok = probes_ok and bool(res)
    # margin at top probe 2^(2 k0): upper bound on log(pipeline) - log(envelope)
    x = _x_for_pow2(2 * k0)
    best = None
    for d in range(2, _d_cap_for(x.hi) + 1):
        K = _log_pipeline_coeff(r, alpha, beta, d)
        lhs_hi = K.hi + 4 * degree_rho(d) * x.hi
        if best is None or lhs_hi < best:
            best = lhs_hi
    env_lo = pow_bounds(25 * x.lo, Fraction(1, 2), 96).lo
    top_margin = best - env_lo
    return PfaffCrossover(r, alpha, beta, k0, 1 << k0, probes_ok, top_margin)


@dataclass(frozen=True)
class PfaffBoundReport:
    r: int
    alpha: int
    beta: int
    H: int
    d_star: int
    interval_budget: int
    curves_per_interval: Fraction
    points_per_curve: int
    pipeline_value: Fraction
    simple_value: Enclosure  # enclosure of exp(5 sqrt(log H))
    threshold_value: Optional[int] = None

    @property
    def pipeline_below_simple(self) -> bool:
        return self.pipeline_value <= self.simple_value.lo


def pfaff_report(r: int, alpha: int, beta: int, H: int,
                 with_threshold: bool = False,
                 bits: int = 64) -> PfaffBoundReport:
    """Minimize the pipeline over d and package the comparison."""
    if H < 3:
        raise PreconditionError(f"H >= 3 fails: H = {H}")
    x_hi = log_bounds(H, 64).hi
    d_cap = _d_cap_for(x_hi)
    best_d, best_val = None, None
    for d in range(2, d_cap + 1):
        val = pfaff_pipeline(r, alpha, beta, H, d, bits)
        if best_val is None or val < best_val:
            best_d, best_val = d, val
    threshold = pfaff_crossover(r, alpha, beta).value if with_threshold else None
    return PfaffBoundReport(
        r, alpha, beta, H, best_d,
        pfaff_interval_budget(r, alpha, beta, degree_support_size(best_d)),
        pfaff_curves_per_interval(best_d, H, bits),
        pfaff_zero_bound(r, alpha, beta, best_d),
        best_val,
        uniform_pfaff_bound(H, bits),
        threshold,
    )


# -- algebraic curves --------------------------------------------------------


def algebraic_count_bound(b: int, c: int, H, bits: int = 64) -> Fraction:
    """Certified upper bound (6d)^10 4^d H^(2/d) (log H)^5, d = max(b, c)."""
    if not (isinstance(b, int) and isinstance(c, int)) or b < 2 or c < 2:
        raise PreconditionError(f"b, c >= 2 fails: b = {b}, c = {c}")
    H = Fraction(H)
    if H < 3:
        raise PreconditionError(f"H >= 3 fails: H = {H}")
    d = max(b, c)
    h_pow = pow_bounds(H, Fraction(2, d), bits).hi
    log_pow = log_bounds(H, bits).hi ** 5
    return (6 * d) ** 10 * Fraction(4) ** d * h_pow * log_pow


def delta_rule(H) -> int:
    """Least integer exceeding log H (H >= 2)."""
    H = Fraction(H)
    if H < 2:
        raise PreconditionError(f"H >= 2 fails: H = {H}")
    bits = 64
    while True:
        enc = log_bounds(H, bits)
        if math.floor(enc.lo) == math.floor(enc.hi):
            return math.floor(enc.lo) + 1
        bits *= 2
        if bits > 4096:
            raise ArithmeticError(f"log {H} sits on an integer boundary?")


@dataclass(frozen=True)
class AlgebraicPipeline:
    b: int
    c: int
    d: int
    delta: int
    monomial_choice: str
    D: int
    singular_budget: int
    slope_budget: int
    graph_budget: int
    subinterval_budget: int
    bezout_cap: int
    bezout_cap_2d: int
    box_factor: int
    h_exponent: Fraction
    per_graph_coeff: int
    final_coeff: int
    per_graph_value: Optional[Fraction] = None
    final_value: Optional[Fraction] = None


def algebraic_pipeline_constants(b: int, c: int, delta: int,
                                 H=None, bits: int = 64) -> AlgebraicPipeline:
    """The chain of intermediate budgets behind the bidegree bound."""
    if b < 2 or c < 2:
        raise PreconditionError(f"b, c >= 2 fails: b = {b}, c = {c}")
    d = max(b, c)
    if delta < d:
        raise PreconditionError(f"delta >= d fails: delta = {delta}, d = {d}")
    choice = f"box({d},{delta})" if d == b else f"box({delta},{d})"
    D = d * delta
    expo = Fraction(2, d) + Fraction(2, delta)
    per_graph_coeff = 80 * d ** 3 * delta ** 3 * 4 ** d
    final_coeff = 100 * (2 * d) ** 10 * 4 ** d * delta ** 5
    per_graph_value = final_value = None
    if H is not None:
        h_pow = pow_bounds(Fraction(H), expo, bits).hi
        per_graph_value = per_graph_coeff * h_pow
        final_value = final_coeff * h_pow
    return AlgebraicPipeline(
        b, c, d, delta, choice, D,
        singular_budget=2 * d * (2 * d - 1),
        slope_budget=4 * d * (d - 1),
        graph_budget=20 * d ** 3,
        subinterval_budget=8 * d ** 2 * D ** 2,
        bezout_cap=(b + c) * 2 * delta,
        bezout_cap_2d=4 * d * delta,
        box_factor=4,
        h_exponent=expo,
        per_graph_coeff=per_graph_coeff,
        final_coeff=final_coeff,
        per_graph_value=per_graph_value,
        final_value=final_value,
    )


# -- box reduction -----------------------------------------------------------


class CurveFormatError(ValueError):
    pass


def _transform_terms(F: PlaneCurve, case: int) -> PlaneCurve:
    b, c = F.bidegree()
    terms = F.terms()
    ks = {k for _, k in terms}
    hs = {h for h, _ in terms}
    if case in (2, 4) and 0 not in ks:
        raise CurveFormatError(
            "reciprocal-y transform needs a term independent of y "
            "(the curve is divisible by y, so not irreducible)")
    if case in (3, 4) and 0 not in hs:
        raise CurveFormatError(
            "reciprocal-x transform needs a term independent of x "
            "(the curve is divisible by x, so not irreducible)")
    if case == 1:
        return F
    new = {}
    for (h, k), v in terms.items():
        if case == 2:
            new[(h, c - k)] = v
        elif case == 3:
            new[(b - h, k)] = v
        else:
            new[(b - h, c - k)] = v
    out = PlaneCurve.from_terms(new)
    if out.bidegree() != (b, c):
        raise CurveFormatError(
            f"transform changed bidegree {F.bidegree()} -> {out.bidegree()}")
    return out


def box_reduce(F: PlaneCurve, P: RationalPoint
               ) -> tuple[int, PlaneCurve, RationalPoint]:
    """Send a rational point of F into [-1,1]^2 by reciprocal coordinates.

    Returns (case, transformed curve, transformed point) with case 1-4 by
    comparing |x|, |y| against 1; heights and membership are preserved
    exactly, and applying the same case transform twice is the identity.
    """
    from .monomials import evaluate_curve
    if evaluate_curve(F, P) != 0:
        raise PreconditionError(f"point is not on the curve")
    ax, ay = abs(P.x), abs(P.y)
    if ax <= 1 and ay <= 1:
        case = 1
    elif ax <= 1:
        case = 2
    elif ay <= 1:
        case = 3
    else:
        case = 4
    G = _transform_terms(F, case)
    x2 = P.x if case in (1, 2) else 1 / P.x
    y2 = P.y if case in (1, 3) else 1 / P.y
    Q = RationalPoint(x2, y2)
    if evaluate_curve(G, Q) != 0:
        raise AssertionError("transformed point left the transformed curve")
    if Q.height() != P.height():
        raise AssertionError("height not preserved by box reduction")
    if not (abs(Q.x) <= 1 and abs(Q.y) <= 1):
        raise AssertionError("transformed point outside the unit box")
    return case, G, Q
