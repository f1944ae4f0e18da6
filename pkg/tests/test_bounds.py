import math
import random
from fractions import Fraction

import pytest

from pfaffcensus.bounds import (AlgebraicPipeline, algebraic_count_bound,
                                algebraic_pipeline_constants, box_reduce,
                                delta_rule, degree_rho, degree_support_size,
                                pfaff_crossover, pfaff_curves_per_interval,
                                pfaff_interval_budget, pfaff_pipeline,
                                pfaff_report, slope_split_count,
                                uniform_pfaff_bound, _transform_terms)
from pfaffcensus.cover import PreconditionError
from pfaffcensus.enclosures import pow_bounds
from pfaffcensus.monomials import PlaneCurve, parameters, total_degree_set
from pfaffcensus.rationals import RationalPoint

F = Fraction


def test_interval_budget_examples():
    assert pfaff_interval_budget(1, 1, 1, 6) == 32 * 36 * 7 == 8064
    for D in (3, 6, 10, 28):
        assert pfaff_interval_budget(1, 1, 1, D) == 32 * D * D * (D + 1)
    # the trichotomy factor is dominated by its simplified cap
    assert slope_split_count(1, 1, 1) <= 2 ** (1 + 0) * ((1 + 1) * (1 + 1)) ** 2


def test_degree_support_identities():
    for d in range(2, 25):
        assert degree_support_size(d) == len(total_degree_set(d))
        assert degree_rho(d) == parameters(total_degree_set(d)).rho
        assert 4 * degree_rho(d) == F(32, 3 * (d + 3))


def test_pipeline_exponent_and_minimizer():
    # the H power of the per-interval factor is H^(32/(3(d+3)))
    d = 7
    rho = degree_rho(d)
    v1 = pfaff_curves_per_interval(d, 100)
    v2 = pfaff_curves_per_interval(d, 200)
    ratio = float(v2 / v1)
    assert abs(ratio / 2 ** float(4 * rho) - 1) < 1e-6
    # literal shorthand drops the H power
    lit = pfaff_curves_per_interval(d, 100, literal=True)
    assert lit < v1

    # two-term minimization: 4^t H^(4/t) minimized near t = sqrt(4 ln H/ln 4)
    H = int(math.exp(100))
    t_opt = math.sqrt(4 * 100 / math.log(4))
    d_opt = round(8 * t_opt / 3 - 3)
    rho = degree_rho(d_opt)
    two_term = float(pow_bounds(4, 1 / rho, 64).hi
                     * pow_bounds(F(H), 4 * rho, 64).hi)
    assert abs(math.log(two_term) - 4 * math.sqrt(math.log(4) * 100)) < 1.0
    assert 4 * math.sqrt(math.log(4)) < 5


def test_pipeline_monotone_grids():
    # eventually increasing in d at fixed H, and increasing in H at fixed d
    vals = [pfaff_pipeline(1, 1, 1, 1000, d) for d in range(2, 30)]
    tail = vals[10:]
    assert all(a < b for a, b in zip(tail, tail[1:]))
    for d in (2, 5, 9):
        hs = [pfaff_pipeline(1, 1, 1, H, d) for H in (10, 100, 1000, 10000)]
        assert all(a < b for a, b in zip(hs, hs[1:]))


def test_pfaff_report():
    rep = pfaff_report(1, 1, 1, 100)
    assert rep.pipeline_value == (rep.interval_budget
                                  * rep.curves_per_interval
                                  * rep.points_per_curve)
    for d in range(2, 12):
        assert rep.pipeline_value <= pfaff_pipeline(1, 1, 1, 100, d)
    assert rep.simple_value.lo < rep.simple_value.hi


def test_uniform_envelope_values():
    env = uniform_pfaff_bound(100)
    want = math.exp(5 * math.sqrt(math.log(100)))
    assert float(env.lo) <= want * (1 + 1e-12)
    assert want * (1 - 1e-12) <= float(env.hi)
    assert float(env.width / env.hi) < 2 ** -50


def test_crossover_certified_probes():
    cr = pfaff_crossover(1, 1, 1)
    assert cr.value == 1 << cr.k
    assert cr.probes_ok
    # ratio at the top probe is far below 1/100
    assert float(cr.top_ratio_log_upper) < math.log(0.01)


def test_crossover_monotone_and_dominance():
    c1 = pfaff_crossover(1, 1, 1)
    c2 = pfaff_crossover(1, 1, 2)
    c3 = pfaff_crossover(1, 2, 2)
    assert c1.value <= c2.value <= c3.value
    from pfaffcensus.bounds import (_pipeline_le_envelope, _x_for_pow2,
                                    _d_cap_for)
    x = _x_for_pow2(c1.k)
    assert _pipeline_le_envelope(1, 1, 1, x, _d_cap_for(x.hi)) is True
    x = _x_for_pow2(c1.k - 1)
    assert _pipeline_le_envelope(1, 1, 1, x, _d_cap_for(x.hi)) is False
    x = _x_for_pow2(2 * c1.k)  # pipeline/envelope < 1 at the square
    assert _pipeline_le_envelope(1, 1, 1, x, _d_cap_for(x.hi)) is True


def test_algebraic_count_bound_value():
    v = algebraic_count_bound(2, 2, 100)
    want = 12 ** 10 * 16 * 100 * math.log(100) ** 5
    assert abs(float(v) / want - 1) < 0.01
    v2 = algebraic_count_bound(2, 2, 200)
    assert abs(float(v2 / v) / (2 * (math.log(200) / math.log(100)) ** 5) - 1) \
        < 0.005
    with pytest.raises(PreconditionError, match="b, c >= 2"):
        algebraic_count_bound(1, 2, 100)
    with pytest.raises(PreconditionError, match="H >= 3"):
        algebraic_count_bound(2, 2, 2)


def test_algebraic_pipeline_constants():
    ap = algebraic_pipeline_constants(2, 2, 5)
    assert ap.singular_budget == 12
    assert ap.slope_budget == 8
    assert ap.graph_budget == 160
    assert ap.monomial_choice == "box(2,5)"
    assert ap.subinterval_budget == 8 * 4 * 100
    assert ap.bezout_cap == 40 and ap.bezout_cap_2d == 40
    assert ap.box_factor == 4
    assert ap.h_exponent == F(2, 2) + F(2, 5)
    assert algebraic_pipeline_constants(3, 2, 7).monomial_choice == "box(3,7)"
    assert algebraic_pipeline_constants(2, 3, 7).monomial_choice == "box(7,3)"
    with pytest.raises(PreconditionError, match="delta"):
        algebraic_pipeline_constants(2, 3, 2)


def test_delta_rule():
    assert delta_rule(3) == 2          # ln 3 = 1.0986
    assert delta_rule(100) == 5        # ln 100 = 4.605
    assert delta_rule(10 ** 6) == 14   # ln 1e6 = 13.8


def test_bound_dominates_pipeline_both_regimes():
    # assembled bidegree bound >= the per-graph pipeline value with the
    # delta selection rule, in both the delta >= d and log H <= d regimes
    for (b, c, H) in ((2, 2, 100), (3, 2, 1000), (2, 2, 5), (5, 5, 10)):
        d = max(b, c)
        delta = max(d, delta_rule(H))
        ap = algebraic_pipeline_constants(b, c, delta, H)
        assert algebraic_count_bound(b, c, H) >= ap.per_graph_value


def test_box_reduce_cases():
    parab = PlaneCurve.from_terms({(0, 1): F(1), (2, 0): F(-1)})  # y - x^2
    case, G, Q = box_reduce(parab, RationalPoint(F(2), F(4)))
    assert case == 4
    assert Q == RationalPoint(F(1, 2), F(1, 4))
    assert Q.height() == 4
    # transformed curve is x^2 - y (same bidegree)
    assert G.bidegree() == (2, 1)
    # the worked scenario: 1 - x^2 y with the x-reciprocal applied
    Fc = PlaneCurve.from_terms({(0, 0): F(1), (2, 1): F(-1)})
    case, G, Q = box_reduce(Fc, RationalPoint(F(2), F(1, 4)))
    assert case == 3 and Q == RationalPoint(F(1, 2), F(1, 4))
    # case 1 is the identity
    line = PlaneCurve.from_terms({(0, 1): F(1), (1, 0): F(-1)})
    case, G, Q = box_reduce(line, RationalPoint(F(1, 2), F(1, 2)))
    assert case == 1 and G.terms() == line.terms()


def test_box_reduce_involution_membership_height():
    rng = random.Random(17)
    curves = [
        ("parabola", PlaneCurve.from_terms({(0, 1): F(1), (2, 0): F(-1)}),
         lambda t: (t, t * t)),
        ("cusp", PlaneCurve.from_terms({(0, 2): F(1), (3, 0): F(-1)}),
         lambda t: (t * t, t ** 3)),
        ("hyperbola", PlaneCurve.from_terms({(1, 1): F(1), (0, 0): F(-1)}),
         lambda t: (t, 1 / t)),
    ]
    checked = 0
    for _, curve, param in curves:
        for _ in range(400):
            t = F(rng.randint(-40, 40), rng.randint(1, 12))
            if t == 0:
                continue
            x, y = param(t)
            P = RationalPoint(x, y)
            case, G, Q = box_reduce(curve, P)
            from pfaffcensus.monomials import evaluate_curve
            assert evaluate_curve(G, Q) == 0
            assert Q.height() == P.height()
            assert abs(Q.x) <= 1 and abs(Q.y) <= 1
            # applying the same case transform twice restores the curve
            assert _transform_terms(G, case).terms() == curve.terms()
            # and the point map is an involution on its region
            x2 = Q.x if case in (1, 2) else 1 / Q.x
            y2 = Q.y if case in (1, 3) else 1 / Q.y
            assert RationalPoint(x2, y2) == P
            checked += 1
    assert checked >= 1000


def test_box_reduce_requires_membership():
    parab = PlaneCurve.from_terms({(0, 1): F(1), (2, 0): F(-1)})
    with pytest.raises(PreconditionError):
        box_reduce(parab, RationalPoint(F(2), F(5)))


def test_box_reduce_malformed_curve():
    from pfaffcensus.bounds import CurveFormatError
    # y * (x - y): divisible by y, so the reciprocal-y transform must refuse
    bad = PlaneCurve.from_terms({(1, 1): F(1), (0, 2): F(-1)})
    with pytest.raises(CurveFormatError):
        _transform_terms(bad, 2)
