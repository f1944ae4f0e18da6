import math
import random
from fractions import Fraction

import pytest

from pfaffcensus.enclosures import Enclosure, PrecisionError
from pfaffcensus.pfaffian import (ChainPoly, Const, PfaffianFunction,
                                  SLOPE_MIDDLE, SLOPE_RISING, chain_exp,
                                  chain_log, chain_pow_base, chain_power,
                                  chain_reciprocal_quadratic, certified_sign,
                                  derivative, derivatives_up_to, evaluate,
                                  function_from_json, function_of_chain,
                                  function_to_json, inverse_derivative_zero_bound,
                                  isolate_zeros, sign_partition,
                                  slope_piece_budget, slope_trichotomy,
                                  zero_count_bound)
from pfaffcensus.rationals import rationals_in_interval

F = Fraction


def corpus():
    return [
        function_of_chain(chain_exp()),
        function_of_chain(chain_pow_base(2)),
        function_of_chain(chain_pow_base(F(3, 2))),
        function_of_chain(chain_reciprocal_quadratic()),
        function_of_chain(chain_log(), slot=2),
        function_of_chain(chain_power(F(5, 2)), slot=2),
    ]


def test_const_algebra():
    two = Const.rational(2)
    l2 = Const.log_of(2)
    assert (l2 * l2 + two * l2).as_dict() == {
        (F(2), F(2)): F(1), (F(2),): F(2)}
    assert Const.log_of(4).as_dict() == {(F(2),): F(2)}  # log 4 = 2 log 2
    assert Const.log_of(F(1, 2)).as_dict() == {(F(2),): F(-1)}
    assert (l2 - l2).is_zero
    enc = l2.enclosure(64)
    assert float(enc.lo) <= math.log(2) <= float(enc.hi)


def test_derivative_exp_chain():
    f = function_of_chain(chain_exp())
    d = derivative(f)
    assert d.P.terms == f.P.terms and d.beta == 1


def test_derivative_reciprocal_quadratic():
    f = function_of_chain(chain_reciprocal_quadratic())
    d = derivative(f)
    assert str(d.P) == "(-2)*x^1*y1^2"
    assert d.beta == 3  # beta + (alpha - 1) = 1 + 2


def test_derivative_pow2_third():
    f = function_of_chain(chain_pow_base(2))
    d3 = derivatives_up_to(f, 3)[3]
    (m, c), = d3.P.terms
    assert m == (0, 1)
    assert c.as_dict() == {(F(2), F(2), F(2)): F(1)}  # (log 2)^3 y1
    assert d3.beta == 1


def test_degree_law_corpus():
    for f in corpus():
        ds = derivatives_up_to(f, 10)
        for k, dk in enumerate(ds):
            if dk.P.is_zero:
                continue
            assert dk.P.total_degree() <= f.beta + k * (f.alpha - 1)
            assert dk.beta <= f.beta + k * (f.alpha - 1)


def test_zero_count_bound_examples():
    assert zero_count_bound(1, 1, 1, 1) == 2
    assert zero_count_bound(1, 1, 1, 3) == 12
    assert zero_count_bound(2, 1, 1, 1) == 18
    with pytest.raises(ValueError):
        zero_count_bound(0, 1, 1, 1)


def test_inverse_derivative_zero_bound():
    assert inverse_derivative_zero_bound(1, 1, 1, 1) == 0
    assert inverse_derivative_zero_bound(1, 1, 1, 2) == 2
    # formula value (the worked example sheet for this entry mis-multiplies):
    # inner degree (k-1)(beta + k(alpha-1)) = 1 * (1 + 2*2) = 5,
    # so 2^0 * 5 * (3 + 5)^1 = 40
    assert inverse_derivative_zero_bound(1, 3, 1, 2) == 40
    with pytest.raises(ValueError):
        inverse_derivative_zero_bound(1, 1, 1, 0)


def test_evaluate_exact_points():
    f2 = function_of_chain(chain_pow_base(2))
    enc = evaluate(f2, F(3), 30)
    assert enc.is_point and enc.lo == 8
    fe = function_of_chain(chain_exp())
    assert evaluate(fe, F(0), 30) == Enclosure.point(F(1))
    fp = function_of_chain(chain_power(F(5, 2)), slot=2)
    assert evaluate(fp, F(4), 40).is_point
    assert evaluate(fp, F(4), 40).lo == 32


def test_evaluate_certified_width():
    f2 = function_of_chain(chain_pow_base(2))
    enc = evaluate(f2, F(1, 2), 20)
    assert enc.width < F(1, 2 ** 20)
    assert float(enc.lo) <= math.sqrt(2) <= float(enc.hi)
    # all height-<=4 rationals are excluded by the enclosure
    assert rationals_in_interval(enc.lo, enc.hi, 4) == []


def test_evaluate_domain_error():
    fl = function_of_chain(chain_log(), slot=2)
    with pytest.raises(ValueError):
        evaluate(fl, F(-1), 20)


def test_finite_difference_consistency():
    rng = random.Random(7)
    h = F(1, 1 << 17)
    for f in corpus():
        d = derivative(f)
        for _ in range(6):
            x = F(rng.randint(20, 200), 100)  # safely inside every domain
            fp = evaluate(d, x, 90).midpoint()
            lo = evaluate(f, x - h, 90).midpoint()
            hi = evaluate(f, x + h, 90).midpoint()
            fd = (hi - lo) / (2 * h)
            scale = max(abs(fp), F(1, 10 ** 6))
            assert abs(fd - fp) / scale < F(1, 10 ** 6)


def test_sign_partition_pow2():
    f2 = function_of_chain(chain_pow_base(2))
    pieces = sign_partition(f2, F(-1), F(1), 3)
    assert len(pieces) == 1 and pieces[0].signs == (1, 1, 1)


def test_sign_partition_exp_taylor_remainder():
    # f = e^x - 1 - x - x^2/2: f' >= 0 with a single (double) zero at 0
    P = ChainPoly.from_terms(2, {(0, 1): 1, (0, 0): -1, (1, 0): -1,
                                 (2, 0): F(-1, 2)})
    g = PfaffianFunction(chain_exp(), P, 2)
    pieces = sign_partition(g, F(-1), F(1), 1)
    assert len(pieces) == 2
    assert pieces[0].right.exact and pieces[0].right.lo == 0
    assert pieces[0].signs == (1,) and pieces[1].signs == (1,)


def test_sign_partition_identically_zero():
    lin = PfaffianFunction(chain_exp(), ChainPoly.from_terms(2, {(1, 0): 1}), 1)
    pieces = sign_partition(lin, F(0), F(1), 3)
    assert len(pieces) == 1 and pieces[0].signs == (1, 0, 0)


def test_sign_partition_pieces_cover_and_differ():
    P = ChainPoly.from_terms(2, {(0, 1): 1, (2, 0): F(-1, 2), (1, 0): -1})
    g = PfaffianFunction(chain_exp(), P, 2)  # e^x - x^2/2 - x
    pieces = sign_partition(g, F(-3), F(3), 3)
    assert pieces[0].left.lo == -3 and pieces[-1].right.hi == 3
    for a, b in zip(pieces, pieces[1:]):
        assert a.right == b.left  # shared cuts partition the interval
        assert a.signs != b.signs  # adjacent pieces differ in some order


def test_slope_trichotomy_pow2():
    f2 = function_of_chain(chain_pow_base(2))
    pieces = slope_trichotomy(f2, F(-2), F(2))
    assert [p.label for p in pieces] == [SLOPE_MIDDLE, SLOPE_RISING]
    cut = pieces[0].right
    assert 0.52 < float(cut.lo) <= float(cut.hi) < 0.54
    assert len(pieces) <= slope_piece_budget(1, 1, 1)


def test_slope_trichotomy_exp_on_unit():
    fe = function_of_chain(chain_exp())
    pieces = slope_trichotomy(fe, F(0), F(1))
    assert len(pieces) == 1 and pieces[0].label == SLOPE_RISING


def test_slope_trichotomy_linear_half():
    half = PfaffianFunction(chain_exp(),
                            ChainPoly.from_terms(2, {(1, 0): F(1, 2)}), 1)
    pieces = slope_trichotomy(half, F(-3), F(3))
    assert len(pieces) == 1 and pieces[0].label == SLOPE_MIDDLE


def test_empirical_zero_counts_random_cubics():
    rng = random.Random(12345)
    bound = zero_count_bound(1, 1, 1, 3)
    assert bound == 12
    chain = chain_pow_base(2)
    for _ in range(30):
        while True:
            coeffs = {}
            for h in range(4):
                for k in range(4 - h):
                    c = rng.randint(-9, 9)
                    if c:
                        coeffs[(h, k)] = F(c)
            if coeffs and any(k > 0 for _, k in coeffs):
                break
        Fn = PfaffianFunction(chain, ChainPoly.from_terms(2, coeffs), 3)
        cuts = isolate_zeros(Fn, F(-10), F(10))
        assert len(cuts) <= bound


def test_certified_sign_exact_zero():
    fe = function_of_chain(chain_exp())
    g = PfaffianFunction(fe.chain, fe.P.shift_rational(-1), 1)  # e^x - 1
    assert certified_sign(g, F(0), 256) == 0
    assert certified_sign(g, F(1, 7), 256) == 1
    assert certified_sign(g, F(-1, 7), 256) == -1


def test_json_round_trip():
    P = ChainPoly.from_terms(2, {(0, 1): 1, (0, 0): -1, (1, 0): -1,
                                 (2, 0): F(-1, 2)})
    g = PfaffianFunction(chain_exp(), P, 2)
    j = function_to_json(g)
    g2 = function_from_json(j)
    assert g2.P.terms == g.P.terms and g2.beta == g.beta
    fp = function_of_chain(chain_power(F(5, 2)), slot=2)
    j = function_to_json(fp)
    assert j["evaluator"] == "xpow"
    f3 = function_from_json(j)
    assert f3.chain.evaluator.e == F(5, 2)
    f2 = function_of_chain(chain_pow_base(2))
    assert function_to_json(f2)["evaluator"] == "exp2"
    # log-coefficient chains survive the round trip
    fq = function_of_chain(chain_pow_base(F(3, 2)))
    j = function_to_json(fq)
    assert function_from_json(j).chain.g[0].terms == fq.chain.g[0].terms


def test_json_rejects_unknown_evaluator():
    f2 = function_of_chain(chain_pow_base(2))
    j = function_to_json(f2)
    j["evaluator"] = "mystery"
    with pytest.raises(ValueError):
        function_from_json(j)


def test_triangularity_enforced():
    # g_1 may not use y_2
    g1 = ChainPoly.from_terms(3, {(0, 0, 1): 1})
    g2 = ChainPoly.from_terms(3, {(0, 1, 0): 1})
    from pfaffcensus.pfaffian import PfaffianChain, LogEvaluator
    with pytest.raises(ValueError):
        PfaffianChain(2, 1, (g1, g2), LogEvaluator())
