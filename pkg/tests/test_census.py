import math
from fractions import Fraction

import pytest

from pfaffcensus.census import (REGISTRY, CurveSpec, PrecisionPolicy,
                                census_algebraic, census_pfaff_exact,
                                census_pfaff_numeric, pow2_count, solve_fiber)
from pfaffcensus.monomials import PlaneCurve
from pfaffcensus.rationals import (RationalPoint, count_rationals,
                                   enumerate_rationals)

F = Fraction

PARABOLA = {(0, 1): F(1), (2, 0): F(-1)}
CIRCLE = {(2, 0): F(1), (0, 2): F(1), (0, 0): F(-1)}
CUSP = {(0, 2): F(1), (3, 0): F(-1)}


def brute_points(terms, H):
    out = set()
    for x in enumerate_rationals(H):
        for y in enumerate_rationals(H):
            if sum(c * x ** h * y ** k for (h, k), c in terms.items()) == 0:
                out.add((x, y))
    return out


def test_parabola_h4():
    rec = census_algebraic(PlaneCurve.from_terms(PARABOLA), 4)
    assert rec.n == 7
    got = {(str(p.x), str(p.y)) for p in rec.points}
    assert got == {("0", "0"), ("1", "1"), ("-1", "1"), ("2", "4"),
                   ("-2", "4"), ("1/2", "1/4"), ("-1/2", "1/4")}


def test_circle_h5_oracle():
    rec = census_algebraic(PlaneCurve.from_terms(CIRCLE), 5)
    want = brute_points(CIRCLE, 5)
    assert {(p.x, p.y) for p in rec.points} == want
    # 4 axis points plus all eight orientations of the 3-4-5 triple
    assert rec.n == len(want) == 12


def test_census_matches_brute_force():
    for terms in (PARABOLA, CIRCLE, CUSP,
                  {(0, 2): F(1), (3, 0): F(-1), (0, 0): F(2)},
                  {(0, 1): F(1, 3), (1, 0): F(1), (0, 0): F(-1, 2)}):
        curve = PlaneCurve.from_terms(terms)
        for H in (3, 9):
            got = {(p.x, p.y) for p in census_algebraic(curve, H).points}
            assert got == brute_points(terms, H)


def cusp_parametrization_oracle(H):
    K = 1
    while (K + 1) ** 3 <= H:
        K += 1
    return {(t * t, t ** 3) for t in enumerate_rationals(K)}


def test_cusp_equals_parametrization_oracle():
    curve = PlaneCurve.from_terms(CUSP)
    for H in (10, 100):
        rec = census_algebraic(curve, H)
        assert {(p.x, p.y) for p in rec.points} == \
            cusp_parametrization_oracle(H)


def test_census_monotone_in_h():
    curve = PlaneCurve.from_terms(CIRCLE)
    prev = -1
    for H in (1, 2, 5, 10, 25, 50):
        n = census_algebraic(curve, H, keep_points=False).n
        assert n >= prev
        prev = n


def test_census_even_symmetry():
    for terms in (PARABOLA, CIRCLE):
        rec = census_algebraic(PlaneCurve.from_terms(terms), 20)
        pts = {(p.x, p.y) for p in rec.points}
        assert {(-x, y) for x, y in pts} == pts


def test_census_parallel_equals_serial():
    curve = PlaneCurve.from_terms(CUSP)
    r1 = census_algebraic(curve, 60, jobs=1)
    r2 = census_algebraic(curve, 60, jobs=4)
    assert r1.n == r2.n and r1.points == r2.points


def test_vertical_fiber_flagged():
    # (x - 1) * y: the fiber over x = 1 is the whole line
    curve = PlaneCurve.from_terms({(1, 1): F(1), (0, 1): F(-1)})
    rec = census_algebraic(curve, 3)
    assert any("vertical fiber" in note for note in rec.notes)
    assert rec.n == count_rationals(3) + (count_rationals(3) - 1)


def test_solve_fiber_paths():
    assert solve_fiber([6, -3], 10) == [F(2)]       # linear
    assert solve_fiber([-4, 0, 1], 10) == [F(-2), F(2)]
    assert solve_fiber([1, 0, 1], 10) == []          # y^2 = -1
    assert solve_fiber([2, 0, 4], 10) == []          # y^2 = -1/2
    assert solve_fiber([0, 0, 0], 10) is None        # degenerate
    assert solve_fiber([5], 10) == []
    # cubic via both solvers
    poly = [-6, 11, -6, 1]  # (y-1)(y-2)(y-3)
    assert solve_fiber(poly, 10) == [F(1), F(2), F(3)]
    assert solve_fiber(poly, 10, solver="isolate") == [F(1), F(2), F(3)]
    assert solve_fiber(poly, 2) == [F(1), F(2)]
    # irrational cubic roots: no rationals
    assert solve_fiber([-2, 0, 0, 1], 100, solver="isolate") == []


def test_solve_fiber_cap_error():
    from pfaffcensus.census import SolverCapError
    big = 2 * 3 * 5 * 7 * 11 * 13 * 17 * 19 * 23
    with pytest.raises(SolverCapError, match="isolate"):
        solve_fiber([big, 1, 1, 1], 10, cap=10)


def test_degree3_census_both_solvers():
    curve = PlaneCurve.from_terms({(0, 3): F(1), (1, 0): F(-1)})  # y^3 = x
    r1 = census_algebraic(curve, 8)
    r2 = census_algebraic(curve, 8, solver="isolate")
    assert r1.n == r2.n == 7
    assert {(p.x, p.y) for p in r1.points} == {(p.x, p.y) for p in r2.points}
    assert {(p.x, p.y) for p in r1.points} == brute_points(
        {(0, 3): F(1), (1, 0): F(-1)}, 8)


def test_pow2_census_values():
    assert census_pfaff_exact("pow2", {}, 4).n == 5 == pow2_count(4)
    assert census_pfaff_exact("pow2", {}, 10).n == 7 == pow2_count(10)
    assert census_pfaff_exact("pow2", {}, 100).n == 13 == pow2_count(100)
    assert census_pfaff_exact("pow2", {}, 10 ** 6).n == 39 == pow2_count(10 ** 6)
    rec = census_pfaff_exact("pow2", {}, 10)
    assert sorted(p.x for p in rec.points) == [F(n) for n in range(-3, 4)]
    for p in rec.points:
        assert p.y == F(2) ** p.x.numerator


def test_exp_census():
    rec = census_pfaff_exact("exp", {}, 10 ** 9)
    assert rec.n == 1
    assert rec.points == [RationalPoint(F(0), F(1))]
    assert any("Hermite" in note for note in rec.notes)


def test_qpow_census():
    rec = census_pfaff_exact("qpow", {"base": "4"}, 16)
    got = {(str(p.x), str(p.y)) for p in rec.points}
    for need in (("0", "1"), ("1", "4"), ("2", "16"), ("-1", "1/4"),
                 ("1/2", "2"), ("3/2", "8"), ("-1/2", "1/2"), ("-3/2", "1/8")):
        assert need in got
    # no half-integer points for a non-square base
    rec = census_pfaff_exact("qpow", {"base": "2"}, 16)
    assert all(p.x.denominator == 1 for p in rec.points)
    rec = census_pfaff_exact("qpow", {"base": "9/4"}, 100)
    assert ("1/2", "3/2") in {(str(p.x), str(p.y)) for p in rec.points}


def test_xpow_census():
    rec = census_pfaff_exact("xpow", {"exponent": "3/2"}, 64)
    got = {(p.x, p.y) for p in rec.points}
    assert (F(4), F(8)) in got and (F(1, 4), F(1, 8)) in got
    assert (F(9, 4), F(27, 8)) in got
    assert all(p.x > 0 for p in rec.points)
    # exact membership on every reported point
    for p in rec.points:
        assert p.y ** 2 == p.x ** 3


def test_unknown_family():
    with pytest.raises(KeyError):
        census_pfaff_exact("mystery", {}, 10)


def test_numeric_matches_exact_registry():
    for name, H in (("pow2", 10), ("pow2", 100), ("exp", 25)):
        fam = REGISTRY[name]
        f = fam.build()
        recN = census_pfaff_numeric(f, F(-H), F(H), H,
                                    member_oracle=fam.member_y)
        recE = census_pfaff_exact(name, {}, H)
        assert recN.status == "exact"
        assert recN.n == recE.n
        assert [(p.x, p.y) for p in recN.points] == \
            [(p.x, p.y) for p in recE.points]
        assert not recN.candidates


def test_numeric_without_oracle_keeps_candidates_out_of_count():
    f = REGISTRY["pow2"].build()
    rec = census_pfaff_numeric(f, F(-4), F(4), 10)
    # exact evaluation certifies the integer points; nothing else is counted
    assert rec.n == 7
    assert all(p.x.denominator == 1 for p in rec.points)
    for cand in rec.candidates:
        assert cand not in rec.points


def test_numeric_width_contract():
    # enclosure width < 1/(2 H^2) forces <= 1 candidate; run on a sloppy
    # function whose values pass near many rationals
    f = REGISTRY["pow2"].build()
    rec = census_pfaff_numeric(f, F(-3), F(3), 40)
    assert rec.status in ("exact", "lower-bound-with-candidates")
    assert rec.n >= pow2_count(8) - 2  # integer points certified exactly


def test_curve_spec_round_trips():
    spec = CurveSpec.from_json({
        "kind": "algebraic", "id": "circle",
        "curve": {"support": [[0, 0], [2, 0], [0, 2]],
                  "coeffs": ["-1", "1", "1"]},
        "irreducible": True})
    assert spec.kind == "algebraic" and spec.irreducible_asserted
    rec = spec.census(5)
    assert rec.n == 12
    spec = CurveSpec.from_json({"kind": "pfaff-exact", "family": "pow2"})
    assert spec.census(100).n == 13
    assert spec.pfaffian_function() is not None
    with pytest.raises(ValueError):
        CurveSpec.from_json({"kind": "nonsense"})
    with pytest.raises(KeyError):
        CurveSpec.from_json({"kind": "pfaff-exact", "family": "nope"})


def test_curve_spec_pfaff_numeric():
    from pfaffcensus.pfaffian import function_to_json, function_of_chain, \
        chain_pow_base
    obj = function_to_json(function_of_chain(chain_pow_base(2)))
    obj["kind"] = "pfaff-numeric"
    obj["id"] = "pow2-numeric"
    spec = CurveSpec.from_json(obj)
    rec = spec.census(10)
    assert rec.n == 7  # integer points certified by exact evaluation
