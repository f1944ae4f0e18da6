import random
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pfaffcensus.rationals import (RationalPoint, count_rationals,
                                   enumerate_rationals, format_point,
                                   format_rational, height, next_of_height,
                                   parse_point, parse_rational, point_height,
                                   rationals_in_interval, simplest_between)

F = Fraction


def test_height_examples():
    assert height(F(0, 1)) == 1
    assert height(F(3, 2)) == 3
    assert height(F(-7, 9)) == 9


def test_point_height_examples():
    assert point_height(RationalPoint(F(0), F(0))) == 1
    assert point_height(RationalPoint(F(2), F(4))) == 4
    assert point_height(RationalPoint(F(3, 5), F(4, 5))) == 5


rationals = st.fractions(min_value=-50, max_value=50, max_denominator=40)


@given(rationals)
def test_height_symmetry(q):
    assert height(q) == height(-q)
    if q != 0:
        assert height(1 / q) == height(q)


def test_enumerate_small():
    assert list(enumerate_rationals(1)) == [F(-1), F(0), F(1)]
    e2 = enumerate_rationals(2)
    assert len(e2) == 7
    assert set(e2) == {F(0), F(1), F(-1), F(2), F(-2), F(1, 2), F(-1, 2)}
    e4 = enumerate_rationals(4)
    assert F(1, 4) in e4 and F(3, 4) in e4 and F(1, 5) not in e4


def test_enumerate_sorted_brute_force():
    for H in range(1, 25):
        brute = {F(a, b) for b in range(1, H + 1)
                 for a in range(-H, H + 1)}
        brute = {q for q in brute if height(q) <= H}
        got = enumerate_rationals(H)
        assert list(got) == sorted(brute)


def test_enumerate_odd_and_nested():
    for H in range(1, 30):
        assert len(enumerate_rationals(H)) % 2 == 1
        assert set(enumerate_rationals(H)) <= set(enumerate_rationals(H + 1))


def test_count_matches_enumeration():
    for H in (1, 2, 3, 10, 37, 100):
        assert count_rationals(H) == len(enumerate_rationals(H))


def test_interval_examples():
    assert rationals_in_interval(F(2, 5), F(3, 5), 5) == \
        [F(2, 5), F(1, 2), F(3, 5)]
    assert rationals_in_interval(F(49, 100), F(51, 100), 2) == [F(1, 2)]
    assert rationals_in_interval(F(3, 10), F(4, 10), 2) == []


def test_interval_oracle_random():
    rng = random.Random(2024)
    for _ in range(400):
        H = rng.randint(1, 50)
        lo = F(rng.randint(-60, 60), rng.randint(1, 15))
        hi = lo + F(rng.randint(0, 40), rng.randint(1, 15))
        got = rationals_in_interval(lo, hi, H)
        want = [q for q in enumerate_rationals(H) if lo <= q <= hi]
        assert got == want


def test_next_of_height_walk():
    cur = F(-2)
    seen = [cur]
    while True:
        cur = next_of_height(cur, 3)
        if cur is None:
            break
        seen.append(cur)
    assert seen == [q for q in enumerate_rationals(3) if q >= -2]


@given(st.integers(min_value=1, max_value=25), rationals, rationals)
@settings(max_examples=150)
def test_interval_oracle_property(H, a, b):
    lo, hi = min(a, b), max(a, b)
    got = rationals_in_interval(lo, hi, H)
    want = [q for q in enumerate_rationals(H) if lo <= q <= hi]
    assert got == want


def test_simplest_between():
    assert simplest_between(F(2, 5), F(3, 5)) == F(1, 2)
    assert simplest_between(F(0), F(1)) == F(1, 2)
    assert simplest_between(F(5, 2), F(7, 2)) == F(3)
    rng = random.Random(5)
    for _ in range(200):
        a = F(rng.randint(-100, 100), rng.randint(1, 30))
        b = a + F(rng.randint(1, 60), rng.randint(1, 30))
        s = simplest_between(a, b)
        assert a < s < b
        for d in range(1, s.denominator):
            lo_n = (a * d).numerator // (a * d).denominator
            hi_n = (b * d).numerator // (b * d).denominator + 1
            assert not any(a < F(n, d) < b for n in range(lo_n, hi_n + 1))


def test_serialization():
    assert format_rational(F(3, 2)) == "3/2"
    assert format_rational(F(-4)) == "-4"
    assert parse_rational("-7/9") == F(-7, 9)
    p = parse_point("3/5,-4/5")
    assert p == RationalPoint(F(3, 5), F(-4, 5))
    assert format_point(p) == "3/5,-4/5"


def test_height_bound_validation():
    with pytest.raises(ValueError):
        enumerate_rationals(0)
    with pytest.raises(ValueError):
        count_rationals(-3)
