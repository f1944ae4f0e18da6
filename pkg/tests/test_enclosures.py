import math
from fractions import Fraction

import pytest

from pfaffcensus.enclosures import (Enclosure, exp_bounds,
                                    exp_sqrt_log_bounds, format_decimal,
                                    iroot, log_bounds, log2_bounds,
                                    parse_number, pow_bounds, root_bounds,
                                    sqrt_bounds)

F = Fraction


def test_iroot():
    assert iroot(0, 5) == 0
    assert iroot(1, 7) == 1
    assert iroot(7 ** 30, 5) == 7 ** 6
    assert iroot(7 ** 30 - 1, 5) == 7 ** 6 - 1
    n = 2 ** 600 + 12345
    r = iroot(n, 97)
    assert r ** 97 <= n < (r + 1) ** 97
    with pytest.raises(ValueError):
        iroot(-1, 2)


def test_enclosure_arithmetic():
    a = Enclosure(F(1, 3), F(1, 2))
    b = Enclosure(F(-2), F(5))
    c = a * b
    assert c.lo == F(-1) and c.hi == F(5, 2)
    assert (a + b).lo == F(1, 3) - 2
    assert (-a).hi == F(-1, 3)
    assert a.pow_int(2).lo == F(1, 9)
    assert Enclosure(F(-2), F(3)).pow_int(2) == Enclosure(F(0), F(9))
    assert b.contains(0)
    with pytest.raises(Exception):
        b.reciprocal()
    assert a.reciprocal() == Enclosure(F(2), F(3))


def test_log_bounds_certified():
    for x in (F(2), F(3, 2), F(10), F(1, 7), F(10 ** 30), F(1, 10 ** 20)):
        enc = log_bounds(x, 80)
        assert enc.width < F(1, 2 ** 80)
        mid = float(enc.midpoint())
        assert abs(mid - math.log(x)) < 1e-12 * max(1, abs(math.log(x)))
    assert log_bounds(F(1), 50) == Enclosure.point(F(0))
    ln2 = log2_bounds(100)
    assert ln2.width < F(1, 2 ** 100)
    assert float(ln2.lo) <= math.log(2) <= float(ln2.hi)
    with pytest.raises(ValueError):
        log_bounds(F(0), 10)


def test_exp_bounds_certified():
    for x in (F(0), F(1), F(-1), F(22, 7), F(-100), F(100)):
        enc = exp_bounds(x, 64)
        want = math.exp(x)
        assert float(enc.lo) <= want * (1 + 1e-12)
        assert want * (1 - 1e-12) <= float(enc.hi)
        if x != 0:
            assert float(enc.width / enc.hi) < 2 ** -56
    big = exp_bounds(F(1135), 64)
    back = log_bounds(big.lo, 64)
    assert abs(float(back.lo) - 1135) < 1e-9


def test_roots_exact_detection():
    assert sqrt_bounds(F(4), 30) == Enclosure.point(F(2))
    assert root_bounds(F(27, 8), 3, 30) == Enclosure.point(F(3, 2))
    enc = sqrt_bounds(F(2), 64)
    assert not enc.is_point and enc.width < F(1, 2 ** 62)
    assert float(enc.lo) <= math.sqrt(2) <= float(enc.hi)


def test_pow_bounds():
    assert pow_bounds(F(4), F(3, 2), 40) == Enclosure.point(F(8))
    assert pow_bounds(F(9, 4), F(-1, 2), 40) == Enclosure.point(F(2, 3))
    enc = pow_bounds(F(2), F(1, 2), 64)
    assert float(enc.lo) <= math.sqrt(2) <= float(enc.hi)
    # large-base route still certified
    base = 10 ** 100 + 7
    enc = pow_bounds(F(base), F(32, 699), 64)
    want = math.exp(math.log(10) * 100 * 32 / 699)
    assert abs(float(enc.lo) / want - 1) < 1e-8
    with pytest.raises(ValueError):
        pow_bounds(F(-2), F(1, 2), 10)


def test_exp_sqrt_log():
    enc = exp_sqrt_log_bounds(5, 100, 64)
    want = math.exp(5 * math.sqrt(math.log(100)))
    assert abs(float(enc.lo) / want - 1) < 1e-9
    assert enc.lo < enc.hi


def test_format_decimal():
    assert format_decimal(F(52797, 10000), 4, "up") == "5.2797"
    assert format_decimal(F(1, 3), 4, "up") == "0.3334"
    assert format_decimal(F(1, 3), 4, "down") == "0.3333"
    assert format_decimal(F(-1, 3), 2, "down") == "-0.34"
    assert format_decimal(F(5), 0, "nearest") == "5"


def test_parse_number():
    assert parse_number("3/2") == F(3, 2)
    assert parse_number("0.4") == F(2, 5)
    assert parse_number(" -7 ") == F(-7)
