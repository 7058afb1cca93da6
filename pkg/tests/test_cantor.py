from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from cantor_cdh.cantor import (
    ClopenSet, Point, ball, canonical_clopen, complement, difference, format_rational,
    intersection, parse_rational, point_in, rho, union, words_of_length,
)
from conftest import points
from oracles import first_diff

words = st.text(alphabet="01", max_size=5)
clopens = st.lists(words, max_size=4).map(ClopenSet)


def members(a: ClopenSet, depth: int) -> set[str]:
    return {w for w in words_of_length(depth) if a.contains(Point(w, "0"))}


@pytest.mark.parametrize("given_, expected", [
    (["00", "01"], ["0"]),
    (["0", "01"], ["0"]),
    (["0", "10", "110", "111"], [""]),
])
def test_canonical_form(given_, expected):
    assert canonical_clopen(given_).prefixes == tuple(expected)


def test_full_cover_by_exhaustion():
    a = ClopenSet(["0", "10", "110", "111"])
    assert members(a, 3) == set(words_of_length(3))


@pytest.mark.parametrize("x, y, d", [
    ("~0", "~1", Fraction(1)),
    ("~01", "~01", Fraction(0)),
    ("001~1", "000~1", Fraction(1, 3)),
])
def test_rho_values(x, y, d):
    assert rho(Point.parse(x), Point.parse(y)) == d


def test_rho_against_unfolding():
    x, y = Point.parse("001~1"), Point.parse("000~1")
    n = next(i for i in range(8) if x.prefix(8)[i] != y.prefix(8)[i])
    assert rho(x, y) == Fraction(1, 1 + n)


@pytest.mark.parametrize("x, eps, expected, depth", [
    ("~0", Fraction(2), [""], 3),
    ("~10", Fraction(1, 2), ["10"], 4),
    ("~1", Fraction(1, 3), ["111"], 5),
])
def test_ball(x, eps, expected, depth):
    x = Point.parse(x)
    b = ball(x, eps)
    assert b.prefixes == tuple(expected)
    for w in words_of_length(depth):
        z = Point(w, "0")
        assert b.contains(z) == (rho(x, z) < eps)


def test_boolean_examples():
    assert union(ClopenSet(["0"]), ClopenSet(["1"])).prefixes == ("",)
    assert intersection(ClopenSet(["0"]), ClopenSet(["01"])).prefixes == ("01",)
    d = difference(ClopenSet.everything(), ClopenSet(["01", "10"]))
    assert d.prefixes == ("00", "11")
    assert members(d, 2) == {"00", "11"}


def test_membership_examples():
    assert point_in(Point.parse("~01"), ClopenSet(["0"]))
    assert not point_in(Point.parse("1~0"), ClopenSet(["0"]))
    x = Point.parse("01~10")
    assert x.prefix(4) == "0110" and point_in(x, ClopenSet(["0110"]))


def test_point_literals():
    x = Point.parse("01~10")
    assert str(x) == "01~10" and Point.parse(str(x)) == x
    assert Point.parse("0~10") == Point.parse("~01")
    for bad in ("01~", "0a~1", "01"):
        with pytest.raises(ValueError):
            Point.parse(bad)


def test_rationals_roundtrip():
    for q in (Fraction(0), Fraction(1, 3), Fraction(7, 2)):
        assert parse_rational(format_rational(q)) == q


@given(clopens, clopens)
def test_boolean_ops_pointwise(a, b):
    depth = max(a.depth(), b.depth(), 1)
    A, B = members(a, depth), members(b, depth)
    assert members(a.union(b), depth) == A | B
    assert members(a.intersection(b), depth) == A & B
    assert members(a.difference(b), depth) == A - B
    assert members(complement(a), depth) == set(words_of_length(depth)) - A


@given(clopens)
def test_canonical_is_idempotent(a):
    assert ClopenSet(a.prefixes) == a
    assert ClopenSet.parse(str(a)) == a


@given(points, points, points)
def test_ultrametric(x, y, z):
    assert rho(x, y) == rho(y, x)
    assert (rho(x, y) == 0) == (x == y)
    assert rho(x, z) <= max(rho(x, y), rho(y, z))
    n = first_diff(x, y)
    assert rho(x, y) == (0 if n is None else Fraction(1, 1 + n))
