import random
from fractions import Fraction

import pytest
from hypothesis import given

from cantor_cdh.cantor import ClopenSet, Point, diameter, rho, words_of_length
from cantor_cdh.homeo import (
    BlockHomeo, HomeoBlock, PartialBijection, TailSubst, block_fixed, canonical_homeo, compose,
    fix_set, fragment_on, image_clopen, invert, is_fix_finite, min_displacement, random_homeo,
    random_point, sigma, sup_distance, surgery_replace, transport, witness_point,
)
from conftest import homeos, points
from oracles import CANDIDATES, brute_fixed_points, surviving_cylinders

ID = BlockHomeo.identity()
FLIP = BlockHomeo.bitflip()


def clopen_diameter(a: ClopenSet) -> Fraction:
    pre = a.prefixes
    n = min(len(p) for p in pre)
    while any(p[:n] != pre[0][:n] for p in pre):
        n -= 1
    return diameter(pre[0][:n]) if len(pre) > 1 or n < len(pre[0]) else diameter(pre[0])


def sample(rng, n=100):
    return [random_point(rng) for _ in range(n)]


def test_literals_roundtrip():
    f = BlockHomeo.parse("00 -> 11 [1: 0>1 1>0]; 01 -> 01; 10 -> 00; 11 -> 10")
    assert BlockHomeo.parse(str(f)) == f
    assert TailSubst.parse("2: 00>11 11>00") == TailSubst.parse(str(TailSubst.parse("2: 00>11 11>00")))


def test_block_must_respect_grid():
    with pytest.raises(ValueError):
        HomeoBlock("0", "01")
    with pytest.raises(ValueError):
        HomeoBlock("0", "0", TailSubst.parse("2: 00>11 11>00"))


def test_not_a_partition_rejected():
    with pytest.raises(ValueError):
        BlockHomeo([HomeoBlock("0", "0"), HomeoBlock("0", "1")])


def test_compose_examples(rng):
    assert compose(ID, FLIP) == FLIP
    assert compose(FLIP, FLIP) == ID
    for _ in range(20):
        f = random_homeo(rng, 6, 2)
        g = compose(f, invert(f))
        assert g == ID
        assert all(g(x) == x for x in sample(rng))


def test_invert_examples(rng):
    assert invert(ID) == ID and invert(FLIP) == FLIP
    f = BlockHomeo.parse("0 -> 1; 10 -> 00; 11 -> 01")
    g = compose(f, invert(f))
    assert all(g(x) == x for x in sample(rng))


def test_eval_examples():
    x = Point.parse("~01")
    assert ID(x) == x
    assert FLIP(Point.parse("~0")) == Point.parse("1~0")
    f = BlockHomeo([HomeoBlock("01", "01", TailSubst.parse("2: 00>11 11>00")), HomeoBlock("00", "00"),
                    HomeoBlock("1", "1")])
    y = f(Point.parse("01~0011"))
    assert y == Point.parse("01~1100")
    assert y.prefix(14) == "01" + "110011001100"


def test_image_clopen_examples():
    assert not image_clopen(FLIP, ClopenSet())
    assert image_clopen(FLIP, ClopenSet(["0"])) == ClopenSet(["1"])
    f = BlockHomeo.parse("0 -> 1; 10 -> 00; 11 -> 01")
    img = image_clopen(f, ClopenSet(["01"]))
    for w in words_of_length(6):
        z = Point(w, "0")
        assert img.contains(z) == ClopenSet(["01"]).contains(invert(f)(z))


def test_sigma_examples(rng):
    f = random_homeo(rng)
    assert sigma(f, f) == 0
    assert sigma(ID, FLIP) == 1
    assert max(rho(x, FLIP(x)) for x in sample(rng, 1000)) == 1


def test_sup_distance_inside_cylinder():
    g = BlockHomeo.parse("0 -> 0; 10 -> 10; 110 -> 110 [1: 0>1 1>0]; 111 -> 111")
    d = sup_distance(ID, g)
    assert d == Fraction(1, 4)
    best = max(rho(Point(w, "0"), g(Point(w, "0"))) for w in words_of_length(8))
    assert best == d


def test_fix_set_examples():
    whole = fix_set(ID)
    assert not whole.is_finite() and whole.components[0].cyl == ""
    assert fix_set(FLIP).is_empty()
    pts, comps = block_fixed(HomeoBlock("0", "01111"))
    assert pts == [Point.parse("0~1")] and not comps
    assert is_fix_finite(ID)[0] is False
    assert is_fix_finite(FLIP) == (True, ())
    cantor = BlockHomeo([HomeoBlock("0", "0"), HomeoBlock("11", "11", TailSubst.parse("2: 01>10 10>01")),
                         HomeoBlock("10", "10")])
    assert not fix_set(cantor).is_finite()
    counts = [sum(1 for w in words_of_length(d) if w.startswith("11") and all(
        w[i:i + 2] in ("00", "11") for i in range(2, d - 1, 2))) for d in (4, 6, 8)]
    assert counts == [2, 4, 8]


def test_min_displacement_examples():
    assert min_displacement(FLIP, ClopenSet.everything()) == 1
    f = BlockHomeo.parse("0 -> 0; 1 -> 1 [1: 0>1 1>0]")
    with pytest.raises(ValueError):
        min_displacement(f, ClopenSet(["0"]))
    g = BlockHomeo.parse("00 -> 10; 01 -> 11; 10 -> 00; 11 -> 01")
    assert min_displacement(g, ClopenSet(["1"])) == 1


def test_min_displacement_brute(rng):
    for _ in range(40):
        f = random_homeo(rng)
        u = ClopenSet([w for w in words_of_length(2) if rng.random() < 0.5])
        fixed = brute_fixed_points(f)
        try:
            md = min_displacement(f, u)
        except ValueError:
            assert fix_set(f).restrict(u)
            continue
        if md is None:
            continue
        reps = [Point(w, t) for w in words_of_length(10) if u.contains(Point(w, "0")) for t in ("0", "1")]
        assert min(rho(f(x), x) for x in reps) >= md
        assert not any(u.contains(x) for x in fixed)


def test_canonical_homeo_examples():
    frag = canonical_homeo(ClopenSet(["0"]), ClopenSet(["1"]))
    assert all(b.target == "1" + b.source[1:] and b.subst.is_identity() for b in frag)
    frag = canonical_homeo(ClopenSet(["0"]), ClopenSet(["10", "11"]))
    # aligned form of (00 -> 10), (01 -> 11)
    assert all(b.source[:2] in ("00", "01") and b.target == "1" + b.source[1:] for b in frag)
    with pytest.raises(ValueError):
        canonical_homeo(ClopenSet(["0"]), ClopenSet(["10000", "10001"]))
    same = canonical_homeo(ClopenSet(["01"]), ClopenSet(["01"]))
    assert all(b.source == b.target and b.subst.is_identity() for b in same)


def test_transport_examples(rng):
    x = Point.parse("~0")
    assert transport(ClopenSet.everything(), x, x) == ID
    t = transport(ClopenSet.everything(), Point.parse("~0"), Point.parse("~1"))
    assert t(Point.parse("~0")) == Point.parse("~1") and compose(t, t) == ID
    W = ClopenSet(["0"])
    t = transport(W, Point.parse("~0"), Point.parse("0~01"))
    assert t(Point.parse("~0")) == Point.parse("0~01")
    assert all(t(z) == z for z in sample(rng) if not W.contains(z))


def test_surgery_examples(rng):
    for _ in range(20):
        f = random_homeo(rng)
        W = ClopenSet([rng.choice(["0", "1", "01", "110"])])
        assert surgery_replace(f, W, fragment_on(f, W)) == f
        g = surgery_replace(f, W, canonical_homeo(W, image_clopen(f, W)))
        bound = max(clopen_diameter(W), clopen_diameter(image_clopen(f, W)))
        assert sigma(f, g) <= bound
        assert surgery_replace(g, W, fragment_on(f, W)) == f


@given(homeos, homeos, homeos)
def test_group_axioms(f, g, h):
    assert compose(compose(f, g), h) == compose(f, compose(g, h))
    assert compose(ID, f) == f == compose(f, ID)
    assert compose(f, invert(f)) == ID == compose(invert(f), f)
    assert invert(invert(f)) == f
    assert invert(compose(f, g)) == compose(invert(g), invert(f))


@given(homeos, homeos, points)
def test_compose_is_pointwise(f, g, x):
    assert compose(f, g)(x) == g(f(x))
    assert invert(f)(f(x)) == x


@given(homeos, homeos, homeos)
def test_sigma_metric(f, g, h):
    assert sigma(f, g) == sigma(g, f)
    assert (sigma(f, g) == 0) == (f == g)
    assert sigma(f, h) <= max(sigma(f, g), sigma(g, h))


@given(homeos, homeos)
def test_sup_distance_bound_and_witness(f, g):
    d = sup_distance(f, g)
    rng = random.Random(7)
    assert all(rho(f(x), g(x)) <= d for x in sample(rng))
    w = witness_point(f, g)
    assert (w is None) == (d == 0)
    if w is not None:
        assert rho(f(w), g(w)) == d


@given(homeos)
def test_fix_set_against_oracle(f):
    fs = fix_set(f)
    keep = surviving_cylinders(f, 10)
    assert set(fs.cover(10)) <= keep
    for x in fs.points:
        assert f(x) == x
    for c in fs.components:
        assert f(c.sample()) == c.sample()
    for x in brute_fixed_points(f):
        assert fs.contains(x) and x.prefix(10) in keep


@given(homeos, homeos)
def test_conjugation_moves_fixed_points(f, g):
    conj = compose(compose(g, f), invert(g))  # g^-1 o f o g
    a, b = fix_set(f), fix_set(conj)
    assert a.is_finite() == b.is_finite()
    if a.is_finite():
        assert sorted(b.points) == sorted(invert(g)(x) for x in a.points)


@given(points, points)
def test_transport_properties(x, y):
    W = ClopenSet.everything() if x.bit(0) != y.bit(0) else ClopenSet([x.prefix(1)])
    t = transport(W, x, y)
    assert t(x) == y and t(y) == x and compose(t, t) == ID
    rng = random.Random(3)
    assert all(t(z) == z for z in sample(rng, 30) if not W.contains(z))


def test_partial_bijection(rng):
    p = PartialBijection([(Point.parse("~0"), Point.parse("~1"))])
    assert p(Point.parse("~0")) == Point.parse("~1") and p.preimage(Point.parse("~1")) == Point.parse("~0")
    with pytest.raises(ValueError):
        p.add(Point.parse("~01"), Point.parse("~1"))
    assert p.agrees_with(FLIP) is False
    t = transport(ClopenSet.everything(), Point.parse("~0"), Point.parse("~1"))
    assert p.agrees_with(t)
    assert not p.then(p)
