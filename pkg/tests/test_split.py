import random

import pytest

from cantor_cdh.cantor import ClopenSet, Point
from cantor_cdh.cofinitary import seed_generators
from cantor_cdh.split import (
    ASet, Apply, BasicOpen, Clop, Comp, HypothesisError, Join, PeriodicSet, SplitConfig, SplitPoint,
    TermCalculus, build_split, build_tower, check_split, check_term, naive_member, patch_M, interleaving_ok,
    random_term, sample_points, tower_check, tower_extend, Tower, first_bit_swap,
)
from oracles import first_diff

Y0 = Point.parse("~0")


def ok(checks):
    return {c.name: c.ok for c in checks}


def unfold_in_A(space, z, i, depth=40):
    y = space.config.y
    n = first_diff(z, y, depth)
    if n is None:
        return True
    return (n in space.M) == (i == 0)


def test_periodic_set_parsing():
    ev = PeriodicSet.parse("evens")
    assert 0 in ev and 1 not in ev
    m = PeriodicSet.parse("pattern 10 flip 3,4")
    assert 3 in m and 4 not in m and PeriodicSet.parse(str(m)) == m
    assert all(n in PeriodicSet.parse("all") for n in range(20))
    with pytest.raises(ValueError):
        PeriodicSet.parse("primes")


def test_minimal_split():
    s = build_split(SplitConfig(generators=[], N=()))
    assert list(s.orbit) == [Y0]
    assert s.fiber(Y0) == [SplitPoint(Y0, 0), SplitPoint(Y0, 1)]
    assert all(ok(check_split(s, 6)).values())


def test_bitflip_orbit():
    s = build_split(SplitConfig())
    assert set(s.orbit) == {Y0, Point.parse("1~0")}
    assert all(len(s.fiber(x)) == 1 for x in s.N)
    assert len(s.fiber(Point.parse("~1"))) == 1


def test_hypotheses_enforced():
    with pytest.raises(HypothesisError):
        build_split(SplitConfig(generators=seed_generators()))
    with pytest.raises(HypothesisError):
        build_split(SplitConfig(N=(Point.parse("1~0"),)))
    with pytest.raises(HypothesisError):
        build_split(SplitConfig(Y=ClopenSet(["1"])))


def test_N_closed_under_group():
    s = build_split(SplitConfig())
    assert {first_bit_swap()(x) for x in s.N} == set(s.N)


def test_membership_examples():
    s = build_split(SplitConfig())
    e = s.orbit[Y0]
    side0 = BasicOpen(ClopenSet.everything(), e, 0)
    side1 = BasicOpen(ClopenSet.everything(), e, 1)
    assert s.member(SplitPoint(Y0, 0), side0) and not s.member(SplitPoint(Y0, 0), side1)
    assert s.member(SplitPoint(Y0, 1), side1)
    p = SplitPoint(Point.parse("01~1"))
    assert s.member(p, BasicOpen(ClopenSet(["0"]))) and not s.member(p, BasicOpen(ClopenSet(["1"])))
    with pytest.raises(ValueError):
        s.member(SplitPoint(Y0), side0)


def test_membership_against_unfolding():
    s = build_split(SplitConfig(generators=seed_generators(), y=Point.parse("~01"), N=()))
    rng = random.Random(0)
    els = s.elements
    for _ in range(300):
        z = sample_points(rng, 1)[0]
        e = rng.choice(els)
        i = rng.randint(0, 1)
        b = BasicOpen(ClopenSet([z.prefix(rng.randint(0, 3))]), e, i)
        for p in s.fiber(z):
            w = e.f.inverse()(z)
            expect = (p.side == i) if w == s.config.y else unfold_in_A(s, w, i)
            assert s.member(p, b) == expect


def test_lift():
    s = build_split(SplitConfig(generators=seed_generators(), y=Point.parse("~01"), N=(), word_cap=3))
    ident = s.elements[0]
    rng = random.Random(1)
    pts = [p for x in sample_points(rng, 50) for p in s.fiber(x)]
    pts += [SplitPoint(x, i) for x in list(s.orbit)[:10] for i in (0, 1)]
    assert all(s.lift(ident, p) == p for p in pts)
    gens = s.elements[1:5]
    for g in gens:
        ginv = next(e for e in s.elements if e.f == g.f.inverse())
        for p in pts:
            try:
                q = s.lift(g, p)
                back = s.lift(ginv, q)
            except ValueError:
                continue
            assert s.project(q) == g.f(s.project(p)) and back == p


def test_lift_respects_basic_opens():
    s = build_split(SplitConfig(generators=seed_generators(), y=Point.parse("~01"), N=(), word_cap=3))
    g = s.elements[1]
    rng = random.Random(2)
    for x, e in list(s.orbit.items())[:8]:
        if len(e.word) >= 3:
            continue
        for i in (0, 1):
            b = BasicOpen(ClopenSet([x.prefix(3)]), e, i)
            gb = s.lift_open(g, b)
            for z in [x] + sample_points(rng, 20):
                for p in s.fiber(z):
                    try:
                        q = s.lift(g, p)
                    except ValueError:
                        continue
                    assert s.member(p, b) == s.member(q, gb)


def test_check_split_default_and_negative():
    s = build_split(SplitConfig())
    assert all(ok(check_split(s, 8)).values())
    bad = build_split(SplitConfig(M=PeriodicSet.parse("all")))
    res = ok(check_split(bad, 8))
    assert not res["d"]


def test_b_vacuous_without_N():
    s = build_split(SplitConfig(N=()))
    assert ok(check_split(s, 4))["b"]


def test_patch_M():
    s = build_split(SplitConfig(M=PeriodicSet.parse("all")))
    assert not interleaving_ok(s, 8)
    patched = patch_M(s, 8)
    assert patched.flips and interleaving_ok(s, 8)


def test_tags_examples():
    s = build_split(SplitConfig())
    calc = TermCalculus(s)
    assert calc.boundary_tags(Clop(ClopenSet(["01"]))) == ()
    (tag,) = calc.boundary_tags(ASet())
    assert tag.point == Y0 and tag.side == 0 and tag.U == ClopenSet.everything() and len(tag.h.word) == 0
    both = Join(ASet(), Comp(ASet()))
    assert calc.boundary_tags(both) == ()
    rng = random.Random(3)
    for _ in range(50):
        z = Point(Y0.prefix(rng.randint(0, 10)) + "1", rng.choice(["0", "01", "1"]))
        assert calc.member(both, z)


def test_tag_apply_and_complement():
    s = build_split(SplitConfig())
    calc = TermCalculus(s)
    t = Apply((0, 1), ASet())
    (tag,) = calc.boundary_tags(t)
    assert tag.point == Point.parse("1~0") and tag.side == 0
    (ctag,) = calc.boundary_tags(Comp(t))
    assert ctag.side == 1 and ctag.point == tag.point


@pytest.mark.parametrize("gens, y", [([first_bit_swap()], "~0"), (seed_generators(), "~01")])
def test_random_terms(gens, y):
    s = build_split(SplitConfig(generators=gens, y=Point.parse(y), N=()))
    calc = TermCalculus(s)
    rng = random.Random(4)
    for _ in range(60):
        t = random_term(rng, s, 4)
        assert check_term(calc, t, rng, 20) == []


def test_tower_height_one():
    t = build_tower([first_bit_swap()], [ClopenSet(["0"])], 1)
    res = ok(tower_check(t, 6))
    assert all(res.values())
    alone = check_split(t.stages[0].space, 6, samples=20)
    assert all(ok(alone).values())


def test_tower_marked_point_stays_single():
    marked = Point.parse("0~011")
    t = build_tower([first_bit_swap()], [ClopenSet(["0"]), ClopenSet(["01"])], 3, N0=(marked,))
    assert all(ok(tower_check(t, 6)).values())
    assert t.doubling_stages(marked) == []
    for st in t.stages:
        assert len(st.space.fiber(marked)) == 1


def test_tower_fibers():
    t = build_tower(seed_generators(), [ClopenSet(["0"]), ClopenSet(["1"])], 3)
    pts = {x for st in t.stages for x in st.space.orbit}
    assert all(t.fiber_size(x) == 2 for x in pts)
    assert all(ok(tower_check(t, 5)).values())


def test_tower_rejects_empty_target():
    with pytest.raises(ValueError):
        tower_extend(Tower([first_bit_swap()]), ClopenSet())
