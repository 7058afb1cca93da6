"""Point-doubling of the Cantor set along a group orbit, and finite towers of it.

Fix a point ``y`` and a set ``M`` of naturals.  With ``U_n`` the cylinder of
points first differing from ``y`` at index ``n``, put

    A(0) = {y} ∪ ⋃{U_n : n ∈ M},    A(1) = {y} ∪ ⋃{U_n : n ∉ M}.

The doubled space replaces every orbit point ``h(y)`` by two points, one
on each side ``h[A(0)]`` / ``h[A(1)]``; every other point stays single.  The
space is represented by tagged points and by membership in basic open sets
``U`` (cylinder preimages) and ``U ∩ h[A(i)]``.
"""
from __future__ import annotations

import json
import random
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence, Union

from .cantor import ClopenSet, Point, first_difference, format_rational, words_of_length
from .cofinitary import AuditFailure, GeneratorWord, GroupHandle, audit, fix_locus
from .homeo import BlockHomeo, HomeoBlock, image_clopen
from .words import output_depth


class HypothesisError(ValueError):
    """A precondition of the splitting construction fails."""


# -------------------------------------------------------------- periodic sets

@dataclass(frozen=True)
class PeriodicSet:
    """Naturals n with pattern[n mod len(pattern)], toggled on ``flips``."""

    pattern: tuple[bool, ...] = (True, False)
    flips: frozenset[int] = frozenset()

    def __contains__(self, n: int) -> bool:
        return self.pattern[n % len(self.pattern)] != (n in self.flips)

    def toggled(self, n: int) -> "PeriodicSet":
        return PeriodicSet(self.pattern, self.flips ^ {n})

    @classmethod
    def parse(cls, text: str) -> "PeriodicSet":
        """``evens``, ``odds``, ``all``, ``none`` or ``pattern 10 flip 3,5``."""
        names = {"evens": (True, False), "odds": (False, True), "all": (True,), "none": (False,)}
        parts = text.split()
        if not parts:
            raise ValueError("empty set description")
        if parts[0] in names:
            pattern, rest = names[parts[0]], parts[1:]
        elif parts[0] == "pattern" and len(parts) >= 2 and set(parts[1]) <= {"0", "1"}:
            pattern, rest = tuple(c == "1" for c in parts[1]), parts[2:]
        else:
            raise ValueError(f"bad set description {text!r}")
        flips: frozenset[int] = frozenset()
        if rest:
            if rest[0] != "flip" or len(rest) != 2:
                raise ValueError(f"bad set description {text!r}")
            flips = frozenset(int(t) for t in rest[1].split(","))
        return cls(pattern, flips)

    def __str__(self):
        s = "pattern " + "".join("1" if b else "0" for b in self.pattern)
        if self.flips:
            s += " flip " + ",".join(map(str, sorted(self.flips)))
        return s


# ----------------------------------------------------------------- config

def first_bit_swap() -> BlockHomeo:
    return BlockHomeo.bitflip()


@dataclass
class SplitConfig:
    generators: list[BlockHomeo] = field(default_factory=lambda: [first_bit_swap()])
    word_cap: int = 3
    N: tuple[Point, ...] = (Point("", "01"),)
    Y: ClopenSet = field(default_factory=ClopenSet.everything)
    y: Point = Point("", "0")
    M: PeriodicSet = PeriodicSet()
    close_N: bool = True


@dataclass(frozen=True)
class GroupElement:
    word: GeneratorWord
    f: BlockHomeo


def group_elements(gens: Sequence[BlockHomeo], cap: int) -> list[GroupElement]:
    """Identity plus every reduced word up to the cap, first word per element."""
    out = [GroupElement(GeneratorWord(()), BlockHomeo.identity())]
    seen = {out[0].f}
    if gens:
        from .cofinitary import enumerate_group_words
        for w in enumerate_group_words(GroupHandle(list(gens), cap)):
            f = w.evaluate(gens)
            if f not in seen:
                seen.add(f)
                out.append(GroupElement(w, f))
    return out


def close_under(points: Iterable[Point], elements: Sequence[GroupElement]) -> tuple[Point, ...]:
    return tuple(sorted({e.f(x) for x in points for e in elements}))


# ------------------------------------------------------------------ space

@dataclass(frozen=True, order=True)
class SplitPoint:
    base: Point
    side: Optional[int] = None

    def __str__(self):
        return str(self.base) + ("" if self.side is None else f"@{self.side}")


@dataclass(frozen=True)
class BasicOpen:
    """``U`` (side None) or ``U ∩ h[A(i)]`` with h an enumerated group element."""

    U: ClopenSet
    h: Optional[GroupElement] = None
    side: Optional[int] = None

    def depth(self) -> int:
        return self.U.depth()


class SplitSpace:
    def __init__(self, config: SplitConfig):
        self.config = config
        self.elements = group_elements(config.generators, config.word_cap)
        y = config.y
        if not config.Y.contains(y):
            raise HypothesisError(f"y = {y} is not in Y")
        group = GroupHandle(list(config.generators), config.word_cap)
        try:
            locus = fix_locus(group) if config.generators else {}
        except AuditFailure as exc:
            raise HypothesisError(f"group is not cofinitary at the cap: {exc}") from None
        if y in locus:
            raise HypothesisError(f"y = {y} is fixed by {locus[y]}")
        self.N = close_under(config.N, self.elements) if config.close_N else tuple(config.N)
        if y in self.N:
            raise HypothesisError(f"y = {y} lies in N")
        self.orbit: dict[Point, GroupElement] = {}
        for e in self.elements:
            x = e.f(y)
            prev = self.orbit.get(x)
            if prev is None:
                self.orbit[x] = e
            elif prev.f != e.f:
                raise HypothesisError(f"{prev.word} and {e.word} agree at y")
        self.M = config.M

    # --- the sets U_n and A(i)
    def U(self, n: int) -> ClopenSet:
        y = self.config.y
        flip = "1" if y.bit(n) == "0" else "0"
        return ClopenSet([y.prefix(n) + flip])

    def in_A(self, z: Point, i: int) -> bool:
        n = first_difference(z, self.config.y)
        if n is None:
            return True
        return (n in self.M) == (i == 0)

    # --- points
    def is_doubled(self, x: Point) -> bool:
        return x in self.orbit

    def fiber(self, x: Point) -> list[SplitPoint]:
        if self.is_doubled(x):
            return [SplitPoint(x, 0), SplitPoint(x, 1)]
        return [SplitPoint(x)]

    def check_point(self, p: SplitPoint) -> None:
        if (p.side is not None) != self.is_doubled(p.base):
            raise ValueError(f"malformed split point {p}")

    def project(self, p: SplitPoint) -> Point:
        self.check_point(p)
        return p.base

    def member(self, p: SplitPoint, b: BasicOpen) -> bool:
        self.check_point(p)
        if not b.U.contains(p.base):
            return False
        if b.h is None:
            return True
        z = b.h.f.inverse()(p.base)
        if z == self.config.y:
            return p.side == b.side
        return self.in_A(z, b.side)

    def lift(self, g: GroupElement, p: SplitPoint) -> SplitPoint:
        """The induced map on the doubled space (side kept, relative to g∘h)."""
        self.check_point(p)
        x = g.f(p.base)
        if p.side is None:
            return SplitPoint(x)
        if x not in self.orbit:
            raise ValueError(f"{x} lies outside the enumerated orbit; raise the word cap")
        return SplitPoint(x, p.side)

    def lift_open(self, g: GroupElement, b: BasicOpen) -> BasicOpen:
        U = image_clopen(g.f, b.U)
        if b.h is None:
            return BasicOpen(U)
        gh = _compose_element(g, b.h)
        return BasicOpen(U, gh, b.side)

    def element_for(self, f: BlockHomeo) -> GroupElement:
        for e in self.elements:
            if e.f == f:
                return e
        return GroupElement(GeneratorWord(()), f)


def _compose_element(g: GroupElement, h: GroupElement) -> GroupElement:
    from .homeo import compose
    return GroupElement(GeneratorWord(g.word.letters + h.word.letters), compose(h.f, g.f))


def build_split(config: SplitConfig) -> SplitSpace:
    return SplitSpace(config)


# ---------------------------------------------------------- interleaving of M

def interleaving(space: SplitSpace, depth: int) -> dict[str, list[int]]:
    """For each orbit element with h(y) in Y, the indices n <= depth with
    h[U_n] meeting Y, split by membership in M."""
    out = {}
    Y = space.config.Y
    for x, e in space.orbit.items():
        if not Y.contains(x):
            continue
        hits = [n for n in range(depth + 1) if image_clopen(e.f, space.U(n)).intersection(Y)]
        out[str(e.word) or "1"] = hits
    return out


def interleaving_ok(space: SplitSpace, depth: int) -> bool:
    for hits in interleaving(space, depth).values():
        if not any(n in space.M for n in hits) or all(n in space.M for n in hits):
            return False
    return True


def patch_M(space: SplitSpace, depth: int) -> PeriodicSet:
    """Toggle single indices until every orbit element sees both sides."""
    M = space.M
    for hits in interleaving(space, depth).values():
        inside = [n for n in hits if n in M]
        outside = [n for n in hits if n not in M]
        if hits and not outside and len(inside) > 1:
            M = M.toggled(inside[-1])
        elif hits and not inside and len(outside) > 1:
            M = M.toggled(outside[-1])
    space.M = M
    return M


# --------------------------------------------------------------- checks

@dataclass
class SplitCheck:
    name: str
    ok: bool
    detail: str = ""


def _tail_variants(w: str) -> list[Point]:
    return [Point(w, t) for t in ("0", "1", "01", "001", "0111")]


def crowded_witness(space: SplitSpace, b: BasicOpen, centre: SplitPoint,
                    search: int = 64) -> Optional[SplitPoint]:
    """A point of pi^-1[Y] in b other than centre."""
    Y = space.config.Y
    if b.h is None:
        for c in b.U.intersection(Y):
            for v in ("0", "1", "00", "11"):
                for z in _tail_variants(c + v):
                    for p in space.fiber(z):
                        if p != centre and space.member(p, b):
                            return p
        return None
    y = space.config.y
    for m in range(search):
        if (m in space.M) != (b.side == 0):
            continue
        w = space.U(m).prefixes[0]
        for z0 in _tail_variants(w + "0") + _tail_variants(w + "1"):
            z = b.h.f(z0)
            if not Y.contains(z):
                continue
            for p in space.fiber(z):
                if p != centre and space.member(p, b):
                    return p
    return None


def basic_opens(space: SplitSpace, depth: int) -> list[tuple[BasicOpen, SplitPoint]]:
    """Depth-bounded neighbourhood base at orbit points, plus cylinders meeting Y."""
    out = []
    Y = space.config.Y
    for n in range(depth + 1):
        for w in words_of_length(n):
            if Y.meets_word(w):
                out.append((BasicOpen(ClopenSet([w])), None))
    for x, e in sorted(space.orbit.items()):
        if not Y.contains(x):
            continue
        for n in range(depth + 1):
            for i in (0, 1):
                out.append((BasicOpen(ClopenSet([x.prefix(n)]), e, i), SplitPoint(x, i)))
    return out


def sample_points(rng: random.Random, n: int, max_pre: int = 8) -> list[Point]:
    out = []
    for _ in range(n):
        pre = "".join(rng.choice("01") for _ in range(rng.randint(0, max_pre)))
        per = "".join(rng.choice("01") for _ in range(rng.choice((1, 2, 3, 4))))
        out.append(Point(pre, per))
    return out


def check_split(space: SplitSpace, depth: int, samples: int = 100, seed: int = 0) -> list[SplitCheck]:
    rng = random.Random(seed)
    pts = sample_points(rng, samples)
    orbit = sorted(space.orbit)
    checks = []

    reps = [Point(w, t) for w in words_of_length(depth) for t in ("0", "1")]
    sizes = [len(space.fiber(x)) for x in orbit + pts + reps + list(space.N)]
    checks.append(SplitCheck("a", max(sizes) <= 2, f"max fiber {max(sizes)} over {len(sizes)} points"))

    bad_N = [str(x) for x in space.N if len(space.fiber(x)) != 1]
    checks.append(SplitCheck("b", not bad_N, ", ".join(bad_N)))

    doubled = {x for x in orbit + pts if len(space.fiber(x)) > 1}
    checks.append(SplitCheck("c", doubled == set(orbit), f"{len(orbit)} orbit points"))

    missing = []
    for b, centre in basic_opens(space, depth):
        if centre is None:
            if b.U.intersection(space.config.Y):
                z = crowded_witness(space, b, None)
                z2 = z and crowded_witness(space, b, z)
                if z is None or z2 is None:
                    missing.append(str(b.U))
        elif crowded_witness(space, b, centre) is None:
            missing.append(f"{b.U} side {b.side}")
    checks.append(SplitCheck("d", not missing, "; ".join(missing[:5])))

    bad_e = []
    gens = space.elements[1:1 + 2 * len(space.config.generators)]
    for g in gens:
        for x in orbit + pts:
            for p in space.fiber(x):
                try:
                    q = space.lift(g, p)
                except ValueError:
                    continue
                if space.project(q) != g.f(space.project(p)):
                    bad_e.append(f"{g.word} at {p}")
    checks.append(SplitCheck("e", not bad_e, "; ".join(bad_e[:5])))

    checks.append(SplitCheck("interleaving", interleaving_ok(space, depth)))
    checks.append(SplitCheck("irreducible", _irreducible(space, depth)))
    return checks


def _irreducible(space: SplitSpace, depth: int) -> bool:
    """Every basic open has a projection containing a cylinder."""
    for b, _ in basic_opens(space, depth):
        if b.h is None:
            continue
        found = False
        for m in range(64):
            if (m in space.M) != (b.side == 0):
                continue
            piece = image_clopen(b.h.f, space.U(m)).intersection(b.U)
            if piece:
                found = True
                break
        if not found:
            return False
    return True


def split_report(space: SplitSpace, depth: int, checks: Sequence[SplitCheck]) -> dict:
    return {
        "depth": depth,
        "word_cap": space.config.word_cap,
        "y": str(space.config.y),
        "Y": str(space.config.Y),
        "Y_note": "Y restricted to clopen sets",
        "M": str(space.M),
        "N": [str(x) for x in space.N],
        "orbit": {str(x): (str(e.word) or "1") for x, e in sorted(space.orbit.items())},
        "checks": {c.name: c.ok for c in checks},
        "details": {c.name: c.detail for c in checks if c.detail},
        "passed": all(c.ok for c in checks),
    }


# ------------------------------------------------------ regular closed terms

@dataclass(frozen=True)
class Clop:
    U: ClopenSet


@dataclass(frozen=True)
class ASet:
    pass


@dataclass(frozen=True)
class Comp:
    t: "RCTerm"


@dataclass(frozen=True)
class Join:
    a: "RCTerm"
    b: "RCTerm"


@dataclass(frozen=True)
class Apply:
    letter: tuple[int, int]  # (generator index, +1 or -1)
    t: "RCTerm"


RCTerm = Union[Clop, ASet, Comp, Join, Apply]


def height(t: RCTerm) -> int:
    if isinstance(t, (Clop, ASet)):
        return 0
    if isinstance(t, Join):
        return 1 + max(height(t.a), height(t.b))
    return 1 + height(t.t)


def apply_depth(t: RCTerm) -> int:
    if isinstance(t, (Clop, ASet)):
        return 0
    if isinstance(t, Join):
        return max(apply_depth(t.a), apply_depth(t.b))
    return apply_depth(t.t) + isinstance(t, Apply)


def term_str(t: RCTerm) -> str:
    if isinstance(t, Clop):
        return "{" + str(t.U) + "}"
    if isinstance(t, ASet):
        return "A"
    if isinstance(t, Comp):
        return "~" + term_str(t.t)
    if isinstance(t, Join):
        return f"({term_str(t.a)} | {term_str(t.b)})"
    i, e = t.letter
    return f"g{i}{'^-1' if e < 0 else ''}[{term_str(t.t)}]"


@dataclass(frozen=True)
class BoundaryTag:
    """Near ``point``, the set agrees with ``U ∩ h[A(side)]``."""

    point: Point
    h: GroupElement
    side: int
    U: ClopenSet

    def flipped(self) -> "BoundaryTag":
        return BoundaryTag(self.point, self.h, 1 - self.side, self.U)

    def to_json(self) -> dict:
        return {"point": str(self.point), "word": str(self.h.word) or "1",
                "side": self.side, "U": str(self.U)}


def _pull_depth(f: BlockHomeo, z: Point, n: int) -> int:
    """Depth k with f[[f(z)|k]] preimage inside [z|n]."""
    b = f.block_for(z)
    p = b.subst.period
    extra = max(0, n - len(b.source))
    return len(b.target) + p * (-(-extra // p))


class TermCalculus:
    """Boundaries, membership and separation depths of terms over a split."""

    def __init__(self, space: SplitSpace):
        self.space = space
        self.gens = list(space.config.generators)
        self._tags: dict = {}

    def letter_map(self, letter) -> GroupElement:
        i, e = letter
        g = self.gens[i] if e > 0 else self.gens[i].inverse()
        return GroupElement(GeneratorWord((letter,)), g)

    # --- boundary tags
    def boundary_tags(self, t: RCTerm) -> tuple[BoundaryTag, ...]:
        if apply_depth(t) > self.space.config.word_cap:
            raise ValueError("term applies more generators than the word cap")
        key = t
        if key not in self._tags:
            self._tags[key] = tuple(sorted(self._boundary(t), key=lambda g: g.point))
        return self._tags[key]

    def _boundary(self, t: RCTerm) -> list[BoundaryTag]:
        sp = self.space
        if isinstance(t, Clop):
            return []
        if isinstance(t, ASet):
            return [BoundaryTag(sp.config.y, sp.elements[0], 0, ClopenSet.everything())]
        if isinstance(t, Comp):
            return [tag.flipped() for tag in self.boundary_tags(t.t)]
        if isinstance(t, Apply):
            g = self.letter_map(t.letter)
            return [BoundaryTag(g.f(tag.point), _compose_element(g, tag.h), tag.side,
                                image_clopen(g.f, tag.U))
                    for tag in self.boundary_tags(t.t)]
        ta = {tag.point: tag for tag in self.boundary_tags(t.a)}
        tb = {tag.point: tag for tag in self.boundary_tags(t.b)}
        out = []
        for x in sorted(set(ta) | set(tb)):
            if x in ta and x in tb:
                a, b = ta[x], tb[x]
                if a.h.f != b.h.f:
                    raise HypothesisError(f"two elements move y to {x}")
                if a.side == b.side:
                    out.append(BoundaryTag(x, a.h, a.side, a.U.intersection(b.U)))
                continue
            tag, other = (ta[x], t.b) if x in ta else (tb[x], t.a)
            if self.member(other, x):
                continue
            n = self.clear_depth(other, x)
            out.append(BoundaryTag(x, tag.h, tag.side, tag.U.intersection(ClopenSet([x.prefix(n)]))))
        return out

    def is_boundary(self, t: RCTerm, z: Point) -> bool:
        return any(tag.point == z for tag in self.boundary_tags(t))

    # --- membership in the regular closed set of the base space
    def member(self, t: RCTerm, z: Point) -> bool:
        if not isinstance(t, (Clop, ASet)) and self.is_boundary(t, z):
            return True
        if isinstance(t, Clop):
            return t.U.contains(z)
        if isinstance(t, ASet):
            return self.space.in_A(z, 0)
        if isinstance(t, Comp):
            return not self.member(t.t, z)
        if isinstance(t, Join):
            return self.member(t.a, z) or self.member(t.b, z)
        g = self.letter_map(t.letter)
        return self.member(t.t, g.f.inverse()(z))

    # --- depth n with [z|n] disjoint from t (z outside t)
    def clear_depth(self, t: RCTerm, z: Point) -> int:
        if isinstance(t, Clop):
            return t.U.depth()
        if isinstance(t, ASet):
            return first_difference(z, self.space.config.y) + 1
        if isinstance(t, Comp):
            return self.inside_depth(t.t, z)
        if isinstance(t, Join):
            return max(self.clear_depth(t.a, z), self.clear_depth(t.b, z))
        g = self.letter_map(t.letter).f
        w = g.inverse()(z)
        return _pull_depth(g, w, self.clear_depth(t.t, w))

    # --- depth n with [z|n] inside t (z interior)
    def inside_depth(self, t: RCTerm, z: Point) -> int:
        if isinstance(t, Clop):
            return t.U.depth()
        if isinstance(t, ASet):
            return first_difference(z, self.space.config.y) + 1
        if isinstance(t, Comp):
            return self.clear_depth(t.t, z)
        if isinstance(t, Join):
            for s in (t.a, t.b):
                if self.member(s, z) and not self.is_boundary(s, z):
                    return self.inside_depth(s, z)
            ta = [g for g in self.boundary_tags(t.a) if g.point == z][0]
            tb = [g for g in self.boundary_tags(t.b) if g.point == z][0]
            return max(_cyl_depth(ta.U, z), _cyl_depth(tb.U, z))
        g = self.letter_map(t.letter).f
        w = g.inverse()(z)
        return _pull_depth(g, w, self.inside_depth(t.t, w))


def _cyl_depth(U: ClopenSet, z: Point) -> int:
    for p in U:
        if z.prefix(len(p)) == p:
            return len(p)
    raise ValueError(f"{z} not in {U}")


def naive_member(space: SplitSpace, t: RCTerm, z: Point) -> bool:
    """Membership ignoring boundaries; correct for points off the orbit."""
    if isinstance(t, Clop):
        return t.U.contains(z)
    if isinstance(t, ASet):
        return space.in_A(z, 0)
    if isinstance(t, Comp):
        return not naive_member(space, t.t, z)
    if isinstance(t, Join):
        return naive_member(space, t.a, z) or naive_member(space, t.b, z)
    i, e = t.letter
    g = space.config.generators[i]
    return naive_member(space, t.t, (g.inverse() if e > 0 else g)(z))


def random_term(rng: random.Random, space: SplitSpace, max_height: int, applies: int = 0) -> RCTerm:
    cap = space.config.word_cap
    if max_height == 0 or rng.random() < 0.25:
        if rng.random() < 0.5:
            return ASet()
        ws = {"".join(rng.choice("01") for _ in range(rng.randint(0, 3))) for _ in range(rng.randint(0, 2))}
        return Clop(ClopenSet(sorted(ws)))
    kind = rng.choice(("comp", "join", "apply") if applies < cap and space.config.generators
                      else ("comp", "join"))
    if kind == "comp":
        return Comp(random_term(rng, space, max_height - 1, applies))
    if kind == "join":
        return Join(random_term(rng, space, max_height - 1, applies),
                    random_term(rng, space, max_height - 1, applies))
    letter = (rng.randrange(len(space.config.generators)), rng.choice((1, -1)))
    return Apply(letter, random_term(rng, space, max_height - 1, applies + 1))


def _points_in(rng: random.Random, U: ClopenSet, centre: Point, k: int) -> list[Point]:
    out = []
    for j in range(k):
        if j % 2 == 0:
            n = _cyl_depth(U, centre) + rng.randint(0, 12)
            head = centre.prefix(n) + ("1" if centre.bit(n) == "0" else "0")
        else:
            head = rng.choice(U.prefixes)
        pre = head + "".join(rng.choice("01") for _ in range(rng.randint(0, 6)))
        per = "".join(rng.choice("01") for _ in range(rng.choice((1, 2, 3, 5))))
        out.append(Point(pre, per))
    return out


def check_term(calc: TermCalculus, t: RCTerm, rng: random.Random, per_tag: int = 50) -> list[str]:
    """Problems found with the boundary tags of t (empty if none)."""
    sp = calc.space
    problems = []
    tags = calc.boundary_tags(t)
    for tag in tags:
        if not tag.U.contains(tag.point):
            problems.append(f"{tag.point} outside its U")
        hinv = tag.h.f.inverse()
        for z in _points_in(rng, tag.U, tag.point, per_tag):
            if z in sp.orbit:
                continue
            lhs = naive_member(sp, t, z)
            rhs = sp.in_A(hinv(z), tag.side)
            if lhs != rhs:
                problems.append(f"{term_str(t)}: tag at {tag.point} wrong at {z}")
                break
    flipped = calc.boundary_tags(Comp(t))
    if flipped != tuple(tag.flipped() for tag in tags):
        problems.append(f"{term_str(t)}: complement does not flip sides")
    tagged = {tag.point for tag in tags}
    for x in sp.orbit:
        if x in tagged:
            continue
        inside = calc.member(t, x)
        n = calc.inside_depth(t, x) if inside else calc.clear_depth(t, x)
        for z in _points_in(rng, ClopenSet([x.prefix(n)]), x, 8):
            if z not in sp.orbit and naive_member(sp, t, z) != inside:
                problems.append(f"{term_str(t)}: untagged boundary at {x}")
                break
    return problems


# ------------------------------------------------------------------ towers

@dataclass
class TowerStage:
    target: ClopenSet
    space: SplitSpace
    N_before: tuple[Point, ...]


@dataclass
class Tower:
    generators: list[BlockHomeo]
    word_cap: int = 3
    N0: tuple[Point, ...] = ()
    M: PeriodicSet = PeriodicSet()
    stages: list[TowerStage] = field(default_factory=list)

    @property
    def N(self) -> tuple[Point, ...]:
        """Points that must stay single from now on."""
        pts = set(self.N0)
        for st in self.stages:
            pts |= set(st.space.N) | set(st.space.orbit)
        return tuple(sorted(pts))

    def doubling_stages(self, x: Point) -> list[int]:
        return [k for k, st in enumerate(self.stages) if x in st.space.orbit]

    def fiber_size(self, x: Point) -> int:
        return 2 ** len(self.doubling_stages(x))


def _candidates(target: ClopenSet, limit: int = 4096) -> Iterable[Point]:
    seen = 0
    for n in range(0, 12):
        for w in words_of_length(n):
            if not target.covers_word(w):
                continue
            for per in ("01", "001", "011", "0001", "0111", "0"):
                yield Point(w, per)
                seen += 1
                if seen >= limit:
                    return


def tower_extend(tower: Tower, target: ClopenSet) -> TowerStage:
    """Split at the first admissible point of target; the new orbit joins N."""
    if not target:
        raise ValueError("empty target")
    group = GroupHandle(list(tower.generators), tower.word_cap)
    locus = fix_locus(group) if tower.generators else {}
    elements = group_elements(tower.generators, tower.word_cap)
    N = close_under(tower.N, elements)
    for y in _candidates(target):
        if y in locus or y in N:
            continue
        cfg = SplitConfig(list(tower.generators), tower.word_cap, N, target, y, tower.M, close_N=False)
        space = build_split(cfg)
        if set(space.orbit) & set(N):
            continue
        stage = TowerStage(target, space, N)
        tower.stages.append(stage)
        return stage
    raise HypothesisError(f"no admissible split point in {target}")


def round_robin(targets: Sequence[ClopenSet], height: int) -> list[ClopenSet]:
    return [targets[k % len(targets)] for k in range(height)]


def build_tower(generators: Sequence[BlockHomeo], targets: Sequence[ClopenSet], height: int,
                word_cap: int = 3, N0: Sequence[Point] = (), M: PeriodicSet = PeriodicSet()) -> Tower:
    tower = Tower(list(generators), word_cap, tuple(N0), M)
    for target in round_robin(targets, height):
        tower_extend(tower, target)
    return tower


def tower_check(tower: Tower, depth: int = 6, samples: int = 100, seed: int = 0) -> list[SplitCheck]:
    rng = random.Random(seed)
    pts = sample_points(rng, samples)
    orbit_pts = [x for st in tower.stages for x in st.space.orbit]
    everything = sorted(set(pts) | set(orbit_pts) | set(tower.N))
    checks = []

    worst = max((tower.fiber_size(x) for x in everything), default=1)
    checks.append(SplitCheck("fibers", worst <= 2, f"max composite fiber {worst}"))

    overlaps = [x for x in orbit_pts if len(tower.doubling_stages(x)) > 1]
    checks.append(SplitCheck("one-split", not overlaps, ", ".join(map(str, overlaps[:5]))))

    bad = []
    for k, st in enumerate(tower.stages):
        later = tower.stages[k + 1:]
        carried = set(st.N_before) | set(st.space.orbit)
        for nxt in later:
            if not carried <= set(nxt.N_before):
                bad.append(f"stage {k} -> later")
                break
        if set(st.N_before) & set(st.space.orbit):
            bad.append(f"stage {k} splits a point of N")
    checks.append(SplitCheck("N-propagation", not bad, "; ".join(bad)))

    certs = []
    for k, st in enumerate(tower.stages):
        y = st.space.config.y
        ok = (st.target.contains(y) and tower.doubling_stages(y) == [k]
              and len(st.space.fiber(y)) == 2 and y not in st.N_before)
        if not ok:
            certs.append(f"stage {k}")
    checks.append(SplitCheck("certificates", not certs, ", ".join(certs)))

    failing = []
    for k, st in enumerate(tower.stages):
        sub = check_split(st.space, depth, samples=20, seed=seed + k)
        failing += [f"stage {k} {c.name}" for c in sub if not c.ok]
    checks.append(SplitCheck("stages", not failing, ", ".join(failing[:5])))
    return checks


def tower_report(tower: Tower, checks: Sequence[SplitCheck]) -> dict:
    return {
        "height": len(tower.stages),
        "word_cap": tower.word_cap,
        "stages": [{"target": str(st.target), "y": str(st.space.config.y),
                    "orbit": sorted(str(x) for x in st.space.orbit),
                    "N_before": len(st.N_before)} for st in tower.stages],
        "checks": {c.name: c.ok for c in checks},
        "details": {c.name: c.detail for c in checks if c.detail},
        "passed": all(c.ok for c in checks),
    }
