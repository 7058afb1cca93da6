"""Homeomorphisms of 2^omega given by finitely many cylinder blocks.

A block ``(s, t, tau)`` sends ``s + z`` to ``t + tau(z)`` where ``tau`` cuts
``z`` into consecutive words of length ``p`` (its period) and permutes each.
Two alignment rules keep the class closed under composition:

* ``p`` divides ``len(s)`` and ``p`` divides ``GRID``;
* ``len(s) == len(t)`` modulo ``GRID``.

With these, every tail substitution reads absolute positions in the same
``GRID``-periodic lattice, so refining a block to ``GRID``-aligned prefixes
always lines up with the blocks of any other map.
"""
from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from math import gcd
from typing import Iterable, Optional, Sequence

from .cantor import (
    GRID,
    ClopenSet,
    Point,
    comparable,
    first_difference,
    grid_measure,
    lcp,
    rho,
    words_of_length,
)


# ---------------------------------------------------------------- substitutions

@dataclass(frozen=True)
class TailSubst:
    period: int
    table: tuple[str, ...]

    def __post_init__(self):
        p = self.period
        if p < 1 or GRID % p:
            raise ValueError(f"period {p} must divide {GRID}")
        if len(self.table) != 1 << p or sorted(self.table) != list(words_of_length(p)):
            raise ValueError("substitution table is not a bijection of p-blocks")

    @classmethod
    def identity(cls) -> "TailSubst":
        return _IDENTITY

    @classmethod
    def from_map(cls, mapping: dict[str, str]) -> "TailSubst":
        p = len(next(iter(mapping)))
        table = tuple(mapping.get(v, v) for v in words_of_length(p))
        return cls(p, table).minimal()

    def block(self, v: str) -> str:
        return self.table[int(v, 2)] if v else ""

    def apply(self, w: str) -> str:
        p = self.period
        if len(w) % p:
            raise ValueError("word length not a multiple of the period")
        return "".join(self.block(w[i:i + p]) for i in range(0, len(w), p))

    def is_identity(self) -> bool:
        return all(self.table[i] == v for i, v in enumerate(words_of_length(self.period)))

    def inverse(self) -> "TailSubst":
        return _inverse(self)

    def lift(self, q: int) -> tuple[str, ...]:
        """Table of the same substitution read on q-blocks (p | q)."""
        return tuple(self.apply(v) for v in words_of_length(q))

    def then(self, other: "TailSubst") -> "TailSubst":
        """``other`` applied after ``self``."""
        return _then(self, other)

    def minimal(self) -> "TailSubst":
        return _minimal(self)

    def fixed_blocks(self) -> tuple[str, ...]:
        return tuple(v for v in words_of_length(self.period) if self.block(v) == v)

    def __str__(self):
        if self.is_identity():
            return ""
        moved = [f"{v}>{self.block(v)}" for v in words_of_length(self.period) if self.block(v) != v]
        return f"[{self.period}: {' '.join(moved)}]"

    @classmethod
    def parse(cls, text: str) -> "TailSubst":
        """``"2: 00>11 11>00"`` (brackets optional); unlisted blocks are fixed."""
        head, _, body = text.strip().strip("[]").partition(":")
        p = int(head)
        mapping = {}
        for item in body.split():
            a, b = item.split(">")
            if len(a) != p or len(b) != p:
                raise ValueError(f"block {item!r} does not have length {p}")
            mapping[a] = b
        table = tuple(mapping.get(v, v) for v in words_of_length(p))
        return cls(p, table).minimal()


_IDENTITY = TailSubst(1, ("0", "1"))


@lru_cache(maxsize=None)
def _inverse(t: TailSubst) -> TailSubst:
    inv = [""] * len(t.table)
    for i, v in enumerate(words_of_length(t.period)):
        inv[int(t.table[i], 2)] = v
    return TailSubst(t.period, tuple(inv))


@lru_cache(maxsize=None)
def _then(a: TailSubst, b: TailSubst) -> TailSubst:
    q = a.period * b.period // gcd(a.period, b.period)
    return TailSubst(q, tuple(b.apply(a.apply(v)) for v in words_of_length(q))).minimal()


@lru_cache(maxsize=None)
def _minimal(t: TailSubst) -> TailSubst:
    p = t.period
    for d in range(1, p):
        if p % d:
            continue
        small = tuple(t.apply(v + "0" * (p - d))[:d] for v in words_of_length(d))
        if sorted(small) != list(words_of_length(d)):
            continue
        cand = TailSubst(d, small)
        if cand.lift(p) == t.table:
            return cand
    return t


def random_subst(rng: random.Random, period: int) -> TailSubst:
    words = list(words_of_length(period))
    img = words[:]
    rng.shuffle(img)
    return TailSubst(period, tuple(img)).minimal()


def transposition(a: str, b: str) -> TailSubst:
    if a == b:
        return _IDENTITY
    return TailSubst.from_map({a: b, b: a})


# ---------------------------------------------------------------------- blocks

@dataclass(frozen=True, order=True)
class HomeoBlock:
    source: str
    target: str
    subst: TailSubst = _IDENTITY

    def __post_init__(self):
        p = self.subst.period
        if len(self.source) % p:
            raise ValueError(f"block {self}: period {p} does not divide |source|")
        if (len(self.source) - len(self.target)) % GRID:
            raise ValueError(f"block {self}: |source| and |target| differ mod {GRID}")

    def __str__(self):
        s = self.source or "e"
        t = self.target or "e"
        sub = str(self.subst)
        return f"{s} -> {t}" + (f" {sub}" if sub else "")

    def inverse(self) -> "HomeoBlock":
        return HomeoBlock(self.target, self.source, self.subst.inverse())

    def restrict(self, w: str) -> list["HomeoBlock"]:
        """Sub-blocks covering [w] ∩ [source]."""
        s = self.source
        if s.startswith(w):
            return [self]
        if not w.startswith(s):
            return []
        v = w[len(s):]
        pad = -len(v) % self.subst.period
        return [HomeoBlock(w + c, self.target + self.subst.apply(v + c), self.subst)
                for c in words_of_length(pad)]

    def aligned(self) -> list["HomeoBlock"]:
        pad = -len(self.source) % GRID
        if not pad:
            return [self]
        return [HomeoBlock(self.source + c, self.target + self.subst.apply(c), self.subst)
                for c in words_of_length(pad)]

    def expand(self) -> list["HomeoBlock"]:
        """Split an aligned block one grid step deeper."""
        return [HomeoBlock(self.source + c, self.target + self.subst.apply(c), self.subst)
                for c in words_of_length(GRID)]

    def apply(self, x: Point) -> Point:
        pre, u, c = x.split_at(len(self.source), self.subst.period)
        return Point(self.target + self.subst.apply(u), self.subst.apply(c))

    @classmethod
    def parse(cls, line: str) -> "HomeoBlock":
        """``"s -> t"`` or ``"s -> t [p: a>b ...]"``; ``e`` is the empty word."""
        line = line.strip()
        subst = _IDENTITY
        if "[" in line:
            line, _, rest = line.partition("[")
            subst = TailSubst.parse(rest.rstrip().rstrip("]"))
        s, arrow, t = line.partition("->")
        if not arrow:
            raise ValueError(f"block literal needs '->': {line!r}")
        s, t = s.strip(), t.strip()
        s = "" if s == "e" else s
        t = "" if t == "e" else t
        return cls(s, t, subst)


def _partition_ok(words: Sequence[str]) -> bool:
    return ClopenSet(words) == ClopenSet.everything() and sum(
        Fraction(1, 1 << len(w)) for w in words) == 1


class BlockHomeo:
    """A homeomorphism of 2^omega in canonical block form (immutable)."""

    __slots__ = ("blocks", "_index", "_maxlen", "_hash", "_inv")

    def __init__(self, blocks: Iterable[HomeoBlock], check: bool = True):
        blocks = list(blocks)
        if check:
            if not _partition_ok([b.source for b in blocks]):
                raise ValueError("block sources do not partition the space")
            if not _partition_ok([b.target for b in blocks]):
                raise ValueError("block targets do not partition the space")
        self.blocks: tuple[HomeoBlock, ...] = _canonical_blocks(blocks)
        self._index = {b.source: b for b in self.blocks}
        self._maxlen = max(len(b.source) for b in self.blocks)
        self._hash = hash(self.blocks)
        self._inv: Optional[BlockHomeo] = None

    @classmethod
    def identity(cls) -> "BlockHomeo":
        return cls([HomeoBlock("", "")], check=False)

    @classmethod
    def bitflip(cls) -> "BlockHomeo":
        return cls([HomeoBlock("0", "1"), HomeoBlock("1", "0")])

    @classmethod
    def parse(cls, text: str) -> "BlockHomeo":
        lines = [ln for ln in (t.strip() for t in text.replace(";", "\n").splitlines()) if ln]
        return cls(HomeoBlock.parse(ln) for ln in lines)

    def __eq__(self, other):
        return isinstance(other, BlockHomeo) and self.blocks == other.blocks

    def __hash__(self):
        return self._hash

    def __len__(self):
        return len(self.blocks)

    def __repr__(self):
        return f"BlockHomeo({'; '.join(map(str, self.blocks))})"

    def __str__(self):
        return "; ".join(map(str, self.blocks))

    def is_identity(self) -> bool:
        return len(self.blocks) == 1 and self.blocks[0] == HomeoBlock("", "")

    def block_for(self, x: Point) -> HomeoBlock:
        for n in range(self._maxlen + 1):
            b = self._index.get(x.prefix(n))
            if b is not None:
                return b
        raise AssertionError("sources do not cover the point")

    def block_over(self, w: str) -> Optional[HomeoBlock]:
        """The block whose source is a prefix of ``w``, if any."""
        for n in range(min(len(w), self._maxlen) + 1):
            b = self._index.get(w[:n])
            if b is not None:
                return b
        return None

    def __call__(self, x: Point) -> Point:
        return self.block_for(x).apply(x)

    def inverse(self) -> "BlockHomeo":
        if self._inv is None:
            inv = BlockHomeo([b.inverse() for b in self.blocks], check=False)
            inv._inv = self
            self._inv = inv
        return self._inv

    def aligned_blocks(self) -> list[HomeoBlock]:
        return [a for b in self.blocks for a in b.aligned()]

    def then(self, g: "BlockHomeo") -> "BlockHomeo":
        """``g ∘ self``: apply self first."""
        return compose(self, g)

    def depth(self) -> int:
        return self._maxlen


def _canonical_blocks(blocks: list[HomeoBlock]) -> tuple[HomeoBlock, ...]:
    cur = {}
    for b in blocks:
        m = b.subst.minimal()
        b = HomeoBlock(b.source, b.target, m) if m is not b.subst else b
        cur[b.source] = b
    changed = True
    while changed:
        changed = False
        groups: dict[tuple, list[HomeoBlock]] = {}
        for b in cur.values():
            p = b.subst.period
            if len(b.source) < p or len(b.target) < p:
                continue
            v = b.source[-p:]
            if b.target[-p:] != b.subst.block(v):
                continue
            parent = b.source[:-p]
            if (len(parent) - len(b.target[:-p])) % GRID:
                continue
            groups.setdefault((parent, b.target[:-p], b.subst), []).append(b)
        for (parent, t, sub), members in groups.items():
            if len(members) == 1 << sub.period and all(m.source in cur for m in members):
                for m in members:
                    del cur[m.source]
                cur[parent] = HomeoBlock(parent, t, sub)
                changed = True
    return tuple(sorted(cur.values()))


# ------------------------------------------------------------------ operations

def compose(f: BlockHomeo, g: BlockHomeo) -> BlockHomeo:
    """The map ``g ∘ f`` (f acts first)."""
    if f.is_identity():
        return g
    if g.is_identity():
        return f
    out = []
    stack = f.aligned_blocks()
    while stack:
        b = stack.pop()
        gb = g.block_over(b.target)
        if gb is None:
            stack.extend(b.expand())
            continue
        w = b.target[len(gb.source):]
        out.append(HomeoBlock(b.source, gb.target + gb.subst.apply(w), b.subst.then(gb.subst)))
    return BlockHomeo(out, check=False)


def invert(f: BlockHomeo) -> BlockHomeo:
    return f.inverse()


def evaluate(f: BlockHomeo, x: Point) -> Point:
    return f(x)


def image_clopen(f: BlockHomeo, a: ClopenSet) -> ClopenSet:
    out = []
    for w in a:
        for b in f.blocks:
            if b.source.startswith(w):
                out.append(b.target)
            elif w.startswith(b.source):
                out.extend(r.target for r in b.restrict(w))
    return ClopenSet(out)


def preimage_clopen(f: BlockHomeo, a: ClopenSet) -> ClopenSet:
    return image_clopen(f.inverse(), a)


def _common_refinement(f: BlockHomeo, g: BlockHomeo):
    stack = f.aligned_blocks()
    while stack:
        b = stack.pop()
        gb = g.block_over(b.source)
        if gb is None:
            stack.extend(b.expand())
            continue
        (gr,) = gb.restrict(b.source)
        yield b, gr


def _pair_agreement(b1: HomeoBlock, b2: HomeoBlock) -> Optional[int]:
    """Least first-difference index of b1(x), b2(x) over x in the (shared)
    aligned source, or None when the two blocks agree everywhere."""
    t1, t2 = b1.target, b2.target
    if not comparable(t1, t2):
        return lcp(t1, t2)
    if t1 == t2:
        a1, a2 = b1.subst.lift(GRID), b2.subst.lift(GRID)
        if a1 == a2:
            return None
        return len(t1) + min(lcp(x, y) for x, y in zip(a1, a2) if x != y)
    if len(t1) > len(t2):
        t1, t2, b1 = t2, t1, b2
    u = t2[len(t1):len(t1) + GRID]
    return len(t1) + min(lcp(x, u) for x in b1.subst.lift(GRID))


def sup_distance(f: BlockHomeo, g: BlockHomeo) -> Fraction:
    """sup over x of rho(f(x), g(x)), exactly."""
    if f == g:
        return Fraction(0)
    best: Optional[int] = None
    for b1, b2 in _common_refinement(f, g):
        n = _pair_agreement(b1, b2)
        if n is not None and (best is None or n < best):
            best = n
            if n == 0:
                break
    return Fraction(0) if best is None else Fraction(1, 1 + best)


def sigma(f: BlockHomeo, g: BlockHomeo) -> Fraction:
    return max(sup_distance(f, g), sup_distance(f.inverse(), g.inverse()))


def witness_point(f: BlockHomeo, g: BlockHomeo) -> Optional[Point]:
    """A point where rho(f(x), g(x)) equals sup_distance(f, g)."""
    target = sup_distance(f, g)
    if target == 0:
        return None
    for b1, b2 in _common_refinement(f, g):
        for v in words_of_length(GRID):
            for tail in ("0", "1"):
                x = Point(b1.source + v, tail)
                if rho(f(x), g(x)) == target:
                    return x
    return None


# ------------------------------------------------------------------ fixed sets

@dataclass(frozen=True)
class FixComponent:
    """The Cantor set ``cyl + F^omega`` with ``F`` a set of p-blocks (|F| >= 2)."""

    cyl: str
    blocks: tuple[str, ...]

    @property
    def period(self) -> int:
        return len(self.blocks[0])

    def contains(self, x: Point) -> bool:
        if x.prefix(len(self.cyl)) != self.cyl:
            return False
        p = self.period
        tail = x.shift(len(self.cyl))
        n = len(tail.pre) + p * len(tail.per) + p
        n += -n % p
        w = tail.prefix(n)
        return all(w[i:i + p] in self.blocks for i in range(0, n, p))

    def intersect_word(self, w: str) -> list["FixComponent"]:
        """Pieces of the component inside the cylinder [w]."""
        if self.cyl.startswith(w):
            return [self]
        if not w.startswith(self.cyl):
            return []
        v = w[len(self.cyl):]
        p = self.period
        full = len(v) - len(v) % p
        for i in range(0, full, p):
            if v[i:i + p] not in self.blocks:
                return []
        r = v[full:]
        if not r:
            return [FixComponent(w, self.blocks)]
        return [FixComponent(self.cyl + v[:full] + f, self.blocks)
                for f in self.blocks if f.startswith(r)]

    def sample(self, k: int = 0) -> Point:
        return Point(self.cyl + self.blocks[k % len(self.blocks)], self.blocks[0])

    def __str__(self):
        return f"{self.cyl or 'e'}·{{{','.join(self.blocks)}}}^w"


@dataclass(frozen=True)
class FixSet:
    points: tuple[Point, ...] = ()
    components: tuple[FixComponent, ...] = ()

    def is_finite(self) -> bool:
        return not self.components

    def is_empty(self) -> bool:
        return not self.points and not self.components

    def __bool__(self):
        return not self.is_empty()

    def contains(self, x: Point) -> bool:
        return x in self.points or any(c.contains(x) for c in self.components)

    def restrict(self, a: ClopenSet) -> "FixSet":
        pts = tuple(x for x in self.points if a.contains(x))
        comps = []
        for c in self.components:
            for w in a:
                comps.extend(c.intersect_word(w))
        return FixSet(pts, tuple(comps))

    def is_subset_of(self, a: ClopenSet) -> bool:
        return self.restrict(a.complement()).is_empty()

    def cover(self, n: int) -> list[str]:
        """Cylinders of length >= n, each meeting the set, covering it."""
        out = set(x.prefix(n) for x in self.points)
        for c in self.components:
            if len(c.cyl) >= n:
                out.add(c.cyl)
                continue
            for v in words_of_length(n - len(c.cyl)):
                if c.intersect_word(c.cyl + v):
                    out.add(c.cyl + v)
        return sorted(out)

    def __str__(self):
        parts = [str(x) for x in self.points] + [str(c) for c in self.components]
        return "{" + ", ".join(parts) + "}"


def _orbit_word(u: str, sub: TailSubst) -> str:
    chunks = [u]
    cur = sub.apply(u)
    while cur != u:
        chunks.append(cur)
        cur = sub.apply(cur)
    return "".join(chunks)


def block_fixed(b: HomeoBlock):
    """Fixed points of one aligned block: (points, components)."""
    s, t = b.source, b.target
    if not comparable(s, t):
        return [], []
    if s == t:
        fixed = b.subst.fixed_blocks()
        if len(fixed) == 1:
            return [Point(s, fixed[0])], []
        if fixed:
            return [], [FixComponent(s, fixed)]
        return [], []
    if t.startswith(s):
        return [Point(s, _orbit_word(t[len(s):], b.subst))], []
    return [Point(t, _orbit_word(s[len(t):], b.subst.inverse()))], []


def fix_set(f: BlockHomeo) -> FixSet:
    pts, comps = [], []
    for b in f.aligned_blocks():
        p, c = block_fixed(b)
        pts.extend(p)
        comps.extend(c)
    return FixSet(tuple(sorted(set(pts))), tuple(sorted(comps, key=lambda c: c.cyl)))


def is_fix_finite(f: BlockHomeo) -> tuple[bool, tuple[Point, ...]]:
    fs = fix_set(f)
    return fs.is_finite(), fs.points if fs.is_finite() else ()


def min_displacement(f: BlockHomeo, u: ClopenSet) -> Optional[Fraction]:
    """min over x in u of rho(f(x), x); None for empty u.

    Raises ValueError when u contains a fixed point of f.
    """
    if not u:
        return None
    best = -1
    for w in u:
        for b in f.blocks:
            if b.source.startswith(w):
                pieces = b.aligned()
            elif w.startswith(b.source):
                pieces = [a for r in b.restrict(w) for a in r.aligned()]
            else:
                continue
            for piece in pieces:
                c, t = piece.source, piece.target
                if not comparable(c, t):
                    n = lcp(c, t)
                elif c == t and not piece.subst.fixed_blocks():
                    p = piece.subst.period
                    n = len(c) + max(lcp(piece.subst.block(v), v) for v in words_of_length(p))
                else:
                    raise ValueError(f"the set meets fix(f) inside [{c}]")
                best = max(best, n)
    return Fraction(1, 1 + best)


# ------------------------------------------------------------------- surgeries

def aligned_cylinders(a: ClopenSet) -> list[str]:
    return sorted(a.aligned(GRID))


def canonical_homeo(u: ClopenSet, v: ClopenSet) -> tuple[HomeoBlock, ...]:
    """Deterministic block map from u onto v (identity tails, lex pairing)."""
    if not u or not v:
        raise ValueError("canonical_homeo needs nonempty clopen sets")
    if grid_measure(u) != grid_measure(v):
        raise ValueError(f"{u} and {v} are not exchangeable in the block class")
    a, b = aligned_cylinders(u), aligned_cylinders(v)
    while len(a) != len(b):
        small = a if len(a) < len(b) else b
        last = small.pop()
        small.extend(last + w for w in words_of_length(GRID))
        small.sort()
    return tuple(HomeoBlock(s, t) for s, t in zip(a, b))


def surgery_replace(f: BlockHomeo, w: ClopenSet, frag: Sequence[HomeoBlock]) -> BlockHomeo:
    """f outside w, the fragment on w."""
    src = ClopenSet(b.source for b in frag)
    if src != w:
        raise ValueError("fragment sources do not cover the window")
    if ClopenSet(b.target for b in frag) != image_clopen(f, w):
        raise ValueError("fragment image differs from f[w]")
    keep = []
    outside = w.complement()
    for b in f.blocks:
        for c in outside:
            if b.source.startswith(c):
                keep.append(b)
            elif c.startswith(b.source):
                keep.extend(b.restrict(c))
    return BlockHomeo(keep + list(frag))


def fragment_on(f: BlockHomeo, w: ClopenSet) -> tuple[HomeoBlock, ...]:
    out = []
    for c in w:
        for b in f.blocks:
            if b.source.startswith(c):
                out.append(b)
            elif c.startswith(b.source):
                out.extend(b.restrict(c))
    return tuple(out)


def _grid_tail(x: Point, n: int) -> str:
    tail = x.shift(n)
    if tail.pre or GRID % len(tail.per):
        raise ValueError(f"period of {x} does not divide the grid {GRID}")
    return tail.per * (GRID // len(tail.per))


def transport_depth(w: ClopenSet, x: Point, y: Point, min_depth: int = 0) -> int:
    fd = first_difference(x, y)
    n = max(min_depth, fd + 1, len(x.pre), len(y.pre))
    n += -n % GRID
    while not (w.covers_word(x.prefix(n)) and w.covers_word(y.prefix(n))):
        n += GRID
    return n


def transport(w: ClopenSet, x: Point, y: Point, min_depth: int = 0) -> BlockHomeo:
    """An involution supported in w exchanging x and y."""
    if not (w.contains(x) and w.contains(y)):
        raise ValueError("transport endpoints must lie in the window")
    if x == y:
        return BlockHomeo.identity()
    n = transport_depth(w, x, y, min_depth)
    a, b = x.prefix(n), y.prefix(n)
    pi = transposition(_grid_tail(x, n), _grid_tail(y, n))
    rest = ClopenSet([a, b]).complement()
    blocks = [HomeoBlock(a, b, pi), HomeoBlock(b, a, pi)]
    blocks += [HomeoBlock(c, c) for c in rest]
    return BlockHomeo(blocks)


# -------------------------------------------------------------- random samples

def _random_partition(rng: random.Random, k: int) -> list[str]:
    leaves = [""]
    while len(leaves) < k:
        w = leaves.pop(rng.randrange(len(leaves)))
        leaves += [w + "0", w + "1"]
    return leaves


def random_homeo(rng: random.Random, max_blocks: int = 6, max_period: int = 4) -> BlockHomeo:
    """A random element of the block class with at most ``max_blocks`` blocks."""
    k = rng.randint(1, max_blocks)
    src = _random_partition(rng, k)
    flips = {}

    def relabel(w):
        out = []
        for i, c in enumerate(w):
            key = "".join(out)
            if key not in flips:
                flips[key] = rng.random() < 0.5
            out.append(("1" if c == "0" else "0") if flips[key] else c)
        return "".join(out)

    tgt = [relabel(w) for w in src]
    by_len: dict[int, list[int]] = {}
    for i, w in enumerate(src):
        by_len.setdefault(len(w) % GRID, []).append(i)
    perm = list(range(k))
    for idx in by_len.values():
        shuffled = idx[:]
        rng.shuffle(shuffled)
        for a, b in zip(idx, shuffled):
            perm[a] = b
    periods = [p for p in (1, 2, 4) if p <= max_period]
    blocks = []
    for i, s in enumerate(src):
        t = tgt[perm[i]]
        choices = [p for p in periods if len(s) % p == 0]
        sub = random_subst(rng, rng.choice(choices))
        blocks.append(HomeoBlock(s, t, sub))
    return BlockHomeo(blocks)


def random_point(rng: random.Random, max_pre: int = 6, periods=(1, 2, 4)) -> Point:
    pre = "".join(rng.choice("01") for _ in range(rng.randint(0, max_pre)))
    p = rng.choice(periods)
    per = "".join(rng.choice("01") for _ in range(p))
    return Point(pre, per)


# ------------------------------------------------------------ finite partials

class PartialBijection:
    """A finite injective partial map between points."""

    __slots__ = ("_fwd", "_bwd")

    def __init__(self, pairs: Iterable[tuple[Point, Point]] = ()):
        self._fwd: dict[Point, Point] = {}
        self._bwd: dict[Point, Point] = {}
        for x, y in pairs:
            self.add(x, y)

    def add(self, x: Point, y: Point) -> None:
        if self._fwd.get(x, y) != y or self._bwd.get(y, x) != x:
            raise ValueError(f"adding {x} -> {y} breaks injectivity")
        self._fwd[x] = y
        self._bwd[y] = x

    def extended(self, x: Point, y: Point) -> "PartialBijection":
        out = PartialBijection(self.pairs())
        out.add(x, y)
        return out

    def __call__(self, x: Point) -> Optional[Point]:
        return self._fwd.get(x)

    def preimage(self, y: Point) -> Optional[Point]:
        return self._bwd.get(y)

    def inverse(self) -> "PartialBijection":
        return PartialBijection((y, x) for x, y in self._fwd.items())

    def pairs(self) -> list[tuple[Point, Point]]:
        return sorted(self._fwd.items())

    def domain(self) -> set[Point]:
        return set(self._fwd)

    def range(self) -> set[Point]:
        return set(self._bwd)

    def then(self, other: "PartialBijection") -> "PartialBijection":
        """``other ∘ self`` where defined."""
        return PartialBijection((x, other(y)) for x, y in self._fwd.items() if other(y) is not None)

    def is_subset(self, other: "PartialBijection") -> bool:
        return all(other(x) == y for x, y in self._fwd.items())

    def agrees_with(self, h: BlockHomeo) -> bool:
        return all(h(x) == y for x, y in self._fwd.items())

    def fixed_points(self) -> set[Point]:
        return {x for x, y in self._fwd.items() if x == y}

    def __len__(self):
        return len(self._fwd)

    def __eq__(self, other):
        return isinstance(other, PartialBijection) and self._fwd == other._fwd

    def __repr__(self):
        return "PartialBijection({" + ", ".join(f"{x}: {y}" for x, y in self.pairs()) + "})"
