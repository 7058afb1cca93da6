"""Points, cylinders and clopen sets of the Cantor space 2^omega.

Binary words are plain ``str`` objects over ``"01"``.  Points are eventually
periodic sequences kept in a canonical form, so equality is syntactic.
Distances are exact :class:`fractions.Fraction` values.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import product
from math import gcd
from typing import Iterable, Iterator, Optional

# Alignment grid shared by every tail substitution (see homeo.py).
GRID = 4


def check_word(w: str) -> str:
    if any(c not in "01" for c in w):
        raise ValueError(f"not a binary word: {w!r}")
    return w


def words_of_length(n: int) -> Iterator[str]:
    for bits in product("01", repeat=n):
        yield "".join(bits)


def shortlex(start: int = 0) -> Iterator[str]:
    """All binary words in shortlex order, from length ``start`` on."""
    n = start
    while True:
        yield from words_of_length(n)
        n += 1


def lcp(a: str, b: str) -> int:
    n = min(len(a), len(b))
    for i in range(n):
        if a[i] != b[i]:
            return i
    return n


def comparable(a: str, b: str) -> bool:
    return a.startswith(b) or b.startswith(a)


def _primitive_root(w: str) -> str:
    n = len(w)
    for d in range(1, n + 1):
        if n % d == 0 and w[:d] * (n // d) == w:
            return w[:d]
    return w


@dataclass(frozen=True, order=True)
class Point:
    """The sequence ``pre + per + per + ...`` in canonical form."""

    pre: str
    per: str

    def __post_init__(self):
        check_word(self.pre)
        check_word(self.per)
        if not self.per:
            raise ValueError("period word must be nonempty")
        per = _primitive_root(self.per)
        pre = self.pre
        while pre and pre[-1] == per[-1]:
            pre = pre[:-1]
            per = per[-1] + per[:-1]
        object.__setattr__(self, "pre", pre)
        object.__setattr__(self, "per", per)

    def bit(self, n: int) -> str:
        if n < len(self.pre):
            return self.pre[n]
        return self.per[(n - len(self.pre)) % len(self.per)]

    def prefix(self, n: int) -> str:
        if n <= len(self.pre):
            return self.pre[:n]
        k = n - len(self.pre)
        reps = k // len(self.per) + 1
        return self.pre + (self.per * reps)[:k]

    def shift(self, n: int) -> "Point":
        """The tail of the sequence starting at index ``n``."""
        if n <= len(self.pre):
            return Point(self.pre[n:], self.per)
        k = (n - len(self.pre)) % len(self.per)
        return Point("", self.per[k:] + self.per[:k])

    def split_at(self, n: int, block: int = 1) -> tuple[str, str, str]:
        """Write the tail after index ``n`` as ``u + c^omega`` with
        ``|u|`` and ``|c|`` multiples of ``block``.  Returns (prefix, u, c)."""
        tail = self.shift(n)
        ulen = -(-len(tail.pre) // block) * block
        p = len(tail.per)
        clen = p * block // gcd(p, block)
        u = tail.prefix(ulen)
        c = tail.shift(ulen).prefix(clen)
        return self.prefix(n), u, c

    def __str__(self) -> str:
        return f"{self.pre}~{self.per}"

    @classmethod
    def parse(cls, text: str) -> "Point":
        text = text.strip()
        if text.count("~") != 1:
            raise ValueError(f"point literal needs exactly one '~': {text!r}")
        pre, per = text.split("~")
        if not per:
            raise ValueError(f"empty period in point literal {text!r}")
        return cls(check_word(pre), check_word(per))


def first_difference(x: Point, y: Point) -> Optional[int]:
    """Least index where ``x`` and ``y`` differ, ``None`` if equal."""
    if x == y:
        return None
    bound = max(len(x.pre), len(y.pre)) + len(x.per) * len(y.per)
    for n in range(bound + 1):
        if x.bit(n) != y.bit(n):
            return n
    raise AssertionError("unreachable for canonical points")


def rho(x: Point, y: Point) -> Fraction:
    n = first_difference(x, y)
    return Fraction(0) if n is None else Fraction(1, 1 + n)


def ball_depth(eps: Fraction) -> int:
    """Number of leading symbols fixed by the ball of radius ``eps``."""
    eps = Fraction(eps)
    if eps <= 0:
        raise ValueError("radius must be positive")
    return max(0, int(1 / eps)) if eps <= 1 else 0


def diameter(w: str) -> Fraction:
    """Supremum of rho on the cylinder [w]; rho < 1/(1+n) once n >= |w|."""
    return Fraction(1, 1 + len(w))


class ClopenSet:
    """A finite union of cylinders, stored as a reduced antichain."""

    __slots__ = ("prefixes", "_hash")

    def __init__(self, prefixes: Iterable[str] = ()):
        self.prefixes: tuple[str, ...] = _canonical(prefixes)
        self._hash = hash(self.prefixes)

    @classmethod
    def everything(cls) -> "ClopenSet":
        return cls([""])

    @classmethod
    def parse(cls, text: str) -> "ClopenSet":
        text = text.strip()
        if text in ("", "{}", "empty"):
            return cls()
        items = [t.strip() for t in text.split(",")]
        return cls(check_word("" if t in ("e", "eps") else t) for t in items)

    def __eq__(self, other):
        return isinstance(other, ClopenSet) and self.prefixes == other.prefixes

    def __hash__(self):
        return self._hash

    def __iter__(self):
        return iter(self.prefixes)

    def __len__(self):
        return len(self.prefixes)

    def __bool__(self):
        return bool(self.prefixes)

    def __repr__(self):
        return f"ClopenSet({list(self.prefixes)!r})"

    def __str__(self):
        return ",".join(p if p else "e" for p in self.prefixes) if self.prefixes else "{}"

    def contains(self, x: Point) -> bool:
        return any(x.prefix(len(w)) == w for w in self.prefixes)

    __contains__ = contains

    def covers_word(self, w: str) -> bool:
        """True iff the whole cylinder [w] lies in the set."""
        return any(w.startswith(p) for p in self.prefixes)

    def meets_word(self, w: str) -> bool:
        return any(comparable(w, p) for p in self.prefixes)

    def depth(self) -> int:
        return max((len(p) for p in self.prefixes), default=0)

    def union(self, other: "ClopenSet") -> "ClopenSet":
        return ClopenSet(self.prefixes + other.prefixes)

    def intersection(self, other: "ClopenSet") -> "ClopenSet":
        out = []
        for a in self.prefixes:
            for b in other.prefixes:
                if a.startswith(b):
                    out.append(a)
                elif b.startswith(a):
                    out.append(b)
        return ClopenSet(out)

    def complement(self) -> "ClopenSet":
        return ClopenSet(_complement_under("", self.prefixes))

    def difference(self, other: "ClopenSet") -> "ClopenSet":
        return self.intersection(other.complement())

    def restrict(self, w: str) -> "ClopenSet":
        """Intersection with the cylinder [w]."""
        return self.intersection(ClopenSet([w]))

    def refine(self, n: int) -> list[str]:
        """The set as a list of cylinders, each of length at least ``n``."""
        out = []
        for p in self.prefixes:
            if len(p) >= n:
                out.append(p)
            else:
                out.extend(p + v for v in words_of_length(n - len(p)))
        return out

    def aligned(self, grid: int = GRID) -> list[str]:
        """Cylinders of the set with lengths padded to multiples of ``grid``."""
        out = []
        for p in self.prefixes:
            r = -len(p) % grid
            out.extend(p + v for v in words_of_length(r))
        return out

    def is_subset(self, other: "ClopenSet") -> bool:
        return all(other.covers_word(p) for p in self.prefixes)

    def isdisjoint(self, other: "ClopenSet") -> bool:
        return not any(comparable(a, b) for a in self.prefixes for b in other.prefixes)


def _canonical(prefixes: Iterable[str]) -> tuple[str, ...]:
    ws = sorted(set(check_word(w) for w in prefixes), key=lambda w: (len(w), w))
    kept: set[str] = set()
    for w in ws:
        if not any(w[:i] in kept for i in range(len(w) + 1)):
            kept.add(w)
    # merge siblings bottom-up
    changed = True
    while changed:
        changed = False
        for w in sorted(kept, key=len, reverse=True):
            if w and w in kept:
                sib = w[:-1] + ("1" if w[-1] == "0" else "0")
                if sib in kept:
                    kept.discard(w)
                    kept.discard(sib)
                    kept.add(w[:-1])
                    changed = True
    return tuple(sorted(kept))


def _complement_under(w: str, prefixes: tuple[str, ...]) -> list[str]:
    rel = [p for p in prefixes if comparable(p, w)]
    if not rel:
        return [w]
    if any(w.startswith(p) for p in rel):
        return []
    return _complement_under(w + "0", tuple(rel)) + _complement_under(w + "1", tuple(rel))


def ball(x: Point, eps) -> ClopenSet:
    """The open (and closed) ball {y : rho(x, y) < eps}."""
    return ClopenSet([x.prefix(ball_depth(Fraction(eps)))])


def point_in(x: Point, a: ClopenSet) -> bool:
    return a.contains(x)


def union(a: ClopenSet, b: ClopenSet) -> ClopenSet:
    return a.union(b)


def intersection(a: ClopenSet, b: ClopenSet) -> ClopenSet:
    return a.intersection(b)


def complement(a: ClopenSet) -> ClopenSet:
    return a.complement()


def difference(a: ClopenSet, b: ClopenSet) -> ClopenSet:
    return a.difference(b)


def canonical_clopen(prefixes: Iterable[str]) -> ClopenSet:
    return ClopenSet(prefixes)


def grid_measure(a: ClopenSet, grid: int = GRID) -> int:
    """Additive invariant of clopen sets modulo 2^grid - 1.

    A cylinder of length n counts 2^(grid - n mod grid).  Maps in the block
    class send each cylinder to one whose length agrees mod ``grid``, so they
    preserve this number; two clopens are exchangeable iff it agrees.
    """
    mod = (1 << grid) - 1
    return sum(1 << (grid - len(w) % grid) for w in a.prefixes) % mod


def parse_rational(text: str) -> Fraction:
    return Fraction(text.strip())


def format_rational(q: Fraction) -> str:
    q = Fraction(q)
    return f"{q.numerator}/{q.denominator}"
