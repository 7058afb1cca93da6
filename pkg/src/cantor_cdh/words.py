"""Reduced words over a finite generator registry plus one free letter ``h``.

Words are read right to left: the rightmost letter acts first.  Generator
letters index into a :class:`Registry` of block homeomorphisms; adjacent
generator letters are multiplied out, so a reduced word alternates between
generator letters and runs of ``h`` / ``h^-1``.
"""
from __future__ import annotations

import threading
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import count
from typing import Iterator, Optional, Sequence

from .cantor import Point
from .homeo import BlockHomeo, PartialBijection, compose


@dataclass(frozen=True, order=True)
class Letter:
    kind: str  # "h" or "g"
    index: int = 0
    inv: bool = False

    @classmethod
    def h(cls, inv: bool = False) -> "Letter":
        return cls("h", 0, inv)

    @classmethod
    def g(cls, index: int, inv: bool = False) -> "Letter":
        return cls("g", index, inv)

    @property
    def is_h(self) -> bool:
        return self.kind == "h"

    def sort_key(self) -> tuple[int, int, int]:
        return (0 if self.is_h else 1, self.index, int(self.inv))

    def __str__(self):
        base = "h" if self.is_h else f"g{self.index}"
        return base + ("^-1" if self.inv else "")

    @classmethod
    def parse(cls, token: str) -> "Letter":
        inv = token.endswith("^-1")
        base = token[:-3] if inv else token
        if base == "h":
            return cls.h(inv)
        if base.startswith("g") and base[1:].isdigit():
            return cls.g(int(base[1:]), inv)
        raise ValueError(f"bad letter {token!r}")


H = Letter.h()
H_INV = Letter.h(True)


class Registry:
    """Append-only list of non-identity group elements, addressed by index."""

    def __init__(self, elements: Sequence[BlockHomeo] = ()):
        self._elements: list[BlockHomeo] = []
        self._index: dict[BlockHomeo, int] = {}
        self._lock = threading.Lock()
        self._products: dict[tuple[int, int], Optional[int]] = {}
        for f in elements:
            self.register(f)

    def register(self, f: BlockHomeo) -> int:
        if f.is_identity():
            raise ValueError("the identity is never a generator letter")
        with self._lock:
            i = self._index.get(f)
            if i is None:
                i = len(self._elements)
                self._elements.append(f)
                self._index[f] = i
            return i

    def __len__(self):
        return len(self._elements)

    def __getitem__(self, i: int) -> BlockHomeo:
        return self._elements[i]

    def find(self, f: BlockHomeo) -> Optional[int]:
        return self._index.get(f)

    def snapshot(self) -> tuple[int, ...]:
        return tuple(range(len(self._elements)))

    def inverse_index(self, i: int) -> int:
        return self.register(self._elements[i].inverse())

    def product(self, a: int, b: int) -> Optional[int]:
        """Index of ``g_a ∘ g_b`` (b acts first); None for the identity."""
        key = (a, b)
        if key not in self._products:
            f = compose(self._elements[b], self._elements[a])
            self._products[key] = None if f.is_identity() else self.register(f)
        return self._products[key]

    def letter_map(self, letter: Letter) -> BlockHomeo:
        f = self._elements[letter.index]
        return f.inverse() if letter.inv else f

    def close_under_inverses(self) -> None:
        for i in list(self.snapshot()):
            self.inverse_index(i)


@dataclass(frozen=True)
class GroupWord:
    letters: tuple[Letter, ...] = ()

    def __len__(self):
        return len(self.letters)

    def __str__(self):
        return " ".join(map(str, self.letters)) if self.letters else "1"

    def __getitem__(self, i):
        return self.letters[i]

    @property
    def first(self) -> Letter:
        return self.letters[0]

    @property
    def last(self) -> Letter:
        return self.letters[-1]

    def is_group_element(self) -> bool:
        return not any(x.is_h for x in self.letters)

    def h_count(self) -> int:
        return sum(x.is_h for x in self.letters)

    def lex_key(self) -> tuple:
        return tuple(x.sort_key() for x in self.letters)

    @classmethod
    def parse(cls, text: str, registry: Optional[Registry] = None) -> "GroupWord":
        letters = [Letter.parse(t) for t in text.split() if t != "1"]
        if registry is None:
            return cls(tuple(letters))
        return reduce(letters, registry)


def inverse_letter(x: Letter, registry: Registry) -> Letter:
    if x.is_h:
        return Letter.h(not x.inv)
    if x.inv:
        return Letter.g(x.index)
    return Letter.g(registry.inverse_index(x.index))


def reduce(letters: Sequence[Letter], registry: Registry) -> GroupWord:
    out: list[Letter] = []
    for x in letters:
        if not x.is_h and x.inv:
            x = Letter.g(registry.inverse_index(x.index))
        if out and x.is_h and out[-1].is_h and out[-1].inv != x.inv:
            out.pop()
        elif out and not x.is_h and not out[-1].is_h:
            p = registry.product(out.pop().index, x.index)
            if p is not None:
                out.append(Letter.g(p))
        else:
            out.append(x)
    return GroupWord(tuple(out))


def inverse_word(w: GroupWord, registry: Registry) -> GroupWord:
    return reduce([inverse_letter(x, registry) for x in reversed(w.letters)], registry)


def concat(a: GroupWord, b: GroupWord, registry: Registry) -> GroupWord:
    return reduce(a.letters + b.letters, registry)


def truncate(w: GroupWord, m: int) -> GroupWord:
    """The rightmost ``m`` letters."""
    if not 0 <= m <= len(w):
        raise ValueError(f"truncation length {m} outside 0..{len(w)}")
    return GroupWord(w.letters[len(w) - m:])


def classify(w: GroupWord, registry: Registry) -> str:
    """One of ``"nice"``, ``"short"``, ``"not-short"``."""
    if not w.letters or w.is_group_element():
        raise ValueError("classify needs a word containing h")
    if len(w) >= 2 and w.first == inverse_letter(w.last, registry):
        return "not-short"
    return "nice" if w.last == H else "short"


def is_nice(w: GroupWord, registry: Registry) -> bool:
    return bool(w.letters) and not w.is_group_element() and classify(w, registry) == "nice"


@dataclass(frozen=True)
class TraceStep:
    op: str
    before: GroupWord
    after: GroupWord
    conjugator: Optional[Letter] = None  # after = c·before·c^-1 when set; else after = before^-1

    def __str__(self):
        how = f"conj {self.conjugator}" if self.conjugator else "invert"
        return f"({self.op}) {self.before} => {self.after} [{how}]"


@dataclass(frozen=True)
class Simplified:
    word: GroupWord
    trace: tuple[TraceStep, ...] = field(default_factory=tuple)

    @property
    def inverted(self) -> bool:
        return sum(1 for s in self.trace if s.conjugator is None) % 2 == 1

    def conjugator(self) -> GroupWord:
        """C with ``word = C·input^{±1}·C^-1`` (so fix(word) = C[fix(input)])."""
        return GroupWord(tuple(s.conjugator for s in reversed(self.trace) if s.conjugator))


class ConjugateIntoGroup(ValueError):
    """The word is conjugate to an element of the generator group."""


def _rotate(w: GroupWord, registry: Registry) -> GroupWord:
    return reduce((w.last,) + w.letters[:-1], registry)


def simplify(w: GroupWord, registry: Registry) -> Simplified:
    """Conjugate / invert ``w`` to a nice word, recording each move.

    Every move keeps the word length or shortens it, and the number of
    moves never exceeds ``len(w)``.
    """
    if not w.letters or w.is_group_element():
        raise ValueError("simplify needs a word containing h")
    trace: list[TraceStep] = []

    def step(op, new, conj):
        trace.append(TraceStep(op, cur, new, conj))
        return new

    cur = w
    while True:
        if not cur.letters or cur.is_group_element():
            raise ConjugateIntoGroup(f"{w} is conjugate into the generator group")
        kind = classify(cur, registry)
        first, last = cur.first, cur.last
        if kind == "nice":
            return Simplified(cur, tuple(trace))
        if kind == "not-short":
            cur = step("i", _rotate(cur, registry), last)
        elif not first.is_h and not last.is_h:
            cur = step("ii", _rotate(cur, registry), last)
        elif last == H_INV and not first.is_h:
            cur = step("iii", _rotate(cur, registry), last)
        elif first == H_INV and not last.is_h:
            cur = step("iv", inverse_word(cur, registry), None)
        elif last == H_INV:
            # remaining cases: h^-1 ... h^-1 (including the single letter h^-1)
            cur = step("invert", inverse_word(cur, registry), None)
        else:
            # h ... g: move the trailing generator to the front
            cur = step("rotate", _rotate(cur, registry), last)


# ------------------------------------------------------------------ enumeration

def nice_words(n: int, alphabet: Sequence[Letter]) -> Iterator[GroupWord]:
    """Nice words of length n over the alphabet, in lexicographic order.

    ``alphabet`` lists h, h^-1 and one letter per registered element.
    """
    letters = sorted(set(alphabet), key=Letter.sort_key)
    if n < 1:
        return

    def ok(prev: Letter, x: Letter) -> bool:
        if prev.is_h and x.is_h:
            return prev.inv == x.inv
        return prev.is_h or x.is_h

    def rec(prefix: list[Letter]):
        k = len(prefix)
        if k == n:
            yield GroupWord(tuple(prefix))
            return
        for x in letters:
            if k and not ok(prefix[-1], x):
                continue
            if k == n - 1 and x != H:
                continue
            if k == 0 and n >= 2 and x == H_INV:
                continue
            prefix.append(x)
            yield from rec(prefix)
            prefix.pop()

    yield from rec([])


def enum_key(w: GroupWord, i: int) -> tuple:
    return (len(w) + i, len(w), w.lex_key(), i)


class WordEnumeration:
    """The enumeration of (nice word, ball index) pairs by ``enum_key``."""

    def __init__(self, registry: Registry):
        self.alphabet = (H, H_INV) + tuple(Letter.g(i) for i in registry.snapshot())
        self._cache: list[tuple[GroupWord, int]] = []
        self._by_len: dict[int, list[GroupWord]] = {}
        self._gen = self._generate()

    def words_of_length(self, n: int) -> list[GroupWord]:
        if n not in self._by_len:
            self._by_len[n] = list(nice_words(n, self.alphabet))
        return self._by_len[n]

    def _generate(self):
        for total in count(1):
            for n in range(1, total + 1):
                for w in self.words_of_length(n):
                    yield w, total - n

    def __getitem__(self, k: int) -> tuple[GroupWord, int]:
        while len(self._cache) <= k:
            self._cache.append(next(self._gen))
        return self._cache[k]

    def index_of(self, w: GroupWord, i: int) -> int:
        target = enum_key(w, i)
        for k in count():
            if self[k] == (w, i):
                return k
            if enum_key(*self[k]) > target:
                raise KeyError(f"{w} is not an enumerated nice word")


# -------------------------------------------------------------------- evaluation

def eval_word(w: GroupWord, h: BlockHomeo, registry: Registry) -> BlockHomeo:
    acc = BlockHomeo.identity()
    hinv = h.inverse()
    for x in reversed(w.letters):
        f = (hinv if x.inv else h) if x.is_h else registry.letter_map(x)
        acc = compose(acc, f)
    return acc


def apply_word(w: GroupWord, h, registry: Registry, x: Point) -> tuple[Optional[Point], int]:
    """Letter-by-letter image of x.  ``h`` may be a BlockHomeo or a
    PartialBijection; returns (image, letters applied).  The image is None
    when the partial map is undefined at the next letter."""
    y = x
    for k, letter in enumerate(reversed(w.letters)):
        if letter.is_h:
            if isinstance(h, PartialBijection):
                y = h.preimage(y) if letter.inv else h(y)
            else:
                y = h.inverse()(y) if letter.inv else h(y)
            if y is None:
                return None, k
        else:
            y = registry.letter_map(letter)(y)
    return y, len(w)


def eval_word_partial(w: GroupWord, phi: PartialBijection, registry: Registry) -> PartialBijection:
    if not w.letters:
        return PartialBijection((x, x) for x in phi.domain() | phi.range())
    k = next((j for j, x in enumerate(reversed(w.letters)) if x.is_h), None)
    if k is None:
        raise ValueError("a generator word is total; evaluate it with eval_word")
    head = GroupWord(w.letters[len(w) - k:])
    pre = eval_word(head, BlockHomeo.identity(), registry).inverse()
    hl = w.letters[len(w) - 1 - k]
    starts = phi.range() if hl.inv else phi.domain()
    out = []
    for z in sorted(starts):
        x = pre(z)
        y, _ = apply_word(w, phi, registry, x)
        if y is not None:
            out.append((x, y))
    return PartialBijection(out)


# ------------------------------------------------------------------ continuity

INF = float("inf")


def output_depth(h: BlockHomeo, m) -> float:
    """Leading output bits of h fixed by the first m input bits (a lower bound)."""
    if m == INF:
        return INF
    best = INF
    deep: dict[str, list[str]] = {}
    for b in h.blocks:
        s, p = b.source, b.subst.period
        if len(s) <= m:
            best = min(best, len(b.target) + p * ((m - len(s)) // p))
        else:
            deep.setdefault(s[:m], []).append(b.target)
    for targets in deep.values():
        t0 = targets[0]
        common = min(len(t0), *(_lcp(t0, t) for t in targets))
        best = min(best, common)
    return best


def _lcp(a: str, b: str) -> int:
    n = 0
    for x, y in zip(a, b):
        if x != y:
            break
        n += 1
    return n


def _agreement(w: GroupWord, h: BlockHomeo, registry: Registry, n: int) -> float:
    e = INF
    hinv = h.inverse()
    for x in reversed(w.letters):
        if x.is_h:
            e = min(n, output_depth(hinv if x.inv else h, e))
        else:
            e = output_depth(registry.letter_map(x), e)
    return e


def modulus(w: GroupWord, h: BlockHomeo, eps: Fraction, registry: Registry) -> Fraction:
    """delta with sigma(h, h') < delta  =>  sigma(w[h], w[h']) < eps."""
    eps = Fraction(eps)
    if eps <= 0:
        raise ValueError("eps must be positive")
    need = int(1 / eps)  # agreeing on `need` bits forces rho <= 1/(1+need) < eps
    winv = inverse_word(w, registry)
    for n in count():
        if _agreement(w, h, registry, n) >= need and _agreement(winv, h, registry, n) >= need:
            return Fraction(1, 1 + n)
