"""Bounded-length audits of finitely generated groups of block homeomorphisms.

A group is cofinitary when every non-identity element has finitely many
fixed points.  The audit checks every freely reduced generator word up to a
length cap, so a pass certifies the ball of that radius only.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from itertools import product
from typing import Iterator, Optional, Sequence

from .cantor import Point
from .homeo import BlockHomeo, FixSet, HomeoBlock, TailSubst, compose, fix_set


def complement_map() -> BlockHomeo:
    """Flip every bit."""
    return BlockHomeo([HomeoBlock("", "", TailSubst(1, ("1", "0")))])


def hex_shift() -> BlockHomeo:
    """Order-preserving map on 4-bit letters moving every point other than
    0^w and 1^w strictly up (lexicographically)."""
    z, f = "0000", "1111"
    blocks = [HomeoBlock(z + z, z), HomeoBlock(z + f, f + z), HomeoBlock(f, f + f)]
    for a in range(1, 15):
        a = format(a, "04b")
        blocks.append(HomeoBlock(z + a, a))
        blocks.append(HomeoBlock(a, f + a))
    return BlockHomeo(blocks)


def seed_generators() -> list[BlockHomeo]:
    """Two generators of an infinite dihedral cofinitary group."""
    return [complement_map(), hex_shift()]


def fixed_cylinder_map() -> BlockHomeo:
    """Identity on [0], first-bit swap inside [1]."""
    return BlockHomeo([HomeoBlock("0", "0"), HomeoBlock("10", "11"), HomeoBlock("11", "10")])


@dataclass(frozen=True)
class GeneratorWord:
    """A freely reduced word in generator indices; the rightmost letter acts first."""

    letters: tuple[tuple[int, int], ...]  # (generator index, +1 or -1)

    def __len__(self):
        return len(self.letters)

    def __str__(self):
        return " ".join(f"g{i}" + ("^-1" if e < 0 else "") for i, e in self.letters)

    def inverse(self) -> "GeneratorWord":
        return GeneratorWord(tuple((i, -e) for i, e in reversed(self.letters)))

    def evaluate(self, gens: Sequence[BlockHomeo]) -> BlockHomeo:
        acc = BlockHomeo.identity()
        for i, e in reversed(self.letters):
            acc = compose(acc, gens[i] if e > 0 else gens[i].inverse())
        return acc


@dataclass
class GroupHandle:
    generators: list[BlockHomeo]
    word_cap: int = 3

    def __post_init__(self):
        for g in self.generators:
            if g.is_identity():
                raise ValueError("the identity is not allowed as a generator")
        if len(set(self.generators)) != len(self.generators):
            raise ValueError("generators must be pairwise distinct")


def enumerate_group_words(group: GroupHandle) -> Iterator[GeneratorWord]:
    """Freely reduced words of length 1..L, shortest first, then lexicographic."""
    symbols = [(i, e) for i in range(len(group.generators)) for e in (1, -1)]
    for n in range(1, group.word_cap + 1):
        for letters in product(symbols, repeat=n):
            if all(not (a[0] == b[0] and a[1] == -b[1]) for a, b in zip(letters, letters[1:])):
                yield GeneratorWord(letters)


@dataclass
class WordVerdict:
    word: GeneratorWord
    verdict: str  # "finite", "infinite" or "identity"
    fixed: Optional[FixSet] = None

    def witness(self) -> Optional[str]:
        if self.verdict == "infinite" and self.fixed is not None:
            return str(self.fixed.components[0])
        return None

    def to_json(self) -> dict:
        out = {"word": str(self.word), "verdict": self.verdict}
        if self.fixed is not None and self.verdict == "finite":
            out["fixed_points"] = [str(x) for x in self.fixed.points]
        if self.witness():
            out["witness_component"] = self.witness()
        return out


@dataclass
class AuditReport:
    word_cap: int
    entries: list[WordVerdict] = field(default_factory=list)

    @property
    def violations(self) -> list[WordVerdict]:
        return [e for e in self.entries if e.verdict == "infinite"]

    @property
    def passed(self) -> bool:
        return not self.violations

    def to_json(self) -> dict:
        return {
            "word_cap": self.word_cap,
            "passed": self.passed,
            "words": len(self.entries),
            "collapsed_to_identity": [str(e.word) for e in self.entries if e.verdict == "identity"],
            "violations": [e.to_json() for e in self.violations],
            "entries": [e.to_json() for e in self.entries],
        }

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=2, sort_keys=True)


def audit_word(word: GeneratorWord, gens: Sequence[BlockHomeo]) -> WordVerdict:
    f = word.evaluate(gens)
    if f.is_identity():
        return WordVerdict(word, "identity")
    fs = fix_set(f)
    return WordVerdict(word, "finite" if fs.is_finite() else "infinite", fs)


def audit(group: GroupHandle) -> AuditReport:
    report = AuditReport(group.word_cap)
    for w in enumerate_group_words(group):
        report.entries.append(audit_word(w, group.generators))
    return report


class AuditFailure(ValueError):
    pass


def fix_locus(group: GroupHandle, report: Optional[AuditReport] = None) -> dict[Point, GeneratorWord]:
    """Isolated fixed points of all audited words, each with a witnessing word."""
    report = report or audit(group)
    if not report.passed:
        raise AuditFailure(f"audit failed at {report.violations[0].word}")
    out: dict[Point, GeneratorWord] = {}
    for e in report.entries:
        if e.fixed is not None:
            for x in e.fixed.points:
                out.setdefault(x, e.word)
    return out
