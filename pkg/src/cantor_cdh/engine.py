"""Finite-stage back-and-forth construction of a homeomorphism h_K.

Each step extends a finite partial bijection ``phi`` between two countable
dense families ``D`` and ``E``, moves the current map ``h`` by less than a
computed budget so that ``phi ⊆ h`` still holds, and then clears the fixed
points of one more word ``w[h]`` away from a finite set of committed balls.
Every invariant is re-checked with exact arithmetic after every step.
"""
from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import count
from typing import Iterator, Optional, Sequence

from .cantor import (
    GRID,
    ClopenSet,
    Point,
    ball,
    ball_depth,
    first_difference,
    format_rational,
    grid_measure,
    shortlex,
    words_of_length,
)
from .cofinitary import GroupHandle, audit, seed_generators
from .homeo import (
    BlockHomeo,
    HomeoBlock,
    PartialBijection,
    canonical_homeo,
    compose,
    fix_set,
    image_clopen,
    min_displacement,
    sigma,
    surgery_replace,
    transport,
)
from .words import (
    GroupWord,
    Letter,
    Registry,
    WordEnumeration,
    apply_word,
    eval_word,
    eval_word_partial,
    modulus,
    truncate,
)

log = logging.getLogger(__name__)


class PurgeError(RuntimeError):
    """The purge search ran out of depth or iterations."""


class InvariantError(AssertionError):
    pass


# ---------------------------------------------------------------- dense families

TAILS = {"zeros": "0", "ones": "1", "alternating": "01", "period4": "0001"}


@dataclass(frozen=True)
class DenseFamily:
    """The points ``w + tail^omega``, enumerated by shortlex order of w."""

    name: str = "zeros"

    @property
    def tail(self) -> str:
        try:
            return TAILS[self.name]
        except KeyError:
            raise ValueError(f"unknown dense family {self.name!r}") from None

    def rule(self, w: str) -> Point:
        return Point(w, self.tail)

    def points(self) -> Iterator[Point]:
        seen = set()
        for w in shortlex():
            x = self.rule(w)
            if x not in seen:
                seen.add(x)
                yield x

    def point(self, i: int) -> Point:
        for j, x in enumerate(self.points()):
            if j == i:
                return x
        raise AssertionError

    def first(self, n: int) -> list[Point]:
        out = []
        for x in self.points():
            if len(out) >= n:
                break
            out.append(x)
        return out

    def contains(self, x: Point) -> bool:
        return any(self.rule(x.pre + x.per[:j]) == x for j in range(len(x.per)))

    def least_outside(self, taken) -> Point:
        for x in self.points():
            if x not in taken:
                return x
        raise AssertionError

    def inside(self, a: ClopenSet, max_extra: int = 24) -> Iterator[Point]:
        """Family points in ``a``, shallow ones first, without repeats."""
        seen = set()
        for n in range(max_extra + 1):
            for c in a:
                for v in words_of_length(n):
                    x = self.rule(c + v)
                    if x not in seen:
                        seen.add(x)
                        yield x


# ----------------------------------------------------------------------- state

@dataclass(frozen=True)
class Commitment:
    word: GroupWord
    index: int
    step: int
    frozen: tuple[Point, ...]

    @property
    def radius(self) -> Fraction:
        return Fraction(1, self.index + 1)

    def balls(self) -> ClopenSet:
        out = ClopenSet()
        for x in self.frozen:
            out = out.union(ball(x, self.radius))
        return out

    def outside(self) -> ClopenSet:
        return self.balls().complement()


@dataclass
class Snapshot:
    h: BlockHomeo
    phi: PartialBijection
    D: tuple[Point, ...]
    E: tuple[Point, ...]
    eps: Optional[Fraction] = None


@dataclass
class EngineConfig:
    steps: int = 8
    word_cap: int = 4
    window_depth: int = GRID
    retry_cap: int = 3
    dense_d: str = "zeros"
    dense_e: str = "alternating"
    max_purge_rounds: int = 40
    max_window_depth: int = 256


@dataclass
class EngineState:
    config: EngineConfig
    registry: Registry
    group: GroupHandle
    D_family: DenseFamily
    E_family: DenseFamily
    enumeration: WordEnumeration
    history: list[Snapshot] = field(default_factory=list)
    commitments: list[Commitment] = field(default_factory=list)

    @property
    def k(self) -> int:
        return len(self.history) - 1

    @property
    def h(self) -> BlockHomeo:
        return self.history[-1].h

    @property
    def phi(self) -> PartialBijection:
        return self.history[-1].phi

    @property
    def D(self) -> tuple[Point, ...]:
        return self.history[-1].D

    @property
    def E(self) -> tuple[Point, ...]:
        return self.history[-1].E

    def slacks(self, h: Optional[BlockHomeo] = None) -> list[Fraction]:
        h = self.h if h is None else h
        return [Fraction(1, 2 ** m) - sigma(s.h, h) for m, s in enumerate(self.history)]

    def letters_in_commitments(self, extra: Sequence[GroupWord] = ()) -> set[int]:
        out = set()
        for w in [c.word for c in self.commitments] + list(extra):
            for x in w.letters:
                if not x.is_h:
                    out.add(x.index)
        return out


def init(group: Optional[GroupHandle] = None, config: Optional[EngineConfig] = None) -> EngineState:
    config = config or EngineConfig()
    group = group or GroupHandle(seed_generators(), config.word_cap)
    report = audit(group)
    if not report.passed:
        raise ValueError(f"seed group fails the audit at {report.violations[0].word}")
    registry = Registry(group.generators)
    registry.close_under_inverses()
    state = EngineState(
        config=config,
        registry=registry,
        group=group,
        D_family=DenseFamily(config.dense_d),
        E_family=DenseFamily(config.dense_e),
        enumeration=WordEnumeration(registry),
    )
    if set(state.D_family.first(8)) & set(state.E_family.first(8)) or state.D_family.tail == state.E_family.tail:
        raise ValueError("the two dense families must be disjoint")
    h0 = BlockHomeo.bitflip()
    state.history.append(Snapshot(h0, PartialBijection(), (), ()))
    word, i = state.enumeration[0]
    state.commitments.append(Commitment(word, i, 0, ()))
    return state


# ---------------------------------------------------------------------- budget

def epsilon_budget(state: EngineState, h: Optional[BlockHomeo] = None) -> Fraction:
    """A radius eps with: sigma(h_k, h') < eps keeps (a) and every committed (f)."""
    h = state.h if h is None else h
    values = list(state.slacks(h))
    for c in state.commitments:
        f = eval_word(c.word, h, state.registry)
        md = min_displacement(f, c.outside())
        if md is not None:
            values.append(modulus(c.word, h, md, state.registry))
    eps = min(values)
    if eps <= 0:
        raise InvariantError("nonpositive budget: an invariant is already broken")
    return eps


# --------------------------------------------------------------------- partners

def forbidden_points(state: EngineState, points, new_word: GroupWord) -> set[Point]:
    maps = [BlockHomeo.identity()]
    for i in sorted(state.letters_in_commitments([new_word])):
        maps += [state.registry[i], state.registry[i].inverse()]
    return {g(x) for x in points for g in maps}


def freeze_holds(state: EngineState, phi: PartialBijection) -> bool:
    reg = state.registry
    return all(eval_word_partial(c.word, phi, reg).fixed_points() == set(c.frozen)
               for c in state.commitments)


def has_cycle(phi: PartialBijection, max_len: Optional[int] = None) -> Optional[int]:
    """Least l >= 1 with a fixed point of phi^l, if any (l up to max_len)."""
    max_len = max_len or max(1, len(phi))
    for x in sorted(phi.domain()):
        y = x
        for n in range(1, max_len + 1):
            y = phi(y)
            if y is None:
                break
            if y == x:
                return n
    return None


def choose_partner(state: EngineState, eps: Fraction) -> Iterator[tuple[Point, Point, str]]:
    """Admissible (d, e, direction) candidates in canonical order.

    Odd steps take the least unmatched D-point and search E near h(d); even
    steps take the least unmatched E-point and search D near h^-1(e).
    """
    h, phi = state.h, state.phi
    word, _ = state.enumeration[state.k + 1]
    half = eps / 2
    if (state.k + 1) % 2 == 1:
        d = state.D_family.least_outside(set(state.D))
        near = ball(h(d), half).intersection(image_clopen(h, ball(d, half)))
        bad = forbidden_points(state, set(state.D) | {d} | set(state.E), word)
        for e in state.E_family.inside(near):
            if e in bad:
                continue
            new = phi.extended(d, e)
            if freeze_holds(state, new) and has_cycle(new, state.k + 2) is None:
                yield d, e, "forward"
    else:
        e = state.E_family.least_outside(set(state.E))
        hinv = h.inverse()
        near = ball(hinv(e), half).intersection(image_clopen(hinv, ball(e, half)))
        bad = forbidden_points(state, set(state.E) | {e} | set(state.D), word)
        for d in state.D_family.inside(near):
            if d in bad:
                continue
            new = phi.extended(d, e)
            if freeze_holds(state, new) and has_cycle(new, state.k + 2) is None:
                yield d, e, "backward"


def _avoiding(points, centers, extra: int = 1) -> ClopenSet:
    """Complement of small cylinders around ``points`` that miss every center."""
    pts = list(points)
    if not pts:
        return ClopenSet.everything()
    depth = max((first_difference(p, c) or 0) for p in pts for c in centers) + extra
    return ClopenSet(p.prefix(depth) for p in pts).complement()


def first_modification(state: EngineState, d: Point, e: Point, eps: Fraction,
                       max_depth: int = 256) -> Optional[BlockHomeo]:
    """A map eta with eta(d) = e, phi_k ⊆ eta and sigma(eta, h_k) < eps."""
    h = state.h
    dstar = h.inverse()(e)
    if dstar == d:
        return h
    window = _avoiding(state.D, [d, dstar])
    n = 0
    while n <= max_depth:
        eta = compose(transport(window, d, dstar, n), h)
        if sigma(eta, h) < eps:
            return eta
        n += GRID
    return None


# ----------------------------------------------------------------------- purge

@dataclass
class PurgeContext:
    word: GroupWord
    U: ClopenSet
    anchor: BlockHomeo  # h_k; every candidate stays sigma-closer than budget to it
    budget: Fraction
    phi: PartialBijection
    D: tuple[Point, ...]
    E: tuple[Point, ...]
    registry: Registry
    depth: int = GRID
    max_depth: int = 256
    max_rounds: int = 40
    log: list[str] = field(default_factory=list)

    def close_enough(self, eta: BlockHomeo) -> bool:
        return sigma(eta, self.anchor) < self.budget


def _walk_phi(ctx: PurgeContext, x: Point) -> tuple[Optional[int], Point, Optional[Letter]]:
    """Follow x through the word using phi; stop at the first undefined letter."""
    y = x
    for j, letter in enumerate(reversed(ctx.word.letters)):
        if letter.is_h:
            z = ctx.phi.preimage(y) if letter.inv else ctx.phi(y)
            if z is None:
                return j, y, letter
            y = z
        else:
            y = ctx.registry.letter_map(letter)(y)
    return None, y, None


def _nearby(c: str, avoid: set[Point], skip: Point, limit: int = 64) -> Iterator[Point]:
    n = 0
    for v in shortlex():
        for tail in ("0", "1", "01", "0001"):
            y = Point(c + v, tail)
            if y != skip and y not in avoid:
                yield y
                n += 1
                if n >= limit:
                    return


def _fixed_D_points(ctx: PurgeContext, eta: BlockHomeo) -> list[Point]:
    return [x for x in sorted(ctx.D) if ctx.U.contains(x)
            and apply_word(ctx.word, eta, ctx.registry, x)[0] == x]


def defuse_point(ctx: PurgeContext, eta: BlockHomeo, x: Point) -> BlockHomeo:
    """Move eta (or its inverse) near the first point where phi stops
    determining the orbit of x, so that x is no longer fixed by word[eta]."""
    t, xt, letter = _walk_phi(ctx, x)
    if t is None:
        raise InvariantError(f"{x} is fixed by the word on phi but lies in the purge set")
    avoid = set(ctx.D) if not letter.inv else set(ctx.E)
    n = max(ctx.depth, ball_depth(ctx.budget))
    n += -n % GRID
    while n <= ctx.max_depth:
        c = xt.prefix(n)
        if not any(p.prefix(n) == c for p in avoid):
            cyl = ClopenSet([c])
            for y in _nearby(c, avoid, xt):
                try:
                    T = transport(cyl, xt, y)
                except ValueError:
                    continue
                cand = compose(T, eta) if not letter.inv else compose(eta, T)
                if apply_word(ctx.word, cand, ctx.registry, x)[0] != x and ctx.close_enough(cand):
                    ctx.log.append(f"defuse {x} at {xt} via {y}")
                    return cand
        n += GRID
    raise PurgeError(f"could not defuse {x}")


def _window_ok(ctx: PurgeContext, eta: BlockHomeo, w: ClopenSet) -> bool:
    """Trajectories leaving w through the first letter must not come back to a
    place where the modified map is used again."""
    letters = list(reversed(ctx.word.letters))
    image = image_clopen(eta, w)
    cur = image
    hinv = eta.inverse()
    for letter in letters[1:]:
        if letter.is_h:
            blocked = image if letter.inv else w
            if not cur.isdisjoint(blocked):
                return False
            cur = image_clopen(hinv if letter.inv else eta, cur)
        else:
            cur = image_clopen(ctx.registry.letter_map(letter), cur)
    return True


def _subset_mod(weights: list[int], target: int, mod: int = 15) -> Optional[list[int]]:
    reach: dict[int, list[int]] = {0: []}
    for i, w in enumerate(weights):
        new = dict(reach)
        for r, subset in reach.items():
            s = (r + w) % mod
            if s not in new:
                new[s] = subset + [i]
        reach = new
        if target % mod in reach:
            return reach[target % mod]
    return reach.get(target % mod)


def crossing_fragment(eta: BlockHomeo, beta: BlockHomeo, c: str, max_extra: int = 3 * GRID):
    """Blocks on [c] replacing eta there so that beta∘eta' has no fixed point in [c].

    The image eta[c] is cut into pieces; the chosen set S of pieces receives
    W0 = [c] minus beta[S], the rest receives W1 = beta[S] ∩ [c].  Grid
    measures must match, which is a subset-sum problem modulo 15.
    """
    W = ClopenSet([c])
    Wp = image_clopen(eta, W)
    nu = grid_measure(W)
    extra = GRID
    while extra <= max_extra:
        depth = Wp.depth() + extra
        depth += -depth % GRID
        pieces = sorted(set(Wp.refine(depth)))
        meets = [image_clopen(beta, ClopenSet([q])).intersection(W) for q in pieces]
        weights = [(grid_measure(m) + 1) % 15 for m in meets]
        hit = [i for i, m in enumerate(meets) if m]
        for keep in hit:
            for drop in hit:
                if keep == drop:
                    continue
                rest = [i for i in range(len(pieces)) if i not in (keep, drop)]
                sub = _subset_mod([weights[i] for i in rest], nu - weights[keep])
                if sub is None:
                    continue
                S = [keep] + [rest[i] for i in sub]
                W1 = ClopenSet()
                for i in S:
                    W1 = W1.union(meets[i])
                W0 = W.difference(W1)
                C0 = ClopenSet(pieces[i] for i in S)
                C1 = Wp.difference(C0)
                if not (W0 and W1 and C0 and C1):
                    continue
                return canonical_homeo(W0, C0) + canonical_homeo(W1, C1)
        extra += GRID
    return None


def _sweep(ctx: PurgeContext, eta: BlockHomeo, n: int) -> Optional[BlockHomeo]:
    """One round of window crossings at cylinder depth n; None if no progress."""
    fixed = fix_set(eval_word(ctx.word, eta, ctx.registry)).restrict(ctx.U)
    cover = fixed.cover(n)
    beta = eval_word(GroupWord(ctx.word.letters[:-1]), eta, ctx.registry)
    chosen = ClopenSet()
    frags = []
    for c in cover:
        if any(p.prefix(len(c)) == c for p in ctx.D):
            continue
        trial = chosen.union(ClopenSet([c]))
        if not _window_ok(ctx, eta, trial):
            continue
        frag = crossing_fragment(eta, beta, c)
        if frag is None:
            continue
        chosen = trial
        frags.extend(frag)
    if not frags:
        return None
    cand = surgery_replace(eta, chosen, frags)
    if not ctx.close_enough(cand):
        return None
    ctx.log.append(f"crossing on {len(chosen)} cylinder(s) at depth {n}")
    return cand


def purge(ctx: PurgeContext, eta: BlockHomeo) -> BlockHomeo:
    """A map eta' with phi ⊆ eta', sigma(eta', anchor) < budget and no fixed
    point of word[eta'] inside U.  Raises PurgeError when the search fails."""
    reg = ctx.registry
    frozen = eval_word_partial(ctx.word, ctx.phi, reg).fixed_points()
    if any(ctx.U.contains(x) for x in frozen):
        raise InvariantError("the purge set meets the forced fixed points")
    n = max(ctx.depth, ball_depth(ctx.budget) + 1)
    n += -n % GRID
    for _ in range(ctx.max_rounds):
        for x in _fixed_D_points(ctx, eta):
            eta = defuse_point(ctx, eta, x)
        fixed = fix_set(eval_word(ctx.word, eta, reg)).restrict(ctx.U)
        if fixed.is_empty():
            return eta
        while n <= ctx.max_depth:
            cand = _sweep(ctx, eta, n)
            if cand is not None:
                eta = cand
                break
            n += GRID
        else:
            raise PurgeError(f"no admissible window for {ctx.word} up to depth {ctx.max_depth}")
    raise PurgeError(f"purge of {ctx.word} did not settle in {ctx.max_rounds} rounds")


# ------------------------------------------------------------------------ step

@dataclass
class StepRecord:
    k: int
    direction: str
    d: Point
    e: Point
    word: GroupWord
    index: int
    frozen: tuple[Point, ...]
    eps: Fraction
    sigma_step: Fraction
    attempts: int
    purge_log: list[str]


def _attempt(state: EngineState, depth: int) -> tuple[Snapshot, Commitment, StepRecord]:
    k = state.k
    eps = epsilon_budget(state)
    word, idx = state.enumeration[k + 1]
    for d, e, direction in choose_partner(state, eps):
        eta = first_modification(state, d, e, eps)
        if eta is not None:
            break
    else:
        raise PurgeError("no admissible partner")
    phi = state.phi.extended(d, e)
    D = state.D + (d,)
    E = state.E + (e,)
    frozen = tuple(sorted(eval_word_partial(word, phi, state.registry).fixed_points()))
    commit = Commitment(word, idx, k + 1, frozen)
    ctx = PurgeContext(word=word, U=commit.outside(), anchor=state.h, budget=eps, phi=phi,
                       D=D, E=E, registry=state.registry, depth=depth,
                       max_depth=state.config.max_window_depth,
                       max_rounds=state.config.max_purge_rounds)
    new_h = purge(ctx, eta)
    snap = Snapshot(new_h, phi, D, E, eps)
    record = StepRecord(k + 1, direction, d, e, word, idx, frozen, eps,
                        sigma(state.h, new_h), 0, ctx.log)
    return snap, commit, record


def step(state: EngineState, records: Optional[list] = None) -> EngineState:
    """Advance one step; the state is left untouched when every retry fails."""
    cfg = state.config
    last: Optional[Exception] = None
    for attempt in range(cfg.retry_cap + 1):
        depth = cfg.window_depth * 2 ** attempt
        try:
            snap, commit, record = _attempt(state, depth)
            state.history.append(snap)
            state.commitments.append(commit)
            try:
                validate(state, strict=True)
            except InvariantError:
                state.history.pop()
                state.commitments.pop()
                raise
            record.attempts = attempt + 1
            if records is not None:
                records.append(record)
            log.info("step %d: %s %s -> %s, word %s", record.k, record.direction,
                     record.d, record.e, record.word)
            return state
        except (PurgeError, InvariantError) as exc:
            log.warning("step %d attempt %d failed: %s", state.k + 1, attempt + 1, exc)
            last = exc
    raise last


# ------------------------------------------------------------------- validator

@dataclass
class Check:
    name: str
    ok: bool
    detail: str = ""


def check_candidate(state: EngineState, new_h: BlockHomeo, eps: Fraction) -> Check:
    """The closeness test applied to a proposed h_{k+1} (strict inequality)."""
    s = sigma(state.h, new_h)
    return Check("eps", s < eps, f"sigma={format_rational(s)} eps={format_rational(eps)}")


def validate(state: EngineState, strict: bool = False) -> list[Check]:
    k, h, phi, reg = state.k, state.h, state.phi, state.registry
    out = []
    slack = [Fraction(1, 2 ** m) - sigma(s.h, h) for m, s in enumerate(state.history[:-1])]
    out.append(Check("a", all(x > 0 for x in slack),
                     "min slack " + (format_rational(min(slack)) if slack else "none")))

    ok_b = True
    for n in range(0, k // 2 + 1):
        if not set(state.D_family.first(n)) <= set(state.history[2 * n].D):
            ok_b = False
        if 2 * n + 1 <= k and not set(state.E_family.first(n)) <= set(state.history[2 * n + 1].E):
            ok_b = False
    out.append(Check("b", ok_b))

    out.append(Check("c", all(s.phi.is_subset(phi) for s in state.history)))
    out.append(Check("d", phi.agrees_with(h)))

    bad_e = [str(c.word) for c in state.commitments
             if eval_word_partial(c.word, phi, reg).fixed_points() != set(c.frozen)]
    out.append(Check("e", not bad_e, ", ".join(bad_e)))

    bad_f = [f"({c.word}, {c.index})" for c in state.commitments
             if not fix_set(eval_word(c.word, h, reg)).is_subset_of(c.balls())]
    out.append(Check("f", not bad_f, ", ".join(bad_f)))

    cyc = has_cycle(phi, max(k, len(phi), 1))
    out.append(Check("g", cyc is None, "" if cyc is None else f"cycle of length {cyc}"))

    if k >= 1 and state.history[-1].eps is not None:
        out.append(Check("eps", sigma(state.history[-2].h, h) < state.history[-1].eps))
    if strict:
        failed = [c for c in out if not c.ok]
        if failed:
            raise InvariantError("; ".join(f"({c.name}) {c.detail}" for c in failed))
    return out


# ------------------------------------------------------------------------- run

def run(state: EngineState, steps: int) -> dict:
    records: list[StepRecord] = []
    for _ in range(steps):
        step(state, records)
    return report(state, records)


def report(state: EngineState, records: Sequence[StepRecord] = ()) -> dict:
    h = state.h
    K = state.k
    return {
        "steps": K,
        "word_cap": state.group.word_cap,
        "dense_d": state.D_family.name,
        "dense_e": state.E_family.name,
        "final_blocks": len(h),
        "sigma_to_final": [
            {"m": m, "sigma": format_rational(sigma(s.h, h)), "bound": format_rational(Fraction(1, 2 ** m))}
            for m, s in enumerate(state.history)
        ],
        "phi": [[str(x), str(y)] for x, y in state.phi.pairs()],
        "commitments": [
            {"step": c.step, "word": str(c.word), "index": c.index,
             "radius": format_rational(c.radius), "frozen": [str(x) for x in c.frozen]}
            for c in state.commitments
        ],
        "steps_detail": [
            {"k": r.k, "direction": r.direction, "d": str(r.d), "e": str(r.e),
             "word": str(r.word), "index": r.index, "eps": format_rational(r.eps),
             "sigma_step": format_rational(r.sigma_step), "attempts": r.attempts,
             "purge": r.purge_log}
            for r in records
        ],
        "checks": {c.name: c.ok for c in validate(state)},
        "generators": [str(g) for g in state.group.generators],
    }


def dumps(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True)


def extension_audit(state: EngineState, word_cap: int = 4) -> dict:
    """Audit of the group generated by the seeds and h_K.

    Committed words must have their fixed points inside their committed balls;
    pure generator words up to ``word_cap`` must have finitely many.
    """
    h, reg = state.h, state.registry
    committed = []
    for c in state.commitments:
        fs = fix_set(eval_word(c.word, h, reg))
        committed.append({
            "word": str(c.word), "index": c.index, "finite": fs.is_finite(),
            "inside_balls": fs.is_subset_of(c.balls()),
            "fixed_points": [str(x) for x in fs.points],
        })
    seeds = audit(GroupHandle(list(state.group.generators), word_cap))
    return {
        "word_cap": word_cap,
        "committed": committed,
        "generator_words": seeds.to_json()["words"],
        "generator_violations": [e.to_json() for e in seeds.violations],
        "passed": seeds.passed and all(e["inside_balls"] for e in committed),
    }
