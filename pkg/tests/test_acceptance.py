"""Acceptance criteria 1-9, one PASS/FAIL line each.

Run with ``pytest tests/test_acceptance.py -v`` (lines appear in the terminal
summary) or directly with ``python3 tests/test_acceptance.py``.
"""
import copy
import random
import sys
import time
from fractions import Fraction
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from cantor_cdh import engine as E
from cantor_cdh.cantor import ClopenSet, Point
from cantor_cdh.cofinitary import GroupHandle, audit, fixed_cylinder_map, seed_generators
from cantor_cdh.homeo import (
    BlockHomeo, HomeoBlock, compose, fix_set, invert, random_homeo, random_point, rho, sigma,
    sup_distance, witness_point,
)
from cantor_cdh.split import (
    PeriodicSet, SplitConfig, TermCalculus, build_split, build_tower, check_split, check_term,
    random_term, tower_check,
)
from cantor_cdh.words import (
    H, H_INV, ConjugateIntoGroup, Letter, Registry, WordEnumeration, classify, enum_key, eval_word,
    reduce, simplify,
)
from oracles import brute_fixed_points, surviving_cylinders

try:
    from conftest import ACCEPTANCE
except ImportError:
    ACCEPTANCE = []

ID = BlockHomeo.identity()


def record(n, ok, seconds, limit, detail=""):
    line = f"{'PASS' if ok else 'FAIL'} criterion {n}: {detail} ({seconds:.1f}s, limit {limit}s)"
    ACCEPTANCE.append(line)
    print(line)
    return line


# ---------------------------------------------------------------- criteria

def criterion_1():
    rng = random.Random(101)
    fs = [random_homeo(rng, 6, 4) for _ in range(500)]
    problems = []
    for k in range(500):
        f, g, h = fs[k], fs[(k + 1) % 500], fs[(k + 2) % 500]
        fi = invert(f)
        laws = {
            "assoc": compose(compose(f, g), h) == compose(f, compose(g, h)),
            "identity": compose(ID, f) == f == compose(f, ID),
            "inverse": compose(f, fi) == ID == compose(fi, f),
            "double-inverse": invert(fi) == f,
            "invert-compose": invert(compose(f, g)) == compose(invert(g), fi),
            "sigma-zero": sigma(f, f) == 0 and (sigma(f, g) == 0) == (f == g),
            "sigma-symmetric": sigma(f, g) == sigma(g, f),
            "sigma-triangle": sigma(f, h) <= sigma(f, g) + sigma(g, h),
            "sigma-ultra": sigma(f, h) <= max(sigma(f, g), sigma(g, h)),
        }
        problems += [f"{k}:{name}" for name, good in laws.items() if not good]
    return not problems, f"500 maps, {len(problems)} law violations"


def criterion_2():
    rng = random.Random(202)
    missed = unverified = excluded = 0
    total_pts = 0
    for _ in range(200):
        f = random_homeo(rng, 6, 4)
        fs = fix_set(f)
        keep = surviving_cylinders(f, 10)
        excluded += len(set(fs.cover(10)) - keep)
        for x in fs.points:
            total_pts += 1
            unverified += f(x) != x
        for c in fs.components:
            unverified += f(c.sample()) != c.sample()
        for x in brute_fixed_points(f):
            if not fs.contains(x) or x.prefix(10) not in keep:
                missed += 1
    ok = missed == unverified == excluded == 0
    return ok, f"200 maps, {total_pts} isolated points; missed {missed}, unverified {unverified}, " \
               f"inside excluded cylinders {excluded}"


def _random_word(rng, reg, max_len=10, base=None):
    base = len(reg) if base is None else base
    while True:
        letters = [rng.choice([H, H_INV] + [Letter.g(i) for i in range(base)])
                   for _ in range(rng.randint(1, max_len))]
        w = reduce(letters, reg)
        if w.letters and not w.is_group_element():
            return w


def criterion_3():
    reg = Registry(seed_generators())
    reg.close_under_inverses()
    base = len(reg)
    rng = random.Random(303)
    bad_ops = conj = 0
    done = 0
    while done < 1000:
        w = _random_word(rng, reg, base=base)
        try:
            s = simplify(w, reg)
        except ConjugateIntoGroup:
            conj += 1
            continue
        done += 1
        if classify(s.word, reg) != "nice" or len(s.trace) > len(w) or \
                any(len(st.after) > len(st.before) for st in s.trace):
            bad_ops += 1
    bad_fix = pairs = 0
    while pairs < 100:
        w = _random_word(rng, reg, 5, base)
        try:
            s = simplify(w, reg)
        except ConjugateIntoGroup:
            continue
        h = random_homeo(rng, 4, 2)
        pairs += 1
        a = fix_set(eval_word(w, h, reg)).is_finite()
        b = fix_set(eval_word(s.word, h, reg)).is_finite()
        bad_fix += a != b
    e = WordEnumeration(reg)
    bad_star = inst = 0
    while inst < 500:
        g, n = e[rng.randrange(3000)]
        a = rng.randrange(len(g))
        b = rng.randrange(a + 1, len(g) + 1)
        sub = reduce(g.letters[a:b], reg)
        if sub.is_group_element():
            continue
        try:
            f = simplify(sub, reg).word
        except ConjugateIntoGroup:
            continue
        inst += 1
        m = rng.randint(0, n)
        bad_star += enum_key(f, m) > enum_key(g, n)
    ok = bad_ops == bad_fix == bad_star == 0
    return ok, (f"1000 words ({conj} conjugate into the group, skipped), op violations {bad_ops}; "
                f"100 pairs, fix-finiteness mismatches {bad_fix}; 500 (*) instances, violations {bad_star}")


_ENGINE = {}


def engine_state():
    if "state" not in _ENGINE:
        t0 = time.perf_counter()
        state = E.init(GroupHandle(seed_generators(), 4))
        records, per_step = [], []
        error = None
        try:
            for _ in range(8):
                E.step(state, records)
                per_step.append(E.validate(state))
        except Exception as exc:  # surfaced in the criterion line
            error = exc
        _ENGINE.update(state=state, records=records, per_step=per_step, error=error,
                       seconds=time.perf_counter() - t0)
    return _ENGINE


def criterion_4():
    run = engine_state()
    if run["error"] is not None:
        return False, f"engine stopped: {run['error']}", run["seconds"]
    state, per_step = run["state"], run["per_step"]
    every = all(c.ok for checks in per_step for c in checks)
    slacks = [Fraction(1, 2 ** m) - sigma(s.h, state.h) for m, s in enumerate(state.history[:-1])]
    names = sorted({c.name for checks in per_step for c in checks})
    cyc = E.has_cycle(state.phi, 8)
    ok = every and all(x > 0 for x in slacks) and cyc is None and state.k == 8
    return ok, (f"K={state.k}, checks {','.join(names)} at every step: {every}; "
                f"min slack {min(slacks)}; no phi-cycle up to 8: {cyc is None}"), run["seconds"]


def criterion_5():
    run = engine_state()
    if run["error"] is not None:
        return False, "engine run unavailable"
    rep = E.extension_audit(run["state"], 4)
    inside = sum(e["inside_balls"] for e in rep["committed"])
    return rep["passed"], (f"{inside}/{len(rep['committed'])} committed words inside their balls; "
                           f"{rep['generator_words']} generator words, "
                           f"{len(rep['generator_violations'])} violations")


def criterion_6():
    space = build_split(SplitConfig())
    checks = check_split(space, 8)
    return all(c.ok for c in checks), "depth 8: " + ", ".join(f"{c.name}={c.ok}" for c in checks)


def criterion_7():
    space = build_split(SplitConfig(generators=seed_generators(), y=Point.parse("~01"), N=()))
    calc = TermCalculus(space)
    rng = random.Random(707)
    problems, tags = [], 0
    for _ in range(200):
        t = random_term(rng, space, 5)
        tags += len(calc.boundary_tags(t))
        problems += check_term(calc, t, rng, 50)
    return not problems, f"200 terms, {tags} tags, {len(problems)} problems"


def criterion_8():
    targets = [ClopenSet(["0"]), ClopenSet(["1"]), ClopenSet(["01"])]
    tower = build_tower(seed_generators(), targets, 4)
    checks = tower_check(tower, 6)
    return all(c.ok for c in checks), "height 4: " + ", ".join(f"{c.name}={c.ok}" for c in checks)


def criterion_9():
    bad = build_split(SplitConfig(M=PeriodicSet.parse("all")))
    d_fails = not {c.name: c.ok for c in check_split(bad, 8)}["d"]
    rep = audit(GroupHandle([fixed_cylinder_map()], 1))
    audit_fails = not rep.passed and len(rep.violations[0].word) == 1
    run = engine_state()
    state = run["state"]
    eps = run["records"][-1].eps
    prev = copy.copy(state)
    prev.history, prev.commitments = state.history[:-1], state.commitments[:-1]
    n = 0
    while Fraction(1, n + 2) >= eps:
        n += 1
    c = prev.h(Point.parse("~0")).prefix(n)
    swap = [HomeoBlock(c + "0", c + "1"), HomeoBlock(c + "1", c + "0")]
    swap += [HomeoBlock(c[:i] + str(1 - int(c[i])), c[:i] + str(1 - int(c[i]))) for i in range(n)]
    pert = compose(prev.h, BlockHomeo(swap))
    rejected = sigma(prev.h, pert) >= eps and not E.check_candidate(prev, pert, eps).ok
    accepted = E.check_candidate(prev, state.h, eps).ok
    ok = d_fails and audit_fails and rejected and accepted
    return ok, (f"M=all breaks (d): {d_fails}; fixed cylinder fails audit at length 1: {audit_fails}; "
                f"boundary perturbation rejected: {rejected}")


LIMITS = {1: 60, 2: 120, 3: 60, 4: 600, 5: 300, 6: 60, 7: 120, 8: 300, 9: 120}
FUNCS = {1: criterion_1, 2: criterion_2, 3: criterion_3, 4: criterion_4, 5: criterion_5,
         6: criterion_6, 7: criterion_7, 8: criterion_8, 9: criterion_9}


def evaluate(n):
    t0 = time.perf_counter()
    out = FUNCS[n]()
    seconds = time.perf_counter() - t0
    if len(out) == 3:
        ok, detail, seconds = out
    else:
        ok, detail = out
    ok_time = seconds < LIMITS[n]
    record(n, ok and ok_time, seconds, LIMITS[n], detail)
    return ok, ok_time, detail


@pytest.mark.parametrize("n", sorted(FUNCS))
def test_criterion(n):
    ok, ok_time, detail = evaluate(n)
    assert ok, detail
    assert ok_time, f"criterion {n} exceeded {LIMITS[n]}s"


if __name__ == "__main__":
    results = [evaluate(n) for n in sorted(FUNCS)]
    sys.exit(0 if all(a and b for a, b, _ in results) else 1)
