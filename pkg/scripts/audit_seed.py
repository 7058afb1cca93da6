"""Audit the seed group (and the sabotaged fixed-cylinder map) at several word caps."""
import argparse
import time

from cantor_cdh.cofinitary import GroupHandle, audit, fix_locus, fixed_cylinder_map, seed_generators


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--max-cap", type=int, default=5)
    args = ap.parse_args()
    for L in range(1, args.max_cap + 1):
        t0 = time.perf_counter()
        group = GroupHandle(seed_generators(), L)
        rep = audit(group)
        locus = sorted(map(str, fix_locus(group, rep))) if rep.passed else "-"
        print(f"L={L}: {len(rep.entries)} words, passed={rep.passed}, locus={locus}, "
              f"{time.perf_counter() - t0:.2f}s")
    bad = audit(GroupHandle([fixed_cylinder_map()], 1))
    v = bad.violations[0]
    print(f"fixed-cylinder map: passed={bad.passed}, first violation {v.word} on {v.witness()}")


if __name__ == "__main__":
    main()
