"""Double the orbit of a point and check the splitting conclusions; also the M = all control."""
import argparse

from cantor_cdh.cantor import Point
from cantor_cdh.cofinitary import seed_generators
from cantor_cdh.split import PeriodicSet, SplitConfig, build_split, check_split, first_bit_swap


def show(title, space, depth):
    checks = check_split(space, depth)
    print(f"{title}: orbit size {len(space.orbit)}, M = {space.M}")
    for c in checks:
        print(f"  {c.name:>12}: {'ok' if c.ok else 'FAIL'} {c.detail}")


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--depth", type=int, default=8)
    args = ap.parse_args()
    show("bitflip group, y = ~0", build_split(SplitConfig()), args.depth)
    show("seed group, y = ~01", build_split(SplitConfig(seed_generators(), 3, (), y=Point.parse("~01"))),
         args.depth)
    show("control M = all", build_split(SplitConfig([first_bit_swap()], M=PeriodicSet.parse("all"))),
         args.depth)


if __name__ == "__main__":
    main()
