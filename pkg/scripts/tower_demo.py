"""Build a split tower on a round-robin schedule of targets and check it."""
import argparse
import json

from cantor_cdh.cantor import ClopenSet
from cantor_cdh.cofinitary import seed_generators
from cantor_cdh.split import build_tower, first_bit_swap, tower_check, tower_report


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--height", type=int, default=4)
    ap.add_argument("--targets", default="0;1;01", help="clopen literals separated by ';'")
    ap.add_argument("--group", choices=["seed", "bitflip"], default="seed")
    ap.add_argument("--depth", type=int, default=6)
    args = ap.parse_args()
    gens = seed_generators() if args.group == "seed" else [first_bit_swap()]
    targets = [ClopenSet.parse(t) for t in args.targets.split(";")]
    tower = build_tower(gens, targets, args.height)
    print(json.dumps(tower_report(tower, tower_check(tower, args.depth)), indent=2))


if __name__ == "__main__":
    main()
