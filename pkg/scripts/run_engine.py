"""Run the back-and-forth engine for K steps and print a per-step table."""
import argparse
import json
import logging
import time

from cantor_cdh import engine
from cantor_cdh.cofinitary import GroupHandle, seed_generators
from cantor_cdh.cantor import format_rational


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--steps", type=int, default=8)
    ap.add_argument("--word-cap", type=int, default=4)
    ap.add_argument("--dense-d", default="zeros")
    ap.add_argument("--dense-e", default="alternating")
    ap.add_argument("--report", help="write the full JSON report here")
    ap.add_argument("-v", action="store_true")
    args = ap.parse_args()
    logging.basicConfig(level=logging.INFO if args.v else logging.WARNING)

    cfg = engine.EngineConfig(steps=args.steps, word_cap=args.word_cap,
                              dense_d=args.dense_d, dense_e=args.dense_e)
    state = engine.init(GroupHandle(seed_generators(), args.word_cap), cfg)
    records = []
    print(f"{'k':>2} {'dir':>8} {'word':>12} {'eps':>8} {'sigma':>8} {'blocks':>6}  time")
    for _ in range(args.steps):
        t0 = time.perf_counter()
        engine.step(state, records)
        r = records[-1]
        print(f"{r.k:>2} {r.direction:>8} {str(r.word):>12} {format_rational(r.eps):>8} "
              f"{format_rational(r.sigma_step):>8} {len(state.h):>6}  {time.perf_counter() - t0:.1f}s")
    ext = engine.extension_audit(state, args.word_cap)
    print("validator:", {c.name: c.ok for c in engine.validate(state)})
    print("extension audit passed:", ext["passed"])
    if args.report:
        rep = engine.report(state, records)
        rep["extension_audit"] = ext
        with open(args.report, "w") as fh:
            json.dump(rep, fh, indent=2, sort_keys=True)


if __name__ == "__main__":
    main()
