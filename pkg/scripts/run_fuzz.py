"""Run the randomized chain search for every case and print one JSON summary per line."""

import argparse
import os
import time

from isoholder.search import CASES, FuzzConfig, fuzz_chain, tightness_stats


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--trials", type=int, default=10_000)
    ap.add_argument("--seed", type=int, default=20240601)
    ap.add_argument("--cases", nargs="+", default=list(CASES), choices=CASES)
    ap.add_argument("--workers", type=int, default=os.cpu_count() or 1)
    ap.add_argument("--tightness", action="store_true", help="also print tightness quantiles")
    args = ap.parse_args()
    for case in args.cases:
        cfg = FuzzConfig(seed=args.seed, trials=args.trials, case=case)
        start = time.perf_counter()
        summary = fuzz_chain(cfg, workers=args.workers)
        print(summary.to_json())
        print(f"# {case}: {time.perf_counter() - start:.1f}s")
        if args.tightness and case != "reversed-discrete":
            stats = tightness_stats(cfg, workers=args.workers)
            print(f"# tightness quantiles {stats.quantiles}, out of range {stats.out_of_range}")


if __name__ == "__main__":
    main()
