"""Time full 392-phrase extraction against sequence length.

    python scripts/bench_extract.py [--repeats 50]
"""

import argparse
import time

import numpy as np

from kphrase.catalog import build_catalog
from kphrase.extract import extract
from kphrase.skeleton import SkeletonSequence
from kphrase.synth import REST_POSE


def random_motion(rng, T):
    drift = np.cumsum(rng.normal(0, 0.01, size=(T, *REST_POSE.shape)), axis=0)
    return SkeletonSequence(REST_POSE[None] + drift, fps=30)


def main():
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--repeats", type=int, default=50)
    ap.add_argument("--lengths", type=int, nargs="+", default=[30, 120, 600, 3000])
    args = ap.parse_args()

    rng = np.random.default_rng(0)
    catalog = build_catalog()
    print(f"{'frames':>7} {'median ms':>10} {'p90 ms':>8} {'us/frame':>9}")
    for T in args.lengths:
        seq = random_motion(rng, T)
        extract(seq, catalog)
        times = []
        for _ in range(args.repeats):
            t0 = time.perf_counter()
            extract(seq, catalog)
            times.append(time.perf_counter() - t0)
        ms = np.array(times) * 1e3
        print(f"{T:>7} {np.median(ms):>10.2f} {np.percentile(ms, 90):>8.2f} {1e3 * np.median(ms) / T:>9.1f}")


if __name__ == "__main__":
    main()
