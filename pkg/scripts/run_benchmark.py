#!/usr/bin/env python3
"""The committed convergence benchmark: 2000x8 synthetic table, all five
error kinds, min-certainty strategy, k=10, budget 600.

Reports mean +- stddev of the final F1 across seeds and writes the
aggregated convergence curve.

Usage: python scripts/run_benchmark.py --seeds 5 --out curves/
"""

from __future__ import annotations

import argparse
import os
import sys
import time
from multiprocessing import Pool

sys.path.insert(0, os.path.dirname(__file__))

from common import drive

from cellscout import Session, record_convergence
from cellscout.datagen import benchmark_session_config, benchmark_tables


def run_one(seed):
    dirty, gt = benchmark_tables(seed=seed)
    config = benchmark_session_config(seed=seed)
    started = time.time()
    session = drive(Session(dirty, config, ground_truth=gt), dirty, gt)
    final = session.convergence[-1]
    return seed, final.f1, session.labels_used, time.time() - started, session.convergence


def main() -> int:
    parser = argparse.ArgumentParser()
    parser.add_argument("--seeds", type=int, default=5)
    parser.add_argument("--out", help="directory for the aggregated curve CSV")
    parser.add_argument("--workers", type=int, default=2)
    args = parser.parse_args()

    with Pool(args.workers) as pool:
        results = pool.map(run_one, range(args.seeds))

    curves = []
    scores = []
    for seed, f1, labels, elapsed, curve in results:
        print(f"seed {seed}: F1 {f1:.3f} with {labels} labels in {elapsed:.0f}s")
        scores.append(f1)
        curves.append(curve)
    import numpy as np

    print(f"final F1: {np.mean(scores):.3f} +- {np.std(scores):.3f} over {args.seeds} seeds")

    aggregated = record_convergence(curves)
    if args.out:
        os.makedirs(args.out, exist_ok=True)
        path = os.path.join(args.out, "benchmark_convergence.csv")
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(aggregated.to_csv())
        print(f"curve -> {path}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
