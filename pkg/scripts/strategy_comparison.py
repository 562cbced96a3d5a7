#!/usr/bin/env python3
"""Compare column-selection strategies on the heterogeneous-difficulty table.

Reports, per strategy, the mean labels needed to reach global F1 0.8 and the
aggregated convergence curve; optionally writes curves as CSV.

Usage: python scripts/strategy_comparison.py --seeds 5 --out curves/
"""

from __future__ import annotations

import argparse
import os
import sys
from multiprocessing import Pool

sys.path.insert(0, os.path.dirname(__file__))

from common import drive, labels_to_global_f1

from cellscout import Session, Strategy, record_convergence
from cellscout.datagen import heterogeneous_session_config, heterogeneous_tables

TARGET_F1 = 0.8


def run_one(task):
    seed, strategy = task
    dirty, gt = heterogeneous_tables(seed=seed)
    config = heterogeneous_session_config(seed=seed, strategy=Strategy(strategy))
    session = drive(Session(dirty, config, ground_truth=gt), dirty, gt)
    reached = labels_to_global_f1(session, TARGET_F1)
    return strategy, seed, reached, [p for p in session.convergence]


def main() -> int:
    parser = argparse.ArgumentParser()
    parser.add_argument("--seeds", type=int, default=5)
    parser.add_argument("--strategies", nargs="+", default=["mc", "ra", "rr"])
    parser.add_argument("--out", help="directory for per-strategy curve CSVs")
    parser.add_argument("--workers", type=int, default=2)
    args = parser.parse_args()

    tasks = [(seed, strategy) for strategy in args.strategies for seed in range(args.seeds)]
    with Pool(args.workers) as pool:
        results = pool.map(run_one, tasks)

    by_strategy: dict[str, list] = {s: [] for s in args.strategies}
    for strategy, seed, reached, curve in results:
        by_strategy[strategy].append((seed, reached, curve))

    budget = heterogeneous_session_config(0, Strategy.MIN_CERTAINTY).budget
    for strategy in args.strategies:
        rows = by_strategy[strategy]
        # Runs that never reach the target count as the full budget.
        costs = [reached if reached is not None else budget for _, reached, _ in rows]
        mean_cost = sum(costs) / len(costs)
        print(f"{strategy}: mean labels to F1>={TARGET_F1}: {mean_cost:.1f}  "
              f"(per seed: {costs})")
        curve = record_convergence([c for _, _, c in rows])
        if args.out:
            os.makedirs(args.out, exist_ok=True)
            path = os.path.join(args.out, f"strategy_{strategy}.csv")
            with open(path, "w", encoding="utf-8") as fh:
                fh.write(curve.to_csv())
            print(f"  curve -> {path}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
