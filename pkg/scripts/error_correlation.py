#!/usr/bin/env python3
"""Effect of the error-correlation feature block on a correlated error pair.

The dependent column's errors are content-ambiguous; the driver column's
errors are learnable. With the error-correlation block enabled, the
dependent classifier can piggyback on the driver model's probabilities and
needs far fewer labels to reach the same column F1.

Usage: python scripts/error_correlation.py --seeds 5
"""

from __future__ import annotations

import argparse
import os
import sys
from multiprocessing import Pool

sys.path.insert(0, os.path.dirname(__file__))

from common import drive, labels_to_column_f1

from cellscout import Session
from cellscout.datagen import correlated_session_config, correlated_tables

DEPENDENT_COLUMN = 2
TARGET_F1 = 0.7


def run_one(task):
    seed, use_errcorr = task
    dirty, gt = correlated_tables(seed=seed)
    config = correlated_session_config(seed=seed, use_error_correlation=use_errcorr)

    def reached(session):
        return labels_to_column_f1(session, DEPENDENT_COLUMN, TARGET_F1) is not None

    session = drive(Session(dirty, config, ground_truth=gt), dirty, gt, stop_when=reached)
    cost = labels_to_column_f1(session, DEPENDENT_COLUMN, TARGET_F1)
    return use_errcorr, seed, cost


def main() -> int:
    parser = argparse.ArgumentParser()
    parser.add_argument("--seeds", type=int, default=5)
    parser.add_argument("--workers", type=int, default=2)
    args = parser.parse_args()

    tasks = [(seed, flag) for flag in (True, False) for seed in range(args.seeds)]
    with Pool(args.workers) as pool:
        results = pool.map(run_one, tasks)

    budget = correlated_session_config(0, True).budget
    by_flag = {True: {}, False: {}}
    for flag, seed, cost in results:
        by_flag[flag][seed] = cost if cost is not None else budget
    wins = 0
    for seed in range(args.seeds):
        with_corr = by_flag[True][seed]
        without = by_flag[False][seed]
        ok = with_corr * 2 <= without
        wins += ok
        print(f"seed {seed}: labels to column F1>={TARGET_F1}: "
              f"with={with_corr} without={without} halved={ok}")
    print(f"{wins}/{args.seeds} seeds show at least a 2x label saving")
    return 0


if __name__ == "__main__":
    sys.exit(main())
