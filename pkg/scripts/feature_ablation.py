#!/usr/bin/env python3
"""Character-level vs word-level text features on a format-error table.

Both configurations run with text features only, so the comparison isolates
the representation; word-level tokens cannot generalize a missing '$' or ':'
beyond the exact values the user labeled.

Usage: python scripts/feature_ablation.py --seeds 5
"""

from __future__ import annotations

import argparse
import os
import sys
from multiprocessing import Pool

sys.path.insert(0, os.path.dirname(__file__))

from common import drive

from cellscout import Session
from cellscout.datagen import format_session_config, format_tables


def run_one(task):
    seed, text_mode = task
    dirty, gt = format_tables(seed=seed)
    config = format_session_config(seed=seed, text_mode=text_mode)
    session = drive(Session(dirty, config, ground_truth=gt), dirty, gt)
    return text_mode, seed, session.convergence[-1].f1 if session.convergence else 0.0


def main() -> int:
    parser = argparse.ArgumentParser()
    parser.add_argument("--seeds", type=int, default=5)
    parser.add_argument("--workers", type=int, default=2)
    args = parser.parse_args()

    tasks = [(seed, mode) for mode in ("char", "word") for seed in range(args.seeds)]
    with Pool(args.workers) as pool:
        results = pool.map(run_one, tasks)

    for mode in ("char", "word"):
        scores = [f1 for m, _, f1 in results if m == mode]
        print(f"{mode}-level text features: final F1 per seed {['%.3f' % s for s in scores]}, "
              f"mean {sum(scores) / len(scores):.3f}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
