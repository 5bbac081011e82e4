"""Incremental-antigen train/test splits.

The test set is a fixed group of mutants. Training starts from the wild type
alone and adds the remaining mutants one or two at a time in a seeded random
order; each checkpoint is the cumulative number of antigen types trained on.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..antigens import TEST_MUTANTS, TRAIN_MUTANTS, WILD_TYPE
from ..labeler import BINDER, NON_BINDER

SCHEDULE = (1, 2, 3, 4, 5, 6, 8, 10, 12, 14, 16)


class SplitError(ValueError):
    pass


@dataclass(frozen=True)
class SplitPlan:
    test_antigens: tuple
    train_order: tuple  # wild type first, then the shuffled training mutants
    schedule: tuple
    seed: int

    def __post_init__(self):
        if set(self.test_antigens) & set(self.train_order):
            raise SplitError("train and test antigens overlap")
        if not self.train_order or self.train_order[0] != WILD_TYPE:
            raise SplitError("training order must start with the wild type")
        if list(self.schedule) != sorted(set(self.schedule)) or self.schedule[0] < 1:
            raise SplitError("checkpoints must be strictly increasing and positive")
        if self.schedule[-1] != len(self.train_order):
            raise SplitError("final checkpoint must cover every training antigen")

    def antigens_at(self, checkpoint: int) -> tuple:
        if checkpoint not in self.schedule:
            raise SplitError(f"{checkpoint} is not a checkpoint of this plan")
        return self.train_order[:checkpoint]

    def added_at(self, checkpoint: int) -> tuple:
        i = self.schedule.index(checkpoint)
        prev = self.schedule[i - 1] if i else 0
        return self.train_order[prev:checkpoint]


def make_split_plan(train_mutants=TRAIN_MUTANTS, test_mutants=TEST_MUTANTS, seed: int = 0,
                    schedule=SCHEDULE) -> SplitPlan:
    train = sorted(set(train_mutants))
    test = tuple(sorted(set(test_mutants)))
    if set(train) & set(test):
        raise SplitError(f"mutants in both sets: {sorted(set(train) & set(test))}")
    if WILD_TYPE in train or WILD_TYPE in test:
        raise SplitError("the wild type is implicit; do not list it as a mutant")
    order = [train[i] for i in np.random.default_rng(seed).permutation(len(train))]
    n = len(order) + 1
    sched = tuple(c for c in schedule if c < n) + (n,)
    return SplitPlan(test, (WILD_TYPE, *order), sched, seed)


def benchmark_rows(rows):
    """Only binder and non-binder rows take part in the benchmark."""
    return [r for r in rows if r.label in (BINDER, NON_BINDER)]


def split_rows(rows, plan: SplitPlan, checkpoint: int):
    """(train rows, test rows) for one checkpoint."""
    train_set = set(plan.antigens_at(checkpoint))
    test_set = set(plan.test_antigens)
    rows = benchmark_rows(rows)
    return ([r for r in rows if r.target_id in train_set],
            [r for r in rows if r.target_id in test_set])
