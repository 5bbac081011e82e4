import pytest
from hypothesis import given
from hypothesis import strategies as st

from phagelab.antigens import MUTANTS, TEST_MUTANTS, TRAIN_MUTANTS, WILD_TYPE
from phagelab.benchmark.splits import (SCHEDULE, SplitError, SplitPlan, make_split_plan,
                                       split_rows)
from phagelab.labeler import BINDER, NON_BINDER, NON_SIGNIFICANT, NOISE, LabeledPair

HELD_OUT = {"P42A", "T48A", "E51A", "I57A", "I60A", "K69A", "C78A", "S81A", "E87A", "L120A",
            "L126A", "L129A", "Q144A", "D162A", "T165A"}


def test_fixed_test_set_accepted():
    assert set(TEST_MUTANTS) == HELD_OUT
    assert set(TRAIN_MUTANTS) == set(MUTANTS) - HELD_OUT and len(TRAIN_MUTANTS) == 15
    plan = make_split_plan(TRAIN_MUTANTS, HELD_OUT, seed=0)
    assert set(plan.test_antigens) == HELD_OUT
    assert plan.schedule == SCHEDULE == (1, 2, 3, 4, 5, 6, 8, 10, 12, 14, 16)


def test_first_checkpoint_is_wild_type_only():
    plan = make_split_plan(seed=3)
    assert plan.antigens_at(1) == (WILD_TYPE,)
    assert len(plan.antigens_at(16)) == 16
    assert plan.added_at(8) == plan.train_order[6:8]


@given(st.integers(0, 2**32 - 1))
def test_seeded_and_disjoint(seed):
    a, b = make_split_plan(seed=seed), make_split_plan(seed=seed)
    assert a.train_order == b.train_order
    assert sorted(a.train_order[1:]) == sorted(TRAIN_MUTANTS)
    for c in a.schedule:
        assert not set(a.antigens_at(c)) & set(a.test_antigens)
        assert WILD_TYPE in a.antigens_at(c)


def test_different_seeds_shuffle_differently():
    assert len({make_split_plan(seed=s).train_order for s in range(5)}) > 1


def test_plan_errors():
    with pytest.raises(SplitError):
        make_split_plan(TRAIN_MUTANTS, [*TEST_MUTANTS, TRAIN_MUTANTS[0]])
    with pytest.raises(SplitError):
        make_split_plan([WILD_TYPE, *TRAIN_MUTANTS])
    with pytest.raises(SplitError):
        make_split_plan(seed=0).antigens_at(7)
    with pytest.raises(SplitError):
        SplitPlan(("A1A",), ("B2B", WILD_TYPE), (1, 2), 0)


def test_rows_follow_the_plan_and_sizes_grow():
    labels = [BINDER, NON_BINDER, NON_SIGNIFICANT, NOISE]
    rows = [LabeledPair(f"V{i}", t, "", labels[i % 4], -1.0, "unchanged", "M:S")
            for i in range(8) for t in (WILD_TYPE, *MUTANTS)]
    plan = make_split_plan(seed=1)
    sizes = []
    for c in plan.schedule:
        train, test = split_rows(rows, plan, c)
        assert {r.target_id for r in train} == set(plan.antigens_at(c))
        assert {r.target_id for r in test} == set(TEST_MUTANTS)
        assert all(r.label in (BINDER, NON_BINDER) for r in train + test)
        sizes.append(len(train))
    assert sizes == sorted(sizes) and sizes[0] == 4
