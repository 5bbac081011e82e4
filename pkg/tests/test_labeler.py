import itertools
import math
import random
import warnings

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import mp_log10_sf, mp_z
from phagelab.labeler import (BINDER, DECREASED, INCREASED, NON_BINDER, NON_SIGNIFICANT,
                              UNCHANGED, InconsistentCountsError, InvalidLibraryError,
                              LabelingConfig, LabelingConfigError, ProportionTest,
                              aggregate_and_label, label_one, log10_normal_sf,
                              two_proportion_z, two_sided_log10_p, z_scores)
from phagelab.seqio import CountTable

# expected values below were computed with the mpmath oracles in conftest (60 digits)
Z_INCREASED = -31.230136290741492
Z_DECREASED = 4.0978788721788176
LOG10_P_DECREASED = -4.379912525503918


def test_equal_proportions():
    t = two_proportion_z(10, 1000, 10, 1000)
    assert (t.z, t.log10_p, t.direction) == (0.0, 0.0, UNCHANGED)


def test_strong_enrichment():
    t = two_proportion_z(10, 100_000, 1000, 100_000)
    assert t.z == pytest.approx(Z_INCREASED, rel=1e-13)
    assert t.direction == INCREASED
    assert t.p_hat1 == pytest.approx(1e-4)
    assert t.p_hat2 == pytest.approx(1e-2)
    assert t.pooled == pytest.approx(5.05e-3)


def test_depletion_p_value():
    t = two_proportion_z(100, 10_000, 50, 10_000)
    assert t.z == pytest.approx(Z_DECREASED, rel=1e-13)
    assert t.direction == DECREASED
    assert t.log10_p == pytest.approx(LOG10_P_DECREASED, abs=1e-12)
    assert t.p_value == pytest.approx(4.1695e-5, rel=1e-4)


@pytest.mark.parametrize("args", [(0, 10, 0, 10), (10, 10, 5, 5)])
def test_degenerate_pooled_proportion(args):
    t = two_proportion_z(*args)
    assert (t.z, t.log10_p, t.direction) == (0.0, 0.0, UNCHANGED)


def test_invalid_counts():
    with pytest.raises(InvalidLibraryError):
        two_proportion_z(0, 0, 1, 10)
    with pytest.raises(InconsistentCountsError):
        two_proportion_z(11, 10, 1, 10)
    with pytest.raises(InvalidLibraryError):
        z_scores([1], [0], [1], [10])


def test_exhaustive_small_counts_match_oracle():
    rng = random.Random(3)
    ns = range(1, 51)
    for _ in range(1500):
        n1, n2 = rng.choice(ns), rng.choice(ns)
        x1, x2 = rng.randint(0, n1), rng.randint(0, n2)
        t = two_proportion_z(x1, n1, x2, n2)
        if x1 + x2 in (0, n1 + n2):
            assert t.z == 0.0
            continue
        ref = mp_z(x1, n1, x2, n2)
        if ref == 0:
            assert t.z == 0.0
        else:
            assert abs(t.z - float(ref)) <= 1e-12 * abs(float(ref))


def test_vectorised_agrees_with_scalar():
    rng = np.random.default_rng(0)
    n1 = rng.integers(1, 10**6, 500)
    n2 = rng.integers(1, 10**6, 500)
    x1 = (rng.random(500) * n1).astype(np.int64)
    x2 = (rng.random(500) * n2).astype(np.int64)
    z, d = z_scores(x1, n1, x2, n2)
    for i in range(500):
        t = two_proportion_z(x1[i], n1[i], x2[i], n2[i])
        assert z[i] == pytest.approx(t.z, rel=1e-13, abs=1e-300)
        assert {1: INCREASED, -1: DECREASED, 0: UNCHANGED}[int(d[i])] == t.direction


counts = st.integers(1, 10**6).flatmap(
    lambda n1: st.integers(1, 10**6).flatmap(
        lambda n2: st.tuples(st.integers(0, n1), st.just(n1), st.integers(0, n2), st.just(n2))))


@given(counts)
def test_antisymmetry(c):
    x1, n1, x2, n2 = c
    a = two_proportion_z(x1, n1, x2, n2)
    b = two_proportion_z(x2, n2, x1, n1)
    assert a.z == -b.z
    flip = {INCREASED: DECREASED, DECREASED: INCREASED, UNCHANGED: UNCHANGED}
    assert b.direction == flip[a.direction]
    assert a.log10_p == b.log10_p


@given(counts, st.integers(2, 50))
def test_scale_sensitivity(c, k):
    x1, n1, x2, n2 = c
    a = two_proportion_z(x1, n1, x2, n2)
    if a.direction == UNCHANGED:
        return
    b = two_proportion_z(k * x1, k * n1, k * x2, k * n2)
    assert abs(b.z) > abs(a.z)


@given(counts)
def test_direction_and_p_invariants(c):
    t = two_proportion_z(*c)
    assert t.log10_p <= 0.0
    assert (t.direction == INCREASED) == (t.p_hat2 > t.p_hat1)
    assert (t.z == 0.0) == (t.direction == UNCHANGED)


def test_log10_normal_sf_examples():
    assert log10_normal_sf(0.0) == pytest.approx(-0.3010299956639812, abs=1e-15)
    assert log10_normal_sf(1.959964) == pytest.approx(-1.6020600070243658, abs=1e-12)
    assert log10_normal_sf(10.0) == pytest.approx(-23.118053405486076, abs=1e-12)
    assert math.isfinite(log10_normal_sf(38.0))
    assert log10_normal_sf(38.0) == pytest.approx(-315.53978970396251, abs=1e-9)


def test_log10_normal_sf_against_oracle_grid():
    zs = np.linspace(-8, 8, 801)
    got = log10_normal_sf(zs)
    ref = np.array([float(mp_log10_sf(z)) for z in zs])
    assert np.max(np.abs(got - ref)) <= 1e-12


def test_log10_normal_sf_rejects_non_finite():
    with pytest.raises(ValueError):
        log10_normal_sf(float("nan"))
    with pytest.raises(ValueError):
        log10_normal_sf(float("inf"))


def test_two_sided_p_monotone_in_abs_z():
    zs = np.linspace(0.01, 37, 2000)
    lp = two_sided_log10_p(zs)
    assert np.all(np.diff(lp) < 0)


def _test(direction, p):
    return ProportionTest(1, 10, 1, 10, 1.0, math.log10(p), direction)


@pytest.mark.parametrize("direction, p, label", [
    (INCREASED, 0.04, BINDER),
    (DECREASED, 0.04, NON_BINDER),
    (INCREASED, 0.06, NON_SIGNIFICANT),
    (DECREASED, 0.06, NON_SIGNIFICANT),
    (INCREASED, 0.05, BINDER),
    (UNCHANGED, 1.0, NON_SIGNIFICANT),
])
def test_label_one(direction, p, label):
    assert label_one(_test(direction, p), LabelingConfig()) == label


def test_config_validation():
    with pytest.raises(LabelingConfigError):
        LabelingConfig(alpha=0.0)
    with pytest.raises(LabelingConfigError):
        LabelingConfig(log10_ratio_threshold=-1)


# aggregation -----------------------------------------------------------------

N = 100_000


def mother(lid, entries):
    return CountTable(lid, "mother", entries)


def sub(lid, mid, target, entries):
    stage = "negative_control" if target == "NC" else "sublibrary"
    return CountTable(lid, stage, entries, target_id=target, mother_id=mid)


def _pad(entries, total=N):
    out = dict(entries)
    out["FILLER"] = total - sum(entries.values())
    return out


def rows_by(rows):
    return {(r.vhh_sequence, r.target_id): r for r in rows}


def test_min_p_winner_decides_label():
    m = mother("M", _pad({"V": 100}))
    # replicate 1: mild change; replicate 2: strong enrichment; replicate 3: unchanged
    subs = [sub("S1", "M", "wt", _pad({"V": 110})),
            sub("S2", "M", "wt", _pad({"V": 200})),
            sub("S3", "M", "wt", _pad({"V": 100}))]
    row = rows_by(aggregate_and_label([m], subs))[("V", "wt")]
    assert row.label == BINDER
    assert row.source_library_id == "M:S2"
    assert row.best_log10_p == pytest.approx(two_proportion_z(100, N, 200, N).log10_p)


def test_only_in_mother_is_non_binder():
    m = mother("M", _pad({"V": 50}))
    subs = [sub("S1", "M", "wt", _pad({})), sub("S2", "M", "wt", _pad({}))]
    row = rows_by(aggregate_and_label([m], subs))[("V", "wt")]
    assert row.label == NON_BINDER and row.best_direction == DECREASED


def test_unobserved_vhh_produces_no_row():
    m = mother("M", _pad({"V": 50}))
    other = mother("M2", _pad({"W": 50}))
    rows = rows_by(aggregate_and_label([m, other], [sub("S1", "M", "wt", _pad({}))]))
    assert ("W", "wt") not in rows


def test_unknown_mother_is_configuration_error():
    with pytest.raises(LabelingConfigError):
        aggregate_and_label([mother("M", _pad({}))], [sub("S", "X", "wt", _pad({}))])


def test_tie_prefers_increase_then_source():
    # identical |z| in opposite directions from two replicates
    m = mother("M", _pad({"V": 30}))
    up = sub("B_up", "M", "wt", _pad({"V": 60}))
    m2 = mother("M2", _pad({"V": 60}))
    down = sub("A_down", "M2", "wt", _pad({"V": 30}))
    row = rows_by(aggregate_and_label([m, m2], [down, up]))[("V", "wt")]
    assert row.best_direction == INCREASED and row.label == BINDER
    assert row.source_library_id == "M:B_up"
    # same direction, same p: lexicographically smallest source wins
    a = sub("A", "M", "wt", _pad({"V": 60}))
    b = sub("B", "M", "wt", _pad({"V": 60}))
    row = rows_by(aggregate_and_label([m], [b, a]))[("V", "wt")]
    assert row.source_library_id == "M:A"


def _oracle_labels(mothers, subs, cfg):
    """Brute force: every pairing's test, choose by (log10 p, not increased, source)."""
    by_id = {m.library_id: m for m in mothers}
    out = {}
    for s in subs:
        m = by_id[s.mother_id]
        for v in set(m.entries) | set(s.entries):
            z, d = z_scores([m.count(v)], m.total_reads, [s.count(v)], s.total_reads)
            lp = 0.0 if d[0] == 0 else float(two_sided_log10_p(z[0]))
            direction = {1: INCREASED, -1: DECREASED, 0: UNCHANGED}[int(d[0])]
            key = (lp, direction != INCREASED, f"{m.library_id}:{s.library_id}")
            cur = out.get((v, s.target_id))
            if cur is None or key < cur[0]:
                out[(v, s.target_id)] = (key, direction)
    labels = {}
    for k, ((lp, _, src), direction) in out.items():
        if lp <= math.log10(cfg.alpha) and direction == INCREASED:
            labels[k] = (BINDER, src)
        elif lp <= math.log10(cfg.alpha) and direction == DECREASED:
            labels[k] = (NON_BINDER, src)
        else:
            labels[k] = (NON_SIGNIFICANT, src)
    return labels


def test_exhaustive_small_enumeration_against_tie_break_oracle():
    cfg = LabelingConfig()
    levels = [0, 20, 40, 60]
    n = 0
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        for c_m1, c_m2, c_a, c_b in itertools.product(levels, repeat=4):
            if c_m1 + c_m2 + c_a + c_b == 0:
                continue
            mothers = [mother("M1", _pad({"V": c_m1} if c_m1 else {}, 10_000)),
                       mother("M2", _pad({"V": c_m2} if c_m2 else {}, 10_000))]
            subs = [sub("A", "M1", "wt", _pad({"V": c_a} if c_a else {}, 10_000)),
                    sub("B", "M2", "wt", _pad({"V": c_b} if c_b else {}, 10_000)),
                    sub("C", "M1", "wt", _pad({"V": c_b} if c_b else {}, 10_000))]
            got = {(r.vhh_sequence, r.target_id): (r.label, r.source_library_id)
                   for r in aggregate_and_label(mothers, subs, cfg)}
            assert got == _oracle_labels(mothers, subs, cfg)
            n += 1
    assert n == 255


def test_aggregation_is_permutation_invariant():
    rng = np.random.default_rng(5)
    seqs = [f"V{i}" for i in range(40)]
    mothers = [mother(f"M{j}", _pad({s: int(rng.integers(1, 80)) for s in seqs})) for j in range(3)]
    subs = []
    for j in range(3):
        for t in ("wt", "P42A"):
            subs.append(sub(f"S{j}{t}", f"M{j}", t,
                            _pad({s: int(rng.integers(1, 120)) for s in seqs if rng.random() < 0.8})))
    ref = aggregate_and_label(mothers, subs)
    for _ in range(5):
        ms, ss = list(mothers), list(subs)
        random.Random(int(rng.integers(1e9))).shuffle(ms)
        random.Random(int(rng.integers(1e9))).shuffle(ss)
        assert aggregate_and_label(ms, ss) == ref


def test_label_soundness_on_random_tables():
    rng = np.random.default_rng(9)
    seqs = [f"V{i}" for i in range(200)]
    m = mother("M", _pad({s: int(rng.integers(1, 60)) for s in seqs}))
    subs = [sub(f"S{r}", "M", "wt", _pad({s: int(rng.integers(1, 90)) for s in seqs}))
            for r in range(3)]
    cfg = LabelingConfig()
    for row in aggregate_and_label([m], subs, cfg):
        if row.label == BINDER:
            assert row.best_direction == INCREASED and row.best_log10_p <= cfg.log10_alpha
        if row.label == NON_BINDER:
            assert row.best_direction == DECREASED and row.best_log10_p <= cfg.log10_alpha


def test_small_library_warns():
    with pytest.warns(UserWarning):
        aggregate_and_label([mother("M", {"V": 5, "W": 5})],
                            [sub("S", "M", "wt", {"V": 9, "W": 1})])


def test_min_library_size_skips_pairing():
    m = mother("M", _pad({"V": 10}))
    s = sub("S", "M", "wt", {"V": 500})
    assert aggregate_and_label([m], [s], LabelingConfig(min_library_size=1000)) == []
