"""Two-proportion z-test labeling of VHH-target pairs.

Each VHH is compared between a mother library (before panning) and a
sublibrary (after panning against one target). The pooled two-proportion
z statistic gives a two-sided p-value; across all pairings for a target the
smallest p-value wins and decides the provisional label.

All p-values are carried as log10 so that extreme enrichments do not
underflow to zero.
"""

from __future__ import annotations

import logging
import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.special import log_ndtr

from .seqio import CountTable

log = logging.getLogger(__name__)

LN10 = math.log(10.0)
LOG10_2 = math.log10(2.0)

INCREASED = "increased"
DECREASED = "decreased"
UNCHANGED = "unchanged"
_DIRECTIONS = (DECREASED, UNCHANGED, INCREASED)

BINDER = "binder"
NON_BINDER = "non_binder"
NON_SIGNIFICANT = "non_significant"
NOISE = "noise"
LABELS = (BINDER, NON_BINDER, NON_SIGNIFICANT, NOISE)

SMALL_LIBRARY_WARNING = 1000


class InvalidLibraryError(ValueError):
    pass


class InconsistentCountsError(ValueError):
    pass


class LabelingConfigError(ValueError):
    pass


@dataclass(frozen=True)
class LabelingConfig:
    alpha: float = 0.05
    log10_ratio_threshold: float | None = 2.5
    min_library_size: int = 0

    def __post_init__(self):
        if not 0.0 < self.alpha < 1.0:
            raise LabelingConfigError("alpha must lie in (0, 1)")
        if self.log10_ratio_threshold is not None and not self.log10_ratio_threshold > 0:
            raise LabelingConfigError("log10_ratio_threshold must be positive")
        if self.min_library_size < 0:
            raise LabelingConfigError("min_library_size must be non-negative")

    @property
    def log10_alpha(self) -> float:
        return math.log10(self.alpha)


@dataclass(frozen=True)
class ProportionTest:
    x1: int
    n1: int
    x2: int
    n2: int
    z: float
    log10_p: float
    direction: str

    @property
    def p_hat1(self) -> float:
        return self.x1 / self.n1

    @property
    def p_hat2(self) -> float:
        return self.x2 / self.n2

    @property
    def pooled(self) -> float:
        return (self.x1 + self.x2) / (self.n1 + self.n2)

    @property
    def p_value(self) -> float:
        return 10.0 ** self.log10_p


@dataclass(frozen=True)
class LabeledPair:
    vhh_sequence: str
    target_id: str
    antigen_sequence: str
    label: str
    best_log10_p: float
    best_direction: str
    source_library_id: str


def log10_normal_sf(z):
    """log10 of the upper tail P(N(0, 1) > z).

    Works on scalars or arrays and stays finite far beyond the point where
    the tail itself underflows a double.
    """
    arr = np.asarray(z, dtype=float)
    if not np.all(np.isfinite(arr)):
        raise ValueError("log10_normal_sf requires finite input")
    out = log_ndtr(-arr) / LN10
    return float(out) if out.ndim == 0 else out


def two_sided_log10_p(z):
    """log10 of 2 * P(N(0, 1) > |z|), capped at 0."""
    arr = np.abs(np.asarray(z, dtype=float))
    out = np.minimum(LOG10_2 + log10_normal_sf(arr), 0.0)
    return float(out) if np.ndim(out) == 0 else out


def _check_counts(x1, n1, x2, n2):
    if n1 <= 0 or n2 <= 0:
        raise InvalidLibraryError(f"library totals must be positive (n1={n1}, n2={n2})")
    if x1 < 0 or x2 < 0 or x1 > n1 or x2 > n2:
        raise InconsistentCountsError(f"counts out of range (x1={x1}/{n1}, x2={x2}/{n2})")


def two_proportion_z(x1: int, n1: int, x2: int, n2: int) -> ProportionTest:
    """Pooled two-proportion z-test of x1/n1 (before) against x2/n2 (after).

    Z = (p1 - p2) / sqrt(p (1 - p) (1/n1 + 1/n2)) with p the pooled proportion,
    so an enriched VHH gets a negative Z. The algebra is rearranged to
    (x1 n2 - x2 n1) sqrt(N / (X (N - X) n1 n2)) and evaluated in exact integer
    arithmetic up to the final rounding.
    """
    x1, n1, x2, n2 = int(x1), int(n1), int(x2), int(n2)
    _check_counts(x1, n1, x2, n2)
    big_n = n1 + n2
    big_x = x1 + x2
    if big_x == 0 or big_x == big_n:
        return ProportionTest(x1, n1, x2, n2, 0.0, 0.0, UNCHANGED)
    num = x1 * n2 - x2 * n1
    if num == 0:
        return ProportionTest(x1, n1, x2, n2, 0.0, 0.0, UNCHANGED)
    z = num * math.sqrt(big_n / (big_x * (big_n - big_x) * n1 * n2))
    direction = INCREASED if num < 0 else DECREASED
    return ProportionTest(x1, n1, x2, n2, z, two_sided_log10_p(z), direction)


def z_scores(x1, n1, x2, n2):
    """Vectorised z statistics and direction codes (-1 decreased, 0, +1 increased)."""
    x1 = np.asarray(x1, dtype=np.int64)
    x2 = np.asarray(x2, dtype=np.int64)
    n1 = np.broadcast_to(np.asarray(n1, dtype=np.int64), x1.shape)
    n2 = np.broadcast_to(np.asarray(n2, dtype=np.int64), x2.shape)
    if np.any(n1 <= 0) or np.any(n2 <= 0):
        raise InvalidLibraryError("library totals must be positive")
    if np.any((x1 < 0) | (x2 < 0) | (x1 > n1) | (x2 > n2)):
        raise InconsistentCountsError("counts out of range")
    big_n = (n1 + n2).astype(float)
    big_x = (x1 + x2).astype(float)
    num = x1 * n2 - x2 * n1
    denom = big_x * (big_n - big_x) * n1.astype(float) * n2.astype(float)
    ok = (num != 0) & (denom > 0)
    z = np.zeros(x1.shape)
    z[ok] = num[ok] * np.sqrt(big_n[ok] / denom[ok])
    direction = np.where(ok, -np.sign(num), 0).astype(np.int8)
    return z, direction


def label_from(log10_p: float, direction: str, cfg: LabelingConfig) -> str:
    if log10_p <= cfg.log10_alpha:
        if direction == INCREASED:
            return BINDER
        if direction == DECREASED:
            return NON_BINDER
    return NON_SIGNIFICANT


def label_one(test: ProportionTest, cfg: LabelingConfig = LabelingConfig()) -> str:
    return label_from(test.log10_p, test.direction, cfg)


def pairing_id(mother_id: str, sub_id: str) -> str:
    return f"{mother_id}:{sub_id}"


def aggregate_and_label(mothers, subs, cfg: LabelingConfig = LabelingConfig(),
                        antigens: dict | None = None) -> list[LabeledPair]:
    """Label every (VHH, target) pair seen in any mother/sublibrary pairing.

    Parameters
    ----------
    mothers : list of CountTable
        Mother libraries, matched to sublibraries by ``library_id``.
    subs : list of CountTable
        Sublibraries (and negative-control libraries); each names its mother
        through ``mother_id`` and its target through ``target_id``.
    cfg : LabelingConfig
    antigens : dict, optional
        target_id -> antigen amino-acid sequence, copied into the rows.

    Returns
    -------
    list of LabeledPair
        Sorted by target then VHH sequence. For each pair the winning test is
        the one with the smallest log10 p; ties prefer an increase, then the
        lexicographically smallest ``mother:sublibrary`` source id.
    """
    antigens = antigens or {}
    by_id: dict[str, CountTable] = {}
    for m in mothers:
        if m.library_id in by_id:
            raise LabelingConfigError(f"duplicate mother library {m.library_id!r}")
        by_id[m.library_id] = m

    by_target: dict[str, list[tuple[str, CountTable, CountTable]]] = {}
    for s in subs:
        if s.mother_id not in by_id:
            raise LabelingConfigError(
                f"sublibrary {s.library_id!r} references unknown mother {s.mother_id!r}")
        m = by_id[s.mother_id]
        if min(m.total_reads, s.total_reads) < cfg.min_library_size:
            log.warning("skipping pairing %s: below min_library_size",
                        pairing_id(m.library_id, s.library_id))
            continue
        by_target.setdefault(s.target_id, []).append((pairing_id(m.library_id, s.library_id), m, s))

    for pairings in by_target.values():
        for _, m, s in pairings:
            for lib in (m, s):
                if lib.total_reads == 0:
                    raise InvalidLibraryError(f"library {lib.library_id!r} has no reads")
                if lib.total_reads < SMALL_LIBRARY_WARNING:
                    warnings.warn(f"library {lib.library_id!r} has only {lib.total_reads} reads; "
                                  "the normal approximation may be poor", stacklevel=2)

    rows: list[LabeledPair] = []
    for target in sorted(by_target):
        pairings = sorted(by_target[target], key=lambda p: p[0])
        seqs = sorted(set().union(*(m.entries.keys() | s.entries.keys() for _, m, s in pairings)))
        index = {s: i for i, s in enumerate(seqs)}
        k = len(seqs)
        best_lp = np.full(k, np.inf)
        best_dir = np.zeros(k, dtype=np.int8)
        best_src = np.full(k, -1, dtype=np.int64)

        for j, (_, m, s) in enumerate(pairings):
            idx = np.fromiter((index[q] for q in m.entries.keys() | s.entries.keys()),
                              dtype=np.int64)
            x1 = np.fromiter((m.entries.get(seqs[i], 0) for i in idx), dtype=np.int64, count=len(idx))
            x2 = np.fromiter((s.entries.get(seqs[i], 0) for i in idx), dtype=np.int64, count=len(idx))
            z, d = z_scores(x1, m.total_reads, x2, s.total_reads)
            lp = np.where(d == 0, 0.0, two_sided_log10_p(z))
            cur_lp = best_lp[idx]
            better = (lp < cur_lp) | ((lp == cur_lp) & (d > best_dir[idx]))
            sel = idx[better]
            best_lp[sel] = lp[better]
            best_dir[sel] = d[better]
            best_src[sel] = j

        ag_seq = antigens.get(target, "")
        for i, q in enumerate(seqs):
            lp = float(best_lp[i])
            direction = _DIRECTIONS[best_dir[i] + 1]
            rows.append(LabeledPair(q, target, ag_seq, label_from(lp, direction, cfg), lp,
                                    direction, pairings[best_src[i]][0]))
    return rows
