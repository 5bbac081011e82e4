"""Dataset summaries and pairwise sequence-identity distributions."""

from __future__ import annotations

from collections import Counter, defaultdict
from dataclasses import dataclass, field

import numba
import numpy as np

from ..labeler import BINDER, LABELS, NON_BINDER


@dataclass
class DatasetStats:
    n_rows: int = 0
    label_counts: dict = field(default_factory=dict)
    per_antigen: dict = field(default_factory=dict)  # antigen -> {label: count}
    unique_vhh: int = 0
    binder_vhh: int = 0
    differential_binders: int = 0

    @property
    def n_binder(self) -> int:
        return self.label_counts.get(BINDER, 0)

    @property
    def n_non_binder(self) -> int:
        return self.label_counts.get(NON_BINDER, 0)

    def report(self) -> str:
        lines = [f"rows\t{self.n_rows}"]
        lines += [f"{lab}\t{self.label_counts.get(lab, 0)}" for lab in LABELS]
        lines += [f"unique_vhh\t{self.unique_vhh}",
                  f"binder_vhh\t{self.binder_vhh}",
                  f"differential_binders\t{self.differential_binders}",
                  "", "antigen\tbinder\tnon_binder\ttotal"]
        for ag in sorted(self.per_antigen):
            c = self.per_antigen[ag]
            b, nb = c.get(BINDER, 0), c.get(NON_BINDER, 0)
            lines.append(f"{ag}\t{b}\t{nb}\t{b + nb}")
        return "\n".join(lines) + "\n"


def dataset_stats(rows) -> DatasetStats:
    """Summarise labeled rows.

    Unique-VHH counts are taken over binder and non-binder rows, the two
    labels used as training data. A differential binder is a VHH labeled
    binder for at least one antigen and non-binder for at least one other.
    """
    labels = Counter()
    per_antigen: dict = defaultdict(Counter)
    vhh_labels: dict = defaultdict(set)
    n = 0
    for r in rows:
        n += 1
        labels[r.label] += 1
        per_antigen[r.target_id][r.label] += 1
        if r.label in (BINDER, NON_BINDER):
            vhh_labels[r.vhh_sequence].add(r.label)
    binder = sum(BINDER in s for s in vhh_labels.values())
    diff = sum(s == {BINDER, NON_BINDER} for s in vhh_labels.values())
    return DatasetStats(n, dict(labels), {k: dict(v) for k, v in per_antigen.items()},
                        len(vhh_labels), binder, diff)


def _encode(seq: str) -> np.ndarray:
    return np.frombuffer(seq.encode("ascii"), dtype=np.uint8)


def _global_identity(a, b, match, mismatch, gap):
    """Needleman-Wunsch with a linear gap cost; returns (score, matches, length).

    The traceback prefers diagonal moves, then gaps in `b`, then gaps in `a`.
    """
    n, m = len(a), len(b)
    H = np.empty((n + 1, m + 1))
    for i in range(n + 1):
        H[i, 0] = i * gap
    for j in range(m + 1):
        H[0, j] = j * gap
    for i in range(1, n + 1):
        for j in range(1, m + 1):
            s = match if a[i - 1] == b[j - 1] else mismatch
            d = H[i - 1, j - 1] + s
            u = H[i - 1, j] + gap
            lft = H[i, j - 1] + gap
            best = d
            if u > best:
                best = u
            if lft > best:
                best = lft
            H[i, j] = best
    i, j = n, m
    matches = 0
    length = 0
    while i > 0 or j > 0:
        if i > 0 and j > 0:
            s = match if a[i - 1] == b[j - 1] else mismatch
            if H[i, j] == H[i - 1, j - 1] + s:
                if a[i - 1] == b[j - 1]:
                    matches += 1
                i -= 1
                j -= 1
                length += 1
                continue
        if i > 0 and H[i, j] == H[i - 1, j] + gap:
            i -= 1
        else:
            j -= 1
        length += 1
    return H[n, m], matches, length


_global_identity_jit = numba.njit(cache=True)(_global_identity)


def global_alignment(a: str, b: str, match=1.0, mismatch=0.0, gap=-1.0):
    """(score, matches, alignment length) of an optimal global alignment."""
    score, matches, length = _global_identity_jit(_encode(a), _encode(b), match, mismatch, gap)
    return float(score), int(matches), int(length)


def sequence_identity(a: str, b: str, match=1.0, mismatch=0.0, gap=-1.0) -> float:
    """Identical aligned positions divided by the global alignment length."""
    if not a and not b:
        return 1.0
    _, matches, length = global_alignment(a, b, match, mismatch, gap)
    return matches / length


def pairwise_identities(seqs, gap=-1.0) -> np.ndarray:
    encoded = [_encode(s) for s in seqs]
    out = []
    for i in range(len(encoded)):
        for j in range(i + 1, len(encoded)):
            _, matches, length = _global_identity_jit(encoded[i], encoded[j], 1.0, 0.0, gap)
            out.append(matches / length if length else 1.0)
    return np.array(out)


def pairwise_identity_distribution(seqs, sample_size: int | None = 700, seed: int = 0,
                                   gap: float = -1.0):
    """Histogram (100 bins of width 0.01 over [0, 1]) of all pairwise identities.

    When more than `sample_size` unique sequences are given, a seeded random
    sample of that size is used. Returns (counts, bin_edges, identities).
    """
    uniq = sorted(set(seqs))
    if len(uniq) < 2:
        raise ValueError("need at least two distinct sequences")
    if sample_size is not None and len(uniq) > sample_size:
        pick = np.random.default_rng(seed).choice(len(uniq), size=sample_size, replace=False)
        uniq = [uniq[i] for i in sorted(pick)]
    ident = pairwise_identities(uniq, gap)
    counts, edges = np.histogram(ident, bins=100, range=(0.0, 1.0))
    return counts, edges, ident
