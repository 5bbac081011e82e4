"""Negative-control re-check of provisional binders.

A binder is compared with the same VHH's result against the negative
control (panning without any target protein):

* NC non-binder -> stays a binder (branch "1")
* NC binder -> relabelled noise (branch "2")
* NC non-significant -> the p-value ratio p_NC / p_target decides: below
  10**threshold it becomes non-significant ("3a"), otherwise it stays a
  binder ("3b").

The ratio is compared as a difference of log10 p-values.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

from .labeler import (BINDER, NON_BINDER, NON_SIGNIFICANT, NOISE, LabeledPair,
                      LabelingConfig, LabelingConfigError, aggregate_and_label)

ABSENT = "absent"

KEEP_BINDER = "keep_binder"
TO_NOISE = "to_noise"
TO_NON_SIGNIFICANT = "to_non_significant"


@dataclass(frozen=True)
class NoiseDecision:
    vhh_sequence: str
    target_id: str
    il6_log10_p: float
    nc_label: str
    nc_log10_p: float | None
    outcome: str
    branch: str


def decide(target_log10_p: float, nc_label: str, nc_log10_p: float | None,
           log10_ratio_threshold: float) -> tuple[str, str]:
    """Return (outcome, branch) for one provisional binder."""
    if nc_label == NON_BINDER:
        return KEEP_BINDER, "1"
    if nc_label == BINDER:
        return TO_NOISE, "2"
    if nc_label == ABSENT:
        nc_log10_p = 0.0
    elif nc_label != NON_SIGNIFICANT:
        raise ValueError(f"unexpected negative-control label {nc_label!r}")
    if nc_log10_p - target_log10_p < log10_ratio_threshold:
        return TO_NON_SIGNIFICANT, "3a"
    return KEEP_BINDER, "3b"


def reduce_noise(rows, nc_results, cfg: LabelingConfig = LabelingConfig()):
    """Apply the negative-control check to every binder in `rows`.

    `nc_results` is either a list of LabeledPair against the negative control
    or a mapping from VHH sequence to such a row. VHHs never observed in a
    negative-control pairing count as non-significant with p = 1.

    Returns the relabelled rows (same order; non-binders and non-significant
    rows untouched) and one NoiseDecision per binder.
    """
    threshold = cfg.log10_ratio_threshold
    if threshold is None:
        raise LabelingConfigError("noise reduction needs log10_ratio_threshold")
    if not isinstance(nc_results, dict):
        nc_results = {r.vhh_sequence: r for r in nc_results}

    out: list[LabeledPair] = []
    decisions: list[NoiseDecision] = []
    for row in rows:
        if row.label != BINDER:
            out.append(row)
            continue
        nc = nc_results.get(row.vhh_sequence)
        nc_label = ABSENT if nc is None else nc.label
        nc_lp = None if nc is None else nc.best_log10_p
        outcome, branch = decide(row.best_log10_p, nc_label, nc_lp, threshold)
        decisions.append(NoiseDecision(row.vhh_sequence, row.target_id, row.best_log10_p,
                                       nc_label, nc_lp, outcome, branch))
        if outcome == TO_NOISE:
            row = replace(row, label=NOISE)
        elif outcome == TO_NON_SIGNIFICANT:
            row = replace(row, label=NON_SIGNIFICANT)
        out.append(row)
    return out, decisions


def label_experiment(mothers, subs, cfg: LabelingConfig = LabelingConfig(),
                     antigens: dict | None = None, nc_target: str = "NC"):
    """Label all targets, then denoise against the negative-control target.

    Returns (final rows without the NC target, noise decisions, NC rows).
    """
    labeled = aggregate_and_label(mothers, subs, cfg, antigens)
    nc_rows = [r for r in labeled if r.target_id == nc_target]
    target_rows = [r for r in labeled if r.target_id != nc_target]
    final, decisions = reduce_noise(target_rows, nc_rows, cfg)
    return final, decisions, nc_rows
