"""
Labeling VHHs from panning read counts
======================================

A small simulated panning run: one mother library, one sublibrary per
antigen and one negative-control panning. We label every (VHH, antigen)
pair and compare the labels with the simulator's ground truth.
"""

from collections import Counter

from phagelab import LabelingConfig, SimConfig, evaluate_labels, generate_experiment
from phagelab.labeler import two_proportion_z
from phagelab.panning_sim import run_labeling

# A VHH with 10 reads out of 100,000 before panning and 1,000 after.
# The z statistic is negative because the proportion went up.
t = two_proportion_z(10, 100_000, 1000, 100_000)
print(f"z = {t.z:.2f}, log10 p = {t.log10_p:.1f}, {t.direction}")

# With 5,000 reads after panning, p itself underflows a double but log10 p is fine
t = two_proportion_z(10, 100_000, 5000, 100_000)
print(f"log10 p = {t.log10_p:.1f}, p as a float = {t.p_value}")

###############################################################################
# Simulate a small experiment and run the labeling pipeline on it.

truth, exp = generate_experiment(SimConfig(seed=1, n_vhh=500, n_targets=3))
for table in exp.tables()[:3]:
    print(table.library_id, table.stage, table.target_id, table.total_reads, "reads")

final, decisions, nc_rows = run_labeling(exp, LabelingConfig(alpha=0.05))
print(Counter(r.label for r in final))

###############################################################################
# Against the ground truth. Nonspecific clones bind the negative control too,
# so they should come out as noise rather than binders.

ev = evaluate_labels(final, truth)
print(f"sensitivity      {ev.sensitivity:.3f}")
print(f"false binders    {ev.false_binder_rate:.3f}")
print(f"noise rate       {ev.noise_rate:.3f}  ({ev.nonspecific_rows} nonspecific rows)")
for target, c in sorted(ev.per_target.items()):
    print(f"  {target:10s} tp={c.tp:4d} fp={c.fp:3d} tn={c.tn:5d} fn={c.fn:3d}")
