"""
The negative-control check
==========================

A provisional binder is compared against the same VHH's result in the
negative-control panning. Everything happens in log10 space.
"""

from phagelab.labeler import BINDER, NON_BINDER, NON_SIGNIFICANT, LabeledPair
from phagelab.noise_filter import decide, reduce_noise

# (target log10 p, NC label, NC log10 p)
cases = [
    (-10.0, NON_BINDER, -3.0),
    (-10.0, BINDER, -6.0),
    (-8.0, NON_SIGNIFICANT, -4.0),
    (-5.0, NON_SIGNIFICANT, -4.0),
    (-300.0, NON_SIGNIFICANT, -290.0),
]
for target_lp, nc_label, nc_lp in cases:
    outcome, branch = decide(target_lp, nc_label, nc_lp, log10_ratio_threshold=2.5)
    print(f"{target_lp:7.1f} vs NC {nc_label:16s} {nc_lp:7.1f} -> {outcome:19s} ({branch})")

###############################################################################
# The same thing on rows. A VHH that never showed up in the negative
# control is treated as non-significant there with p = 1.

rows = [LabeledPair("QVQLV", "wild-type", "", BINDER, -2.1, "increased", "M1:S1"),
        LabeledPair("QVKLE", "wild-type", "", BINDER, -9.0, "increased", "M1:S1")]
out, audit = reduce_noise(rows, [])
for r, d in zip(out, audit):
    print(r.vhh_sequence, r.label, d.branch)
