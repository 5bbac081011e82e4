"""Phage-display panning analysis: read counts to labeled antigen-VHH pairs."""

from .labeler import (LabeledPair, LabelingConfig, ProportionTest, aggregate_and_label,
                      label_one, log10_normal_sf, two_proportion_z)
from .noise_filter import NoiseDecision, label_experiment, reduce_noise
from .panning_sim import SimConfig, evaluate_labels, generate_experiment, run_labeling
from .seqio import (CountTable, SequenceRecord, build_count_table, parse_fasta,
                    remove_singletons, translate_orf)

__version__ = "0.1.0"
