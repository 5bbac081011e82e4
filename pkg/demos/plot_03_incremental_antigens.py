"""
Training on more antigen types
==============================

Simulated binders recognise a window of positions on IL-6, so an alanine
mutant inside the window knocks binding out. Training on more mutants
should help a classifier generalise to held-out ones.
This takes a minute or two.
"""

from phagelab import SimConfig, generate_experiment
from phagelab.benchmark import dataset_stats, make_split_plan, mean_by_antigens, run_benchmark
from phagelab.panning_sim import run_labeling

truth, exp = generate_experiment(SimConfig(seed=0, n_vhh=1000, n_targets=31,
                                           binding_mode="epitope"))
rows, _, _ = run_labeling(exp)
stats = dataset_stats(rows)
print(f"{stats.n_binder} binder rows, {stats.n_non_binder} non-binder rows, "
      f"{stats.differential_binders} VHHs that bind some antigens and not others")

plan = make_split_plan(seed=0)
print("held out:", ", ".join(plan.test_antigens))
print("added in order:", ", ".join(plan.train_order))

###############################################################################
# Logistic regression on the one-hot pair encoding, two shuffled orders.

results = run_benchmark(rows, "lr", runs=2, seed=0, checkpoints=(1, 4, 8, 16))
for metric in ("precision", "recall", "f1", "pr_auc"):
    means = mean_by_antigens(results, metric)
    print(f"{metric:9s}", "  ".join(f"{k:2d}: {v:.3f}" for k, v in sorted(means.items())))
