"""Incremental-antigen benchmark: train on growing antigen sets, score on held-out mutants."""

from __future__ import annotations

import logging
import os
from dataclasses import dataclass, replace

import numpy as np

from ..antigens import TEST_MUTANTS, TRAIN_MUTANTS
from ..dataset import format_labeled_csv, read_labeled_csv
from ..labeler import BINDER
from ..seqio import atomic_write_text
from .features import design_matrix
from .metrics import EvalMetrics, evaluate
from .models import (TrainConfig, train_logreg, train_mlp, undersample_indices,
                     validation_split)
from .splits import SplitPlan, benchmark_rows, make_split_plan, split_rows

log = logging.getLogger(__name__)

MODELS = ("lr", "mlp")
METRIC_COLUMNS = ["run", "checkpoint", "n_antigens", "model", "precision", "recall", "f1",
                  "pr_auc"]


@dataclass(frozen=True)
class BenchmarkResult:
    run: int
    checkpoint: int  # 1-based index into the schedule
    n_antigens: int
    model: str
    metrics: EvalMetrics


def _xy(rows, encoding):
    X = design_matrix([(r.vhh_sequence, r.antigen_sequence) for r in rows], encoding)
    y = np.array([r.label == BINDER for r in rows], dtype=float)
    return X, y


def fit(model: str, X, y, cfg: TrainConfig):
    if cfg.undersample:
        keep = undersample_indices(y, cfg.seed)
        X, y = X[keep], y[keep]
    if model == "lr":
        tr, _ = validation_split(X.shape[0], cfg.validation_fraction, cfg.seed)
        return train_logreg(X[tr], y[tr], cfg)
    if model == "mlp":
        return train_mlp(X, y, cfg)
    raise ValueError(f"unknown model {model!r}")


def train_and_evaluate(train_rows, test_rows, model: str = "lr", encoding: str = "onehot",
                       cfg: TrainConfig = TrainConfig()) -> EvalMetrics:
    Xtr, ytr = _xy(benchmark_rows(train_rows), encoding)
    Xte, yte = _xy(benchmark_rows(test_rows), encoding)
    return evaluate(fit(model, Xtr, ytr, cfg), Xte, yte)


def run_benchmark(rows, model: str = "lr", encoding: str = "onehot", runs: int = 5,
                  seed: int = 0, checkpoints=None, cfg: TrainConfig = TrainConfig(),
                  train_mutants=TRAIN_MUTANTS, test_mutants=TEST_MUTANTS):
    """Results for every (run, checkpoint); run r uses split seed ``seed + r``."""
    rows = benchmark_rows(rows)
    results = []
    for run in range(1, runs + 1):
        plan = make_split_plan(train_mutants, test_mutants, seed + run - 1)
        for i, n in enumerate(plan.schedule, start=1):
            if checkpoints is not None and n not in checkpoints:
                continue
            train, test = split_rows(rows, plan, n)
            m = train_and_evaluate(train, test, model, encoding, replace(cfg, seed=seed + run - 1))
            log.info("run %d, %d antigens: P=%.3f R=%.3f F1=%.3f AP=%.3f", run, n,
                     m.precision, m.recall, m.f1, m.pr_auc)
            results.append(BenchmarkResult(run, i, n, model, m))
    return results


def mean_by_antigens(results, field_name: str = "f1") -> dict:
    out: dict[int, list] = {}
    for r in results:
        out.setdefault(r.n_antigens, []).append(getattr(r.metrics, field_name))
    return {k: float(np.mean(v)) for k, v in sorted(out.items())}


# split directories -----------------------------------------------------------

def _plan_text(plan: SplitPlan) -> str:
    lines = [f"seed\t{plan.seed}", "test\t" + ",".join(plan.test_antigens),
             "train_order\t" + ",".join(plan.train_order),
             "schedule\t" + ",".join(map(str, plan.schedule))]
    return "\n".join(lines) + "\n"


def _parse_plan(text: str) -> SplitPlan:
    kv = dict(line.split("\t", 1) for line in text.splitlines() if line)
    return SplitPlan(tuple(kv["test"].split(",")), tuple(kv["train_order"].split(",")),
                     tuple(int(x) for x in kv["schedule"].split(",")), int(kv["seed"]))


def write_splits(rows, out_dir, runs: int = 5, seed: int = 0, train_mutants=TRAIN_MUTANTS,
                 test_mutants=TEST_MUTANTS):
    """Write run_<r>/{plan.tsv,test.csv,train_<nn>.csv}; nn is the antigen count."""
    rows = benchmark_rows(rows)
    plans = []
    for run in range(1, runs + 1):
        plan = make_split_plan(train_mutants, test_mutants, seed + run - 1)
        d = os.path.join(out_dir, f"run_{run}")
        os.makedirs(d, exist_ok=True)
        atomic_write_text(os.path.join(d, "plan.tsv"), _plan_text(plan))
        for n in plan.schedule:
            train, test = split_rows(rows, plan, n)
            atomic_write_text(os.path.join(d, f"train_{n:02d}.csv"), format_labeled_csv(train))
        atomic_write_text(os.path.join(d, "test.csv"), format_labeled_csv(test))
        plans.append(plan)
    return plans


def evaluate_split_dir(split_dir, model: str = "lr", encoding: str = "onehot",
                       cfg: TrainConfig = TrainConfig()):
    results = []
    runs = sorted((d for d in os.listdir(split_dir) if d.startswith("run_")),
                  key=lambda d: int(d.split("_")[1]))
    for d in runs:
        run = int(d.split("_")[1])
        path = os.path.join(split_dir, d)
        with open(os.path.join(path, "plan.tsv"), encoding="utf-8") as fh:
            plan = _parse_plan(fh.read())
        test = read_labeled_csv(os.path.join(path, "test.csv"))
        for i, n in enumerate(plan.schedule, start=1):
            train = read_labeled_csv(os.path.join(path, f"train_{n:02d}.csv"))
            m = train_and_evaluate(train, test, model, encoding, replace(cfg, seed=plan.seed))
            results.append(BenchmarkResult(run, i, n, model, m))
    return results


def format_metrics_csv(results) -> str:
    lines = [",".join(METRIC_COLUMNS)]
    for r in results:
        m = r.metrics
        lines.append(f"{r.run},{r.checkpoint},{r.n_antigens},{r.model},"
                     f"{m.precision!r},{m.recall!r},{m.f1!r},{m.pr_auc!r}")
    return "\n".join(lines) + "\n"


def format_pr_curves_tsv(results) -> str:
    lines = ["run\tn_antigens\tmodel\trecall\tprecision"]
    for r in results:
        for rec, prec in r.metrics.pr_curve:
            lines.append(f"{r.run}\t{r.n_antigens}\t{r.model}\t{rec!r}\t{prec!r}")
    return "\n".join(lines) + "\n"
