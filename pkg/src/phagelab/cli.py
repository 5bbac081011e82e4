"""Command-line entry point: ``phagelab <subcommand> ...``.

Every subcommand exits 0 on success. On failure it prints one JSON line
``{"error": <kind>, "message": <text>}`` to stderr and exits 1.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import logging
import os
import sys

from . import seqio
from .benchmark.features import ENCODINGS
from .benchmark.runner import (MODELS, evaluate_split_dir, format_metrics_csv,
                               format_pr_curves_tsv, write_splits)
from .benchmark.models import TrainConfig
from .benchmark.stats import dataset_stats, pairwise_identity_distribution
from .dataset import read_labeled_csv, write_audit_tsv, write_labeled_csv
from .labeler import LabelingConfig
from .manifest import read_manifest
from .noise_filter import label_experiment
from .panning_sim import SimConfig, generate_experiment, write_experiment

log = logging.getLogger("phagelab")


def _read_input(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    with open(path, encoding="utf-8") as fh:
        return fh.read()


def _write_output(path: str, text: str) -> None:
    if path == "-":
        sys.stdout.write(text)
    else:
        seqio.atomic_write_text(path, text)


def cmd_translate(args) -> None:
    out = []
    skipped = {"no_orf": 0, "no_stop": 0, "invalid": 0}
    with open(args.input, "rb") if args.input != "-" else sys.stdin.buffer as fh:
        for rec in seqio.iter_fasta(fh):
            try:
                out.append(seqio.SequenceRecord(rec.id, seqio.translate_orf(rec.sequence)))
            except seqio.NoORFError:
                skipped["no_orf"] += 1
            except seqio.NoStopError:
                skipped["no_stop"] += 1
            except seqio.TranslationError:
                skipped["invalid"] += 1
    _write_output(args.output, seqio.format_fasta(out))
    print(json.dumps({"translated": len(out), "skipped": skipped}), file=sys.stderr)


def cmd_count(args) -> None:
    text = _read_input(args.input)
    if text.startswith("sequence\tcount"):
        table = seqio.parse_count_table(text)
    else:
        table = seqio.build_count_table(r.sequence for r in seqio.iter_fasta(text))
    if not args.keep_singletons:
        table = seqio.remove_singletons(table)
    _write_output(args.output, seqio.format_count_table(table))


def cmd_label(args) -> None:
    manifest = read_manifest(args.manifest)
    mothers, subs = manifest.load_tables()
    cfg = LabelingConfig(alpha=args.alpha, log10_ratio_threshold=args.ratio_threshold,
                         min_library_size=args.min_library_size)
    final, decisions, _ = label_experiment(mothers, subs, cfg, manifest.antigens)
    write_labeled_csv(final, args.output)
    audit = args.audit or os.path.splitext(args.output)[0] + ".audit.tsv"
    write_audit_tsv(decisions, audit)


def cmd_simulate(args) -> None:
    params = {}
    if args.config:
        with open(args.config, encoding="utf-8") as fh:
            params = json.load(fh)
        if "cdr3_length" in params:
            params["cdr3_length"] = tuple(params["cdr3_length"])
    if args.seed is not None:
        params["seed"] = args.seed
    cfg = SimConfig(**params)
    _, exp = generate_experiment(cfg)
    if not args.keep_singletons:
        exp = dataclasses.replace(exp, mothers=[seqio.remove_singletons(t) for t in exp.mothers],
                                  subs=[seqio.remove_singletons(t) for t in exp.subs])
    write_experiment(exp, args.out_dir)


def cmd_split(args) -> None:
    rows = read_labeled_csv(args.labeled, normalize_names=args.normalize_names)
    write_splits(rows, args.out_dir, runs=args.runs, seed=args.seed)


def cmd_train_eval(args) -> None:
    cfg = TrainConfig(epochs=args.epochs, batch_size=args.batch_size,
                      learning_rate=args.learning_rate, max_iterations=args.max_iterations,
                      undersample=args.undersample)
    results = evaluate_split_dir(args.split_dir, args.model, args.encoding, cfg)
    _write_output(args.metrics, format_metrics_csv(results))
    if args.pr_curves:
        seqio.atomic_write_text(args.pr_curves, format_pr_curves_tsv(results))


def cmd_stats(args) -> None:
    rows = read_labeled_csv(args.labeled, normalize_names=args.normalize_names)
    stats = dataset_stats(rows)
    text = stats.report()
    vhhs = sorted({r.vhh_sequence for r in rows})
    if len(vhhs) >= 2 and args.identity_sample > 0:
        counts, edges, ident = pairwise_identity_distribution(vhhs, args.identity_sample,
                                                              args.seed)
        text += f"\nidentity_pairs\t{len(ident)}\nbin_low\tbin_high\tpairs\n"
        text += "".join(f"{edges[i]:.2f}\t{edges[i + 1]:.2f}\t{c}\n" for i, c in enumerate(counts))
    _write_output(args.report, text)


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="phagelab", description=__doc__.splitlines()[0])
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("translate", help="DNA FASTA -> amino-acid FASTA (first ORF)")
    s.add_argument("input")
    s.add_argument("output")
    s.set_defaults(func=cmd_translate)

    s = sub.add_parser("count", help="amino-acid FASTA (or count TSV) -> count TSV")
    s.add_argument("input")
    s.add_argument("output")
    s.add_argument("--keep-singletons", action="store_true")
    s.set_defaults(func=cmd_count)

    s = sub.add_parser("label", help="label and denoise all libraries in a manifest")
    s.add_argument("manifest")
    s.add_argument("output")
    s.add_argument("--audit", help="noise-decision TSV (default: <output>.audit.tsv)")
    s.add_argument("--alpha", type=float, default=0.05)
    s.add_argument("--ratio-threshold", type=float, default=2.5,
                   help="log10 p-value ratio threshold for the negative-control check")
    s.add_argument("--min-library-size", type=int, default=0)
    s.set_defaults(func=cmd_label)

    s = sub.add_parser("simulate", help="write a simulated panning experiment")
    s.add_argument("out_dir")
    s.add_argument("--config", help="JSON object of simulator settings")
    s.add_argument("--seed", type=int)
    s.add_argument("--keep-singletons", action="store_true")
    s.set_defaults(func=cmd_simulate)

    s = sub.add_parser("split", help="incremental-antigen train/test splits")
    s.add_argument("labeled")
    s.add_argument("out_dir")
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--runs", type=int, default=5)
    s.add_argument("--normalize-names", action="store_true",
                   help="map labels like IL-6_P42A to P42A")
    s.set_defaults(func=cmd_split)

    s = sub.add_parser("train-eval", help="train and score every checkpoint of a split dir")
    s.add_argument("split_dir")
    s.add_argument("metrics")
    s.add_argument("--model", choices=MODELS, default="lr")
    s.add_argument("--encoding", choices=ENCODINGS, default="onehot")
    s.add_argument("--pr-curves")
    s.add_argument("--epochs", type=int, default=100)
    s.add_argument("--batch-size", type=int, default=256)
    s.add_argument("--learning-rate", type=float, default=1e-4)
    s.add_argument("--max-iterations", type=int, default=1000)
    s.add_argument("--undersample", action="store_true",
                   help="balance classes by subsampling the majority class (off by default)")
    s.set_defaults(func=cmd_train_eval)

    s = sub.add_parser("stats", help="dataset statistics and identity histogram")
    s.add_argument("labeled")
    s.add_argument("report")
    s.add_argument("--identity-sample", type=int, default=700)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--normalize-names", action="store_true")
    s.set_defaults(func=cmd_stats)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        args.func(args)
    except (OSError, ValueError, KeyError) as exc:
        print(json.dumps({"error": type(exc).__name__, "message": str(exc)}), file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
