"""Labeled-dataset CSV and noise-audit TSV readers and writers."""

from __future__ import annotations

import csv
import io
import math

from .antigens import normalize_antigen_name
from .labeler import BINDER, LABELS, NON_BINDER, UNCHANGED, LabeledPair
from .noise_filter import NoiseDecision
from .seqio import atomic_write_text

LABELED_COLUMNS = ["VHH_sequence", "Ag_label", "Ag_sequence", "label", "log10_p",
                   "direction", "source_library"]
AUDIT_COLUMNS = ["vhh_sequence", "target_id", "il6_log10_p", "nc_label", "nc_log10_p",
                 "outcome", "branch"]

# external label encodings accepted on import (e.g. a released 0/1 dataset)
_LABEL_ALIASES = {"1": BINDER, "0": NON_BINDER, "non-binder": NON_BINDER,
                  "non-significant": "non_significant"}


class DatasetFormatError(ValueError):
    pass


def _fmt(x: float) -> str:
    return repr(float(x))


def format_labeled_csv(rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(LABELED_COLUMNS)
    for r in rows:
        w.writerow([r.vhh_sequence, r.target_id, r.antigen_sequence, r.label,
                    _fmt(r.best_log10_p), r.best_direction, r.source_library_id])
    return buf.getvalue()


def write_labeled_csv(rows, path) -> None:
    atomic_write_text(path, format_labeled_csv(rows))


def parse_labeled_csv(text: str, normalize_names: bool = False) -> list[LabeledPair]:
    """Read the labeled CSV.

    Only the first four columns are required, so a dataset that carries just
    ``VHH_sequence,Ag_label,Ag_sequence,label`` (labels 1/0 or names) also
    loads; missing statistics become NaN / 'unchanged' / ''.
    """
    reader = csv.reader(io.StringIO(text))
    try:
        header = next(reader)
    except StopIteration:
        raise DatasetFormatError("empty file: missing header") from None
    header = [h.strip() for h in header]
    col = {h: i for i, h in enumerate(header)}
    missing = [c for c in LABELED_COLUMNS[:4] if c not in col]
    if missing:
        raise DatasetFormatError(f"missing columns: {', '.join(missing)}")
    rows = []
    for lineno, rec in enumerate(reader, start=2):
        if not rec:
            continue
        if len(rec) != len(header):
            raise DatasetFormatError(f"line {lineno}: expected {len(header)} fields, got {len(rec)}")
        label = rec[col["label"]].strip()
        label = _LABEL_ALIASES.get(label, label)
        if label not in LABELS:
            raise DatasetFormatError(f"line {lineno}: unknown label {label!r}")
        target = rec[col["Ag_label"]]
        if normalize_names:
            target = normalize_antigen_name(target)
        try:
            lp = float(rec[col["log10_p"]]) if "log10_p" in col else math.nan
        except ValueError:
            raise DatasetFormatError(f"line {lineno}: bad log10_p") from None
        rows.append(LabeledPair(
            rec[col["VHH_sequence"]], target, rec[col["Ag_sequence"]], label, lp,
            rec[col["direction"]] if "direction" in col else UNCHANGED,
            rec[col["source_library"]] if "source_library" in col else ""))
    return rows


def read_labeled_csv(path, normalize_names: bool = False) -> list[LabeledPair]:
    with open(path, encoding="utf-8", newline="") as fh:
        return parse_labeled_csv(fh.read(), normalize_names)


def format_audit_tsv(decisions) -> str:
    lines = ["\t".join(AUDIT_COLUMNS)]
    for d in decisions:
        nc = "" if d.nc_log10_p is None else _fmt(d.nc_log10_p)
        lines.append("\t".join([d.vhh_sequence, d.target_id, _fmt(d.il6_log10_p), d.nc_label,
                                nc, d.outcome, d.branch]))
    return "\n".join(lines) + "\n"


def parse_audit_tsv(text: str) -> list[NoiseDecision]:
    lines = text.splitlines()
    if not lines or lines[0].split("\t") != AUDIT_COLUMNS:
        raise DatasetFormatError("audit TSV header mismatch")
    out = []
    for line in lines[1:]:
        if not line:
            continue
        v, t, lp, ncl, nclp, outcome, branch = line.split("\t")
        out.append(NoiseDecision(v, t, float(lp), ncl, float(nclp) if nclp else None,
                                 outcome, branch))
    return out


def write_audit_tsv(decisions, path) -> None:
    atomic_write_text(path, format_audit_tsv(decisions))
