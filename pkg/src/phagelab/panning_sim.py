"""In-silico panning experiments with known binding ground truth.

Mother libraries are multinomial samples over heavy-tailed (log-normal)
clone abundances. Panning against a target multiplies each clone's weight
by ``enrichment_factor`` if it binds the target and ``background_retention``
otherwise, and the sublibrary is a fresh multinomial sample of the same
depth. A negative-control panning uses the NC column of the binding matrix,
which only nonspecific clones occupy.

In epitope mode every specific binder recognises a window of antigen
positions on wild-type IL-6 and loses binding to any alanine mutant whose
mutated residue falls inside that window.
"""

from __future__ import annotations

import os
import zlib
from dataclasses import dataclass, field

import numpy as np

from .antigens import MUTANTS, WILD_TYPE, antigen_panel, parse_mutation
from .labeler import BINDER, NON_BINDER, NOISE, NON_SIGNIFICANT, LabelingConfig
from .noise_filter import label_experiment
from .manifest import LibraryEntry, Manifest, write_manifest
from .seqio import (AMINO_ACIDS, NC_TARGET, CountTable, atomic_write_text, remove_singletons,
                    write_count_table)

FR1 = "QVQLQESGGGLVQAGGSLRLSCAAS"
FR2 = "MGWFRQAPGKEREFVA"
FR3 = "YADSVKGRFTISRDNAKNTVYLQMNSLKPEDTAVYYCAA"
FR4 = "WGQGTQVTVSS"
MAX_VHH_LENGTH = 152


class SimConfigError(ValueError):
    pass


@dataclass(frozen=True)
class SimConfig:
    seed: int = 0
    n_vhh: int = 2000
    n_targets: int = 4
    read_depth: int = 100_000
    enrichment_factor: float = 100.0
    background_retention: float = 0.01
    nonspecific_fraction: float = 0.05
    binder_fraction: float = 0.10
    abundance_shape: float = 1.0
    n_mothers: int = 1
    replicates: int = 1
    binding_mode: str = "random"
    epitope_half_width: int = 6
    family_size: int = 1
    family_identity: float = 0.97
    cdr3_length: tuple = (8, 20)

    def __post_init__(self):
        if self.n_vhh < 1:
            raise SimConfigError("n_vhh must be at least 1")
        if not 1 <= self.n_targets <= 1 + len(MUTANTS):
            raise SimConfigError(f"n_targets must be in [1, {1 + len(MUTANTS)}]")
        if self.read_depth < 1:
            raise SimConfigError("read_depth must be positive")
        if not 0 < self.background_retention <= self.enrichment_factor:
            raise SimConfigError("need 0 < background_retention <= enrichment_factor")
        for name in ("nonspecific_fraction", "binder_fraction"):
            if not 0.0 <= getattr(self, name) <= 1.0:
                raise SimConfigError(f"{name} must lie in [0, 1]")
        if self.nonspecific_fraction + self.binder_fraction > 1.0:
            raise SimConfigError("nonspecific_fraction + binder_fraction exceeds 1")
        if self.abundance_shape < 0:
            raise SimConfigError("abundance_shape must be non-negative")
        if self.n_mothers < 1 or self.replicates < 1 or self.family_size < 1:
            raise SimConfigError("n_mothers, replicates and family_size must be >= 1")
        if self.binding_mode not in ("random", "epitope"):
            raise SimConfigError(f"unknown binding_mode {self.binding_mode!r}")
        if not 0.0 < self.family_identity <= 1.0:
            raise SimConfigError("family_identity must lie in (0, 1]")

    @property
    def target_ids(self) -> list[str]:
        return [WILD_TYPE, *MUTANTS[: self.n_targets - 1]]


@dataclass
class GroundTruth:
    vhh_sequences: list
    target_ids: list  # columns of `binding`; the last one is NC
    binding: np.ndarray  # bool, (n_vhh, n_targets + 1)
    abundance: np.ndarray
    nonspecific: np.ndarray
    family: np.ndarray
    epitope: np.ndarray | None = None  # (n_vhh, 2) inclusive window, -1 for none

    def __post_init__(self):
        self.binding.setflags(write=False)
        self._row = {s: i for i, s in enumerate(self.vhh_sequences)}
        self._col = {t: j for j, t in enumerate(self.target_ids)}

    def binds(self, vhh: str, target: str) -> bool:
        return bool(self.binding[self._row[vhh], self._col[target]])

    def row(self, vhh: str) -> int:
        return self._row[vhh]

    def col(self, target: str) -> int:
        return self._col[target]


@dataclass
class SimulatedExperiment:
    config: SimConfig
    mothers: list
    subs: list  # target sublibraries followed by negative controls
    antigens: dict
    truth: GroundTruth = field(repr=False)

    def tables(self):
        return [*self.mothers, *self.subs]


def library_rng(seed: int, library_id: str) -> np.random.Generator:
    return np.random.default_rng([seed, zlib.crc32(library_id.encode())])


def _random_vhh(rng, cdr3_range) -> str:
    lo, hi = cdr3_range
    aa = np.array(list(AMINO_ACIDS))
    cdr = lambda n: "".join(rng.choice(aa, size=n))
    return FR1 + cdr(8) + FR2 + cdr(8) + FR3 + cdr(int(rng.integers(lo, hi + 1))) + FR4


def _mutate_cdrs(seq: str, rng, identity: float) -> str:
    """Point-mutate a family member so it shares ~`identity` with its parent."""
    variable = [i for i in range(len(seq)) if _in_cdr(i, len(seq))]
    n_mut = max(1, int(round((1.0 - identity) * len(seq))))
    chars = list(seq)
    for i in rng.choice(variable, size=min(n_mut, len(variable)), replace=False):
        choices = [a for a in AMINO_ACIDS if a != chars[i]]
        chars[i] = choices[int(rng.integers(len(choices)))]
    return "".join(chars)


def _in_cdr(i: int, length: int) -> bool:
    a = len(FR1)
    b = a + 8 + len(FR2)
    c = b + 8 + len(FR3)
    return a <= i < a + 8 or b <= i < b + 8 or c <= i < length - len(FR4)


def generate_truth(cfg: SimConfig) -> GroundTruth:
    rng = library_rng(cfg.seed, "ground-truth")
    n_fam = -(-cfg.n_vhh // cfg.family_size)
    seqs: list[str] = []
    family = np.empty(cfg.n_vhh, dtype=np.int64)
    seen = set()
    for f in range(n_fam):
        parent = _random_vhh(rng, cfg.cdr3_length)
        while parent in seen:
            parent = _random_vhh(rng, cfg.cdr3_length)
        for m in range(cfg.family_size):
            if len(seqs) == cfg.n_vhh:
                break
            s = parent if m == 0 else _mutate_cdrs(parent, rng, cfg.family_identity)
            while s in seen:
                s = _mutate_cdrs(parent, rng, cfg.family_identity)
            seen.add(s)
            family[len(seqs)] = f
            seqs.append(s)

    # binding roles are drawn per family so relatives share a profile
    role = rng.random(n_fam)
    fam_nonspecific = role < cfg.nonspecific_fraction
    fam_binder = (~fam_nonspecific) & (role < cfg.nonspecific_fraction + cfg.binder_fraction)
    targets = cfg.target_ids
    n_t = len(targets)
    fam_binding = np.zeros((n_fam, n_t + 1), dtype=bool)
    fam_binding[fam_nonspecific, :] = True
    epitope = None
    if cfg.binding_mode == "random":
        for f in np.flatnonzero(fam_binder):
            row = rng.random(n_t) < 0.5
            if not row.any():
                row[rng.integers(n_t)] = True
            fam_binding[f, :n_t] = row
    else:
        fam_epitope = np.full((n_fam, 2), -1, dtype=np.int64)
        positions = [parse_mutation(m)[1] for m in MUTANTS]
        lo, hi = min(positions), max(positions)
        mut_pos = np.array([0] + [parse_mutation(t)[1] for t in targets[1:]])
        for f in np.flatnonzero(fam_binder):
            centre = int(rng.integers(lo, hi + 1))
            win = (centre - cfg.epitope_half_width, centre + cfg.epitope_half_width)
            fam_epitope[f] = win
            inside = (mut_pos >= win[0]) & (mut_pos <= win[1])
            inside[0] = False
            fam_binding[f, :n_t] = ~inside
        epitope = fam_epitope[family]

    abundance = rng.lognormal(0.0, cfg.abundance_shape, size=cfg.n_vhh)
    return GroundTruth(seqs, [*targets, NC_TARGET], fam_binding[family], abundance,
                       fam_nonspecific[family], family, epitope)


def _sample_table(seqs, weights, depth, rng, **meta) -> CountTable:
    counts = rng.multinomial(depth, weights / weights.sum())
    nz = np.flatnonzero(counts)
    return CountTable(entries={seqs[i]: int(counts[i]) for i in nz}, **meta)


def generate_experiment(cfg: SimConfig):
    """Simulate mothers, per-target sublibraries and negative controls.

    Returns (GroundTruth, SimulatedExperiment). Tables are raw: singletons
    are still present.
    """
    truth = generate_truth(cfg)
    seqs = truth.vhh_sequences
    mothers, subs = [], []
    for m in range(cfg.n_mothers):
        mid = f"M{m + 1}"
        mothers.append(_sample_table(seqs, truth.abundance, cfg.read_depth,
                                     library_rng(cfg.seed, mid), library_id=mid, stage="mother"))
    for t in truth.target_ids:
        retention = np.where(truth.binding[:, truth.col(t)], cfg.enrichment_factor,
                             cfg.background_retention)
        weights = truth.abundance * retention
        stage = "negative_control" if t == NC_TARGET else "sublibrary"
        for m in range(cfg.n_mothers):
            for r in range(cfg.replicates):
                sid = f"M{m + 1}_{t}_r{r + 1}"
                subs.append(_sample_table(seqs, weights, cfg.read_depth, library_rng(cfg.seed, sid),
                                          library_id=sid, stage=stage, target_id=t,
                                          mother_id=f"M{m + 1}"))
    antigens = antigen_panel(truth.target_ids[:-1])
    return truth, SimulatedExperiment(cfg, mothers, subs, antigens, truth)


def run_labeling(exp: SimulatedExperiment, cfg: LabelingConfig = LabelingConfig(),
                 keep_singletons: bool = False):
    """Run the real labeling pipeline on a simulated experiment."""
    prune = (lambda t: t) if keep_singletons else remove_singletons
    mothers = [prune(t) for t in exp.mothers]
    subs = [prune(t) for t in exp.subs]
    return label_experiment(mothers, subs, cfg, exp.antigens)


@dataclass
class Confusion:
    tp: int = 0
    fp: int = 0
    tn: int = 0
    fn: int = 0
    non_significant: int = 0

    @property
    def predictions(self) -> int:
        return self.tp + self.fp + self.tn + self.fn

    @property
    def sensitivity(self) -> float:
        return self.tp / (self.tp + self.fn) if self.tp + self.fn else 0.0

    @property
    def false_binder_rate(self) -> float:
        return self.fp / (self.fp + self.tn) if self.fp + self.tn else 0.0

    @property
    def coverage(self) -> float:
        total = self.predictions + self.non_significant
        return self.predictions / total if total else 0.0


@dataclass
class LabelEvaluation:
    overall: Confusion
    per_target: dict
    nonspecific_rows: int
    nonspecific_noise: int

    @property
    def sensitivity(self) -> float:
        return self.overall.sensitivity

    @property
    def false_binder_rate(self) -> float:
        return self.overall.false_binder_rate

    @property
    def coverage(self) -> float:
        return self.overall.coverage

    @property
    def noise_rate(self) -> float:
        """Fraction of nonspecific-clone rows that ended up labeled noise."""
        return self.nonspecific_noise / self.nonspecific_rows if self.nonspecific_rows else 0.0


class EvaluationError(KeyError):
    pass


def evaluate_labels(predicted, truth: GroundTruth) -> LabelEvaluation:
    """Confusion counts of predicted labels against the simulator's truth.

    binder is a positive prediction, non_binder and noise are negative
    predictions, non_significant rows are tallied but not predictions.
    Rows for nonspecific clones are kept out of the confusion counts and
    summarised by how often they were labeled noise.
    """
    overall = Confusion()
    per_target: dict[str, Confusion] = {}
    ns_rows = ns_noise = 0
    for row in predicted:
        try:
            i = truth.row(row.vhh_sequence)
            j = truth.col(row.target_id)
        except KeyError as exc:
            raise EvaluationError(f"unknown VHH or target in row: {exc}") from None
        if truth.nonspecific[i]:
            ns_rows += 1
            ns_noise += row.label == NOISE
            continue
        c = per_target.setdefault(row.target_id, Confusion())
        positive = bool(truth.binding[i, j])
        if row.label == NON_SIGNIFICANT:
            key = "non_significant"
        elif row.label == BINDER:
            key = "tp" if positive else "fp"
        elif row.label in (NON_BINDER, NOISE):
            key = "fn" if positive else "tn"
        else:
            raise EvaluationError(f"unknown label {row.label!r}")
        setattr(c, key, getattr(c, key) + 1)
        setattr(overall, key, getattr(overall, key) + 1)
    return LabelEvaluation(overall, per_target, ns_rows, ns_noise)


# files -----------------------------------------------------------------------

def format_ground_truth(truth: GroundTruth) -> str:
    cols = ["vhh_sequence", "family", "nonspecific", "abundance", *truth.target_ids]
    lines = [",".join(cols)]
    for i, s in enumerate(truth.vhh_sequences):
        flags = ",".join("1" if b else "0" for b in truth.binding[i])
        lines.append(f"{s},{truth.family[i]},{int(truth.nonspecific[i])},"
                     f"{float(truth.abundance[i])!r},{flags}")
    return "\n".join(lines) + "\n"


def parse_ground_truth(text: str) -> GroundTruth:
    lines = text.splitlines()
    header = lines[0].split(",")
    if header[:4] != ["vhh_sequence", "family", "nonspecific", "abundance"]:
        raise ValueError("not a ground-truth CSV")
    seqs, fam, ns, ab, bind = [], [], [], [], []
    for line in lines[1:]:
        if not line:
            continue
        p = line.split(",")
        seqs.append(p[0])
        fam.append(int(p[1]))
        ns.append(p[2] == "1")
        ab.append(float(p[3]))
        bind.append([v == "1" for v in p[4:]])
    return GroundTruth(seqs, header[4:], np.array(bind, dtype=bool).reshape(len(seqs), -1),
                       np.array(ab), np.array(ns, dtype=bool), np.array(fam, dtype=np.int64))


def write_experiment(exp: SimulatedExperiment, out_dir) -> str:
    """Write count tables, manifest and ground truth; returns the manifest path."""
    os.makedirs(out_dir, exist_ok=True)
    entries = []
    for t in exp.tables():
        name = f"{t.library_id}.tsv"
        write_count_table(t, os.path.join(out_dir, name))
        entries.append(LibraryEntry(t.library_id, t.stage, name, t.mother_id, t.target_id))
    path = os.path.join(out_dir, "manifest.txt")
    write_manifest(Manifest(entries, dict(exp.antigens), out_dir), path)
    atomic_write_text(os.path.join(out_dir, "ground_truth.csv"), format_ground_truth(exp.truth))
    return path
