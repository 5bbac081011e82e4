"""Sequence input/output: FASTA parsing, ORF translation and read-count tables."""

from __future__ import annotations

import io
import os
import tempfile
from collections import Counter
from dataclasses import dataclass, field
from itertools import product
from typing import IO, Iterable, Iterator

AMINO_ACIDS = "ACDEFGHIKLMNPQRSTVWY"
DNA_ALPHABET = frozenset("ACGTN")
PROTEIN_ALPHABET = frozenset(AMINO_ACIDS + "X*")

STAGES = ("mother", "sublibrary", "negative_control")
NC_TARGET = "NC"

_BASES = "TCAG"
_CODE = "FFLLSSSSYY**CC*WLLLLPPPPHHQQRRRRIIIMTTTTNNKKSSRRVVVVAAAADDEEGGGG"
CODON_TABLE = {"".join(c): aa for c, aa in zip(product(_BASES, repeat=3), _CODE)}
STOP_CODONS = frozenset(c for c, aa in CODON_TABLE.items() if aa == "*")


class FastaParseError(ValueError):
    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class TranslationError(ValueError):
    pass


class NoORFError(TranslationError):
    pass


class NoStopError(TranslationError):
    pass


class CountTableError(ValueError):
    pass


@dataclass(frozen=True)
class SequenceRecord:
    id: str
    sequence: str


def _lines(source) -> Iterator[str]:
    if isinstance(source, bytes):
        source = source.decode("utf-8")
    if isinstance(source, str):
        yield from io.StringIO(source)
        return
    for line in source:
        yield line.decode("utf-8") if isinstance(line, bytes) else line


def iter_fasta(source) -> Iterator[SequenceRecord]:
    """Stream records from FASTA text, bytes, or an open (text or binary) file."""
    header = None
    header_line = 0
    chunks: list[str] = []
    lineno = 0
    for lineno, line in enumerate(_lines(source), start=1):
        line = line.strip()
        if not line:
            continue
        if line.startswith(">"):
            if header is not None:
                yield _finish(header, chunks, header_line)
            header = line[1:].split()[0] if line[1:].strip() else ""
            if not header:
                raise FastaParseError("empty record identifier", lineno)
            header_line = lineno
            chunks = []
        elif header is None:
            raise FastaParseError("sequence data before first '>' header", lineno)
        else:
            chunks.append(line.upper())
    if header is not None:
        yield _finish(header, chunks, header_line)


def _finish(header, chunks, line) -> SequenceRecord:
    seq = "".join(chunks)
    if not seq:
        raise FastaParseError(f"record {header!r} has an empty sequence", line)
    return SequenceRecord(header, seq)


def parse_fasta(source) -> list[SequenceRecord]:
    """Parse a whole FASTA input into a list of records, preserving order.

    Raises `FastaParseError` on data before the first header, empty bodies,
    or duplicate identifiers.
    """
    records = []
    seen = set()
    for rec in iter_fasta(source):
        if rec.id in seen:
            raise FastaParseError(f"duplicate record identifier {rec.id!r}")
        seen.add(rec.id)
        records.append(rec)
    return records


def write_fasta(records: Iterable[SequenceRecord], handle: IO[str], width: int = 0) -> None:
    for rec in records:
        handle.write(f">{rec.id}\n")
        if width and width > 0:
            for i in range(0, len(rec.sequence), width):
                handle.write(rec.sequence[i:i + width] + "\n")
        else:
            handle.write(rec.sequence + "\n")


def format_fasta(records: Iterable[SequenceRecord], width: int = 0) -> str:
    buf = io.StringIO()
    write_fasta(records, buf, width)
    return buf.getvalue()


def translate_orf(dna: str) -> str:
    """Translate the first ORF of a coding-orientation read.

    The ORF starts at the first ATG and runs in frame to the first stop codon;
    the stop itself is not included. Codons containing N become X.
    """
    dna = dna.upper()
    bad = set(dna) - DNA_ALPHABET
    if bad:
        raise TranslationError(f"invalid DNA characters: {''.join(sorted(bad))}")
    start = dna.find("ATG")
    if start < 0:
        raise NoORFError("no ATG start codon")
    residues = []
    for i in range(start, len(dna) - 2, 3):
        codon = dna[i:i + 3]
        if codon in STOP_CODONS:
            return "".join(residues)
        residues.append(CODON_TABLE.get(codon, "X"))
    raise NoStopError("no in-frame stop codon after start")


@dataclass(frozen=True)
class CountTable:
    """Unique amino-acid sequences of one library with their read counts.

    `mother_id` links a sublibrary or negative-control library to the mother
    library it was panned from; mothers leave it as None.
    """

    library_id: str
    stage: str
    entries: dict = field(default_factory=dict)
    target_id: str | None = None
    mother_id: str | None = None

    def __post_init__(self):
        if self.stage not in STAGES:
            raise CountTableError(f"unknown stage {self.stage!r}")
        if self.stage == "mother":
            if self.target_id is not None:
                raise CountTableError("mother libraries carry no target_id")
        elif not self.target_id:
            raise CountTableError(f"{self.stage} library {self.library_id!r} needs a target_id")
        if self.stage == "negative_control" and self.target_id != NC_TARGET:
            raise CountTableError(f"negative control target must be {NC_TARGET!r}")
        for seq, count in self.entries.items():
            if not seq:
                raise CountTableError("empty sequence in count table")
            if int(count) != count or count < 1:
                raise CountTableError(f"count for {seq!r} must be a positive integer")

    @property
    def total_reads(self) -> int:
        return sum(self.entries.values())

    def __len__(self):
        return len(self.entries)

    def count(self, seq: str) -> int:
        return self.entries.get(seq, 0)

    def sorted_items(self) -> list[tuple[str, int]]:
        return sorted(self.entries.items(), key=lambda kv: (-kv[1], kv[0]))

    def expand(self) -> list[str]:
        """Multiset expansion: each sequence repeated by its count."""
        return [s for s, c in self.sorted_items() for _ in range(c)]

    def with_entries(self, entries: dict) -> "CountTable":
        return CountTable(self.library_id, self.stage, entries, self.target_id, self.mother_id)


def build_count_table(seqs: Iterable[str], library_id: str = "library", stage: str = "mother",
                      target_id: str | None = None, mother_id: str | None = None) -> CountTable:
    counts = Counter()
    for s in seqs:
        if not s:
            raise CountTableError("empty sequence")
        counts[s] += 1
    return CountTable(library_id, stage, dict(counts), target_id, mother_id)


def remove_singletons(table: CountTable) -> CountTable:
    return table.with_entries({s: c for s, c in table.entries.items() if c > 1})


def format_count_table(table: CountTable) -> str:
    lines = ["sequence\tcount"]
    lines.extend(f"{s}\t{c}" for s, c in table.sorted_items())
    return "\n".join(lines) + "\n"


def parse_count_table(text: str, library_id: str = "library", stage: str = "mother",
                      target_id: str | None = None, mother_id: str | None = None) -> CountTable:
    lines = text.splitlines()
    if not lines or lines[0].rstrip("\r") != "sequence\tcount":
        raise CountTableError("count table must start with header 'sequence<TAB>count'")
    entries: dict[str, int] = {}
    for lineno, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        parts = line.rstrip("\r").split("\t")
        if len(parts) != 2 or not parts[1].isdigit():
            raise CountTableError(f"line {lineno}: expected 'sequence<TAB>count'")
        if parts[0] in entries:
            raise CountTableError(f"line {lineno}: duplicate sequence")
        entries[parts[0]] = int(parts[1])
    return CountTable(library_id, stage, entries, target_id, mother_id)


def read_count_table(path, **meta) -> CountTable:
    with open(path, encoding="utf-8") as fh:
        return parse_count_table(fh.read(), **meta)


def write_count_table(table: CountTable, path) -> None:
    atomic_write_text(path, format_count_table(table))


def atomic_write_text(path, text: str) -> None:
    """Write via a temporary sibling file and rename over the target."""
    path = os.fspath(path)
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix=os.path.basename(path))
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
