"""Library manifest: which count tables exist, how they pair, and antigen sequences.

Format (UTF-8, tab separated)::

    #phagelab-manifest v1
    [libraries]
    library_id  stage  path  mother_id  target_id
    M1          mother M1.tsv  -  -
    M1_wt_r1    sublibrary  M1_wt_r1.tsv  M1  wild-type
    M1_NC_r1    negative_control  M1_NC_r1.tsv  M1  NC
    [antigens]
    target_id  sequence
    wild-type  MNSF...

Relative paths resolve against the manifest's directory; '-' marks an empty field.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field

from .seqio import NC_TARGET, STAGES, atomic_write_text, read_count_table

FORMAT_TAG = "#phagelab-manifest v1"
LIBRARY_COLUMNS = ["library_id", "stage", "path", "mother_id", "target_id"]


class ManifestError(ValueError):
    pass


@dataclass(frozen=True)
class LibraryEntry:
    library_id: str
    stage: str
    path: str
    mother_id: str | None = None
    target_id: str | None = None


@dataclass
class Manifest:
    libraries: list = field(default_factory=list)
    antigens: dict = field(default_factory=dict)
    base_dir: str = "."

    def validate(self) -> None:
        ids = [e.library_id for e in self.libraries]
        if len(ids) != len(set(ids)):
            raise ManifestError("duplicate library ids")
        mothers = {e.library_id for e in self.libraries if e.stage == "mother"}
        nc_seen = False
        for e in self.libraries:
            if e.stage not in STAGES:
                raise ManifestError(f"{e.library_id}: unknown stage {e.stage!r}")
            if e.stage == "mother":
                if e.mother_id or e.target_id:
                    raise ManifestError(f"{e.library_id}: mothers take no mother_id/target_id")
                continue
            if e.mother_id not in mothers:
                raise ManifestError(f"{e.library_id}: unknown mother {e.mother_id!r}")
            if e.stage == "negative_control":
                nc_seen = True
                if e.target_id != NC_TARGET:
                    raise ManifestError(f"{e.library_id}: negative control target must be NC")
            elif e.target_id == NC_TARGET:
                raise ManifestError(f"{e.library_id}: NC is reserved for negative controls")
            elif e.target_id not in self.antigens:
                raise ManifestError(f"{e.library_id}: no antigen sequence for {e.target_id!r}")
        if not nc_seen:
            raise ManifestError("manifest needs at least one negative-control library")

    def resolve(self, entry: LibraryEntry) -> str:
        return entry.path if os.path.isabs(entry.path) else os.path.join(self.base_dir, entry.path)

    def load_tables(self):
        """(mothers, sublibraries incl. negative controls) as CountTables."""
        self.validate()
        mothers, subs = [], []
        for e in self.libraries:
            t = read_count_table(self.resolve(e), library_id=e.library_id, stage=e.stage,
                                 target_id=e.target_id, mother_id=e.mother_id)
            (mothers if e.stage == "mother" else subs).append(t)
        return mothers, subs


def _opt(v: str):
    return None if v in ("", "-") else v


def parse_manifest(text: str, base_dir: str = ".") -> Manifest:
    lines = [ln.rstrip("\r") for ln in text.splitlines()]
    if not lines or lines[0].strip() != FORMAT_TAG:
        raise ManifestError(f"first line must be {FORMAT_TAG!r}")
    section = None
    libs, antigens = [], {}
    header_pending = False
    for lineno, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        if line.strip() in ("[libraries]", "[antigens]"):
            section = line.strip()[1:-1]
            header_pending = True
            continue
        if header_pending:
            header_pending = False
            expected = LIBRARY_COLUMNS if section == "libraries" else ["target_id", "sequence"]
            if line.split("\t") != expected:
                raise ManifestError(f"line {lineno}: expected header {expected}")
            continue
        parts = line.split("\t")
        if section == "libraries":
            if len(parts) != 5:
                raise ManifestError(f"line {lineno}: expected 5 fields")
            libs.append(LibraryEntry(parts[0], parts[1], parts[2], _opt(parts[3]), _opt(parts[4])))
        elif section == "antigens":
            if len(parts) != 2:
                raise ManifestError(f"line {lineno}: expected 2 fields")
            antigens[parts[0]] = parts[1]
        else:
            raise ManifestError(f"line {lineno}: content outside a section")
    m = Manifest(libs, antigens, base_dir)
    m.validate()
    return m


def read_manifest(path) -> Manifest:
    with open(path, encoding="utf-8") as fh:
        return parse_manifest(fh.read(), os.path.dirname(os.path.abspath(path)))


def format_manifest(m: Manifest) -> str:
    out = [FORMAT_TAG, "[libraries]", "\t".join(LIBRARY_COLUMNS)]
    for e in m.libraries:
        out.append("\t".join([e.library_id, e.stage, e.path, e.mother_id or "-", e.target_id or "-"]))
    out += ["[antigens]", "target_id\tsequence"]
    out += [f"{t}\t{s}" for t, s in m.antigens.items()]
    return "\n".join(out) + "\n"


def write_manifest(m: Manifest, path) -> None:
    atomic_write_text(path, format_manifest(m))
