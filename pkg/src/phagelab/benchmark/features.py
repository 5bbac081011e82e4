"""Fixed-length encodings of VHH / antigen sequence pairs."""

from __future__ import annotations

from itertools import product

import numpy as np
import scipy.sparse as sp

from ..seqio import AMINO_ACIDS

MAX_VHH = 152
MAX_ANTIGEN = 218
N_POSITIONS = 400
N_CHANNELS = len(AMINO_ACIDS)
ONEHOT_DIM = N_POSITIONS * N_CHANNELS  # 8000
ANTIGEN_OFFSET = MAX_VHH

CKSAAP_GAPS = (0, 1, 2, 3)
PAIRS = ["".join(p) for p in product(AMINO_ACIDS, repeat=2)]
CKSAAP_DIM = len(CKSAAP_GAPS) * len(PAIRS)  # 1600

_INDEX = {a: i for i, a in enumerate(AMINO_ACIDS)}
_INDEX["X"] = -1  # recognised, encoded as an all-zero column

ENCODINGS = ("onehot", "cksaap")


class EncodingError(ValueError):
    pass


def _residue_codes(seq: str) -> np.ndarray:
    try:
        return np.fromiter((_INDEX[a] for a in seq), dtype=np.int64, count=len(seq))
    except KeyError as exc:
        raise EncodingError(f"unknown residue {exc.args[0]!r}") from None


def onehot_indices(vhh: str, antigen: str) -> np.ndarray:
    """Flat indices of the non-zero entries of the 8000-dim pair encoding."""
    if not vhh or not antigen:
        raise EncodingError("VHH and antigen sequences must be non-empty")
    if len(vhh) > MAX_VHH:
        raise EncodingError(f"VHH length {len(vhh)} exceeds {MAX_VHH}")
    if len(antigen) > MAX_ANTIGEN:
        raise EncodingError(f"antigen length {len(antigen)} exceeds {MAX_ANTIGEN}")
    v = _residue_codes(vhh)
    a = _residue_codes(antigen)
    pos = np.concatenate([np.arange(len(v)), ANTIGEN_OFFSET + np.arange(len(a))])
    code = np.concatenate([v, a])
    keep = code >= 0
    return pos[keep] * N_CHANNELS + code[keep]


def encode_onehot_pair(vhh: str, antigen: str) -> np.ndarray:
    """Flattened 400 x 20 one-hot matrix: VHH at positions 0-151, antigen from 152."""
    out = np.zeros(ONEHOT_DIM)
    out[onehot_indices(vhh, antigen)] = 1.0
    return out


def encode_cksaap(seq: str, k_max: int = 3) -> np.ndarray:
    """Counts of residue pairs (s[i], s[i+k+1]) for k = 0..k_max, blocks of 400."""
    codes = _residue_codes(seq)
    out = np.zeros((k_max + 1) * len(PAIRS))
    for k in range(k_max + 1):
        left, right = codes[: max(0, len(codes) - k - 1)], codes[k + 1:]
        ok = (left >= 0) & (right >= 0)
        np.add.at(out, k * len(PAIRS) + left[ok] * N_CHANNELS + right[ok], 1.0)
    return out


def onehot_matrix(pairs) -> sp.csr_matrix:
    """Sparse (n, 8000) design matrix for a list of (vhh, antigen) pairs."""
    indptr = [0]
    indices = []
    for vhh, antigen in pairs:
        idx = onehot_indices(vhh, antigen)
        indices.append(idx)
        indptr.append(indptr[-1] + len(idx))
    indices = np.concatenate(indices) if indices else np.zeros(0, dtype=np.int64)
    data = np.ones(len(indices))
    return sp.csr_matrix((data, indices, np.array(indptr)), shape=(len(indptr) - 1, ONEHOT_DIM))


def cksaap_matrix(pairs) -> np.ndarray:
    """Dense (n, 3200) matrix: CKSAAP of the VHH followed by CKSAAP of the antigen."""
    cache: dict[str, np.ndarray] = {}

    def enc(s):
        if s not in cache:
            cache[s] = encode_cksaap(s)
        return cache[s]

    rows = [np.concatenate([enc(v), enc(a)]) for v, a in pairs]
    return np.vstack(rows) if rows else np.zeros((0, 2 * CKSAAP_DIM))


def design_matrix(pairs, encoding: str = "onehot"):
    if encoding == "onehot":
        return onehot_matrix(pairs)
    if encoding == "cksaap":
        return cksaap_matrix(pairs)
    raise EncodingError(f"unknown encoding {encoding!r}")
