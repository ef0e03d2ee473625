"""Sequence scoring: frame accuracy and Levenshtein phoneme accuracy.

Phoneme accuracy is 100 * (N - E) / N with N the reference length and E
the minimal edit distance under unit substitution/deletion/insertion
costs; heavy insertion can push it negative. The S/D/I breakdown comes
from one deterministic minimal alignment (preference match > sub > del >
ins during backtrace) since the split itself need not be unique.
"""

from dataclasses import dataclass

import numpy as np

from .errors import DataError


@dataclass(frozen=True)
class LabelAlphabet:
    """Ordered label strings with an optional garbage label."""

    labels: tuple
    garbage: str = None

    def __post_init__(self):
        if len(set(self.labels)) != len(self.labels):
            raise ValueError("alphabet labels must be unique")
        if self.garbage is not None and self.garbage not in self.labels:
            raise ValueError(f"garbage label {self.garbage!r} not in alphabet")

    def __len__(self):
        return len(self.labels)

    @property
    def index_of(self):
        return {l: i for i, l in enumerate(self.labels)}

    @property
    def garbage_index(self):
        return None if self.garbage is None else self.index_of[self.garbage]

    def to_indices(self, labels):
        table = self.index_of
        out = []
        for l in labels:
            if l not in table:
                raise DataError(f"label {l!r} not in alphabet")
            out.append(table[l])
        return out

    def to_labels(self, indices):
        return [self.labels[i] for i in indices]


def read_mapping(path):
    """Parse a many-to-one mapping file: `source target` per line."""
    table = {}
    with open(path, encoding="utf-8") as f:
        for lineno, line in enumerate(f, 1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split()
            if len(parts) != 2:
                raise DataError(f"{path}:{lineno}: expected `source target`, got {line!r}")
            table[parts[0]] = parts[1]
    return table


def map_labels(seq, table):
    """Apply a many-to-one label table elementwise."""
    out = []
    for sym in seq:
        if sym not in table:
            raise DataError(f"symbol {sym!r} has no mapping")
        out.append(table[sym])
    return out


def collapse_path(labels, strip=None):
    """Merge maximal runs of identical labels into single tokens.

    With `strip` set, tokens equal to it are removed after collapsing
    (adjacent survivors are not re-merged).
    """
    seq = list(labels)
    if not seq:
        raise ValueError("cannot collapse an empty sequence")
    out = [seq[0]]
    for x in seq[1:]:
        if x != out[-1]:
            out.append(x)
    if strip is not None:
        out = [x for x in out if x != strip]
    return out


def levenshtein(ref, hyp):
    """Edit distance plus one minimal (substitutions, deletions, insertions).

    The distance is unique; the breakdown follows the deterministic
    backtrace preference match > substitution > deletion > insertion.
    """
    ref = list(ref)
    hyp = list(hyp)
    n, m = len(ref), len(hyp)
    d = np.zeros((n + 1, m + 1), dtype=np.int64)
    d[:, 0] = np.arange(n + 1)
    d[0, :] = np.arange(m + 1)
    for i in range(1, n + 1):
        for j in range(1, m + 1):
            same = ref[i - 1] == hyp[j - 1]
            d[i, j] = min(
                d[i - 1, j - 1] + (0 if same else 1),
                d[i - 1, j] + 1,
                d[i, j - 1] + 1,
            )
    subs = dels = ins = 0
    i, j = n, m
    while i > 0 or j > 0:
        if i > 0 and j > 0 and ref[i - 1] == hyp[j - 1] and d[i, j] == d[i - 1, j - 1]:
            i, j = i - 1, j - 1
        elif i > 0 and j > 0 and d[i, j] == d[i - 1, j - 1] + 1:
            subs += 1
            i, j = i - 1, j - 1
        elif i > 0 and d[i, j] == d[i - 1, j] + 1:
            dels += 1
            i -= 1
        else:
            ins += 1
            j -= 1
    return int(d[n, m]), (subs, dels, ins)


def phoneme_accuracy(ref, hyp):
    """100 * (N - E) / N; negative under heavy insertion."""
    ref = list(ref)
    if not ref:
        raise ValueError("reference sequence must be non-empty")
    dist, _ = levenshtein(ref, list(hyp))
    return 100.0 * (len(ref) - dist) / len(ref)


def frame_accuracy(ref_frames, hyp_frames):
    """Percent of equal positions between two equal-length sequences."""
    ref = np.asarray(ref_frames)
    hyp = np.asarray(hyp_frames)
    if ref.shape != hyp.shape:
        raise ValueError(f"length mismatch: {ref.shape} vs {hyp.shape}")
    if ref.size == 0:
        raise ValueError("empty sequences")
    return 100.0 * float(np.mean(ref == hyp))
