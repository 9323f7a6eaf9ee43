"""Fixed drum dictionary built from isolated hit recordings."""

from __future__ import annotations

import os
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .audio import Spectrogram

MAGIC = "pfnmf-dict v1"


class DictionaryFormatError(ValueError):
    pass


@dataclass(frozen=True)
class Dictionary:
    """Drum basis ``basis`` (bins x components) with one label per column."""

    basis: np.ndarray
    labels: tuple

    def __post_init__(self):
        basis = np.asarray(self.basis, dtype=np.float64)
        if basis.ndim != 2:
            raise ValueError("basis must be a 2-D matrix")
        if basis.shape[1] != len(self.labels):
            raise ValueError(f"{basis.shape[1]} columns but {len(self.labels)} labels")
        if len(set(self.labels)) != len(self.labels):
            raise ValueError(f"duplicate labels in {list(self.labels)}")
        if np.any(basis < 0) or not np.all(np.isfinite(basis)):
            raise ValueError("basis entries must be finite and nonnegative")
        zero = np.flatnonzero(~basis.any(axis=0))
        if zero.size:
            raise ValueError(f"all-zero column for {[self.labels[i] for i in zero]}")
        object.__setattr__(self, "basis", basis)
        object.__setattr__(self, "labels", tuple(self.labels))

    @property
    def bin_count(self) -> int:
        return self.basis.shape[0]

    @property
    def rank(self) -> int:
        return self.basis.shape[1]


def build_component(hit: Spectrogram | np.ndarray) -> np.ndarray:
    """Average a hit's magnitude spectrogram over time."""
    mags = hit.magnitudes if isinstance(hit, Spectrogram) else np.asarray(hit, dtype=np.float64)
    if mags.ndim != 2 or mags.shape[1] == 0:
        raise ValueError("hit spectrogram has no frames")
    return mags.mean(axis=1)


def assemble_dictionary(columns: Sequence[np.ndarray], labels: Sequence[str]) -> Dictionary:
    if len(columns) != len(labels):
        raise ValueError(f"{len(columns)} columns but {len(labels)} labels")
    if not columns:
        raise ValueError("need at least one component")
    lengths = {len(c) for c in columns}
    if len(lengths) != 1:
        raise ValueError(f"columns differ in length: {sorted(lengths)}")
    return Dictionary(basis=np.column_stack(columns), labels=tuple(labels))


def save_dictionary(d: Dictionary, path) -> None:
    lines = [MAGIC, f"bins={d.bin_count} components={d.rank}", ",".join(d.labels)]
    lines += [",".join(repr(float(v)) for v in row) for row in d.basis]
    with open(os.fspath(path), "w", encoding="utf-8", newline="\n") as f:
        f.write("\n".join(lines) + "\n")


def load_dictionary(path) -> Dictionary:
    with open(os.fspath(path), encoding="utf-8") as f:
        lines = f.read().splitlines()
    if len(lines) < 3 or lines[0].strip() != MAGIC:
        raise DictionaryFormatError(f"{path}: missing '{MAGIC}' header")
    try:
        fields = dict(tok.split("=", 1) for tok in lines[1].split())
        bins, comps = int(fields["bins"]), int(fields["components"])
    except (KeyError, ValueError) as exc:
        raise DictionaryFormatError(f"{path}: bad size line {lines[1]!r}") from exc
    labels = [s.strip() for s in lines[2].split(",")]
    if len(labels) != comps:
        raise DictionaryFormatError(f"{path}: {len(labels)} labels, header says {comps}")
    rows = [ln for ln in lines[3:] if ln.strip()]
    if len(rows) != bins:
        raise DictionaryFormatError(f"{path}: {len(rows)} rows, header says {bins}")
    basis = np.empty((bins, comps))
    for i, ln in enumerate(rows):
        vals = ln.split(",")
        if len(vals) != comps:
            raise DictionaryFormatError(f"{path}: line {i + 4} has {len(vals)} values, expected {comps}")
        try:
            basis[i] = [float(v) for v in vals]
        except ValueError as exc:
            raise DictionaryFormatError(f"{path}: line {i + 4}: {exc}") from exc
    try:
        return Dictionary(basis=basis, labels=tuple(labels))
    except ValueError as exc:
        raise DictionaryFormatError(f"{path}: {exc}") from exc
