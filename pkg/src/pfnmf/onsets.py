"""Onset picking from drum activations and F-measure scoring."""

from __future__ import annotations

import math
import os
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

DEFAULT_OFFSETS = {"hihat": 0.05, "snare": 0.1, "kick": 0.15}


class AnnotationFormatError(ValueError):
    def __init__(self, path, lineno: int, message: str):
        super().__init__(f"{path}:{lineno}: {message}")
        self.lineno = lineno


@dataclass(frozen=True)
class OnsetList:
    component: str
    times: tuple = ()

    def __post_init__(self):
        times = tuple(float(t) for t in self.times)
        if any(b <= a for a, b in zip(times, times[1:])):
            raise ValueError(f"onset times for {self.component!r} must be strictly increasing")
        if times and (times[0] < 0 or not all(math.isfinite(t) for t in times)):
            raise ValueError(f"onset times for {self.component!r} must be finite and >= 0")
        object.__setattr__(self, "times", times)

    def __len__(self) -> int:
        return len(self.times)


@dataclass(frozen=True)
class EvalCounts:
    TP: int = 0
    FP: int = 0
    FN: int = 0

    def __post_init__(self):
        if min(self.TP, self.FP, self.FN) < 0:
            raise ValueError("counts must be nonnegative")

    def __add__(self, other: "EvalCounts") -> "EvalCounts":
        return EvalCounts(self.TP + other.TP, self.FP + other.FP, self.FN + other.FN)


@dataclass(frozen=True)
class MedianThresholdConfig:
    window_seconds: float = 0.1
    offset_coefficients: Mapping[str, float] = field(default_factory=lambda: dict(DEFAULT_OFFSETS))
    match_tolerance_seconds: float = 0.05

    def __post_init__(self):
        if self.window_seconds <= 0:
            raise ValueError("window_seconds must be positive")
        if self.match_tolerance_seconds <= 0:
            raise ValueError("match_tolerance_seconds must be positive")
        if any(c <= 0 for c in self.offset_coefficients.values()):
            raise ValueError("offset coefficients must be positive")


def f_score(counts: EvalCounts) -> float:
    """2TP / (2TP + FP + FN); 1.0 when all three counts are zero."""
    denom = 2 * counts.TP + counts.FP + counts.FN
    if denom == 0:
        return 1.0
    return 2 * counts.TP / denom


def time_to_frame(t: float, time_resolution: float) -> int:
    # the 1e-9 nudge keeps floor(j * res / res) == j despite rounding in j * res
    return int(math.floor(t / time_resolution + 1e-9))


def annotations_to_frame_counts(annotations: Sequence[OnsetList], n: int, time_resolution: float):
    """Map annotated onsets onto frames.

    Returns ``(p, mask)``: ``mask[i, j]`` is True when component ``i`` (in the
    order of ``annotations``) has an onset in frame ``j = floor(t / res)``, and
    ``p[j] = mask[:, j].sum()``. Two onsets of one component in a single frame
    count once.
    """
    mask = np.zeros((len(annotations), n), dtype=bool)
    for i, ol in enumerate(annotations):
        for t in ol.times:
            j = time_to_frame(t, time_resolution)
            if j >= n:
                raise ValueError(
                    f"{ol.component} onset at {t} s lies beyond the audio ({n} frames of {time_resolution} s)")
            mask[i, j] = True
    return mask.sum(axis=0), mask


def detect_topk(H_D: np.ndarray, p: Sequence[int]) -> np.ndarray:
    """Mark the ``p[j]`` largest entries of each column of ``H_D``; ties go to the lower index."""
    H_D = np.asarray(H_D, dtype=np.float64)
    p = np.asarray(p, dtype=int)
    r, n = H_D.shape
    if p.shape != (n,):
        raise ValueError(f"need one count per frame ({n}), got {p.shape}")
    if np.any(p > r) or np.any(p < 0):
        raise ValueError(f"per-frame counts must lie in [0, {r}]")
    order = np.argsort(-H_D, axis=0, kind="stable")
    ranks = np.empty_like(order)
    np.put_along_axis(ranks, order, np.arange(r)[:, None].repeat(n, axis=1), axis=0)
    return ranks < p[None, :]


def counts_topk(detected: np.ndarray, truth: np.ndarray) -> list[EvalCounts]:
    detected, truth = np.asarray(detected, dtype=bool), np.asarray(truth, dtype=bool)
    if detected.shape != truth.shape:
        raise ValueError(f"mask shapes differ: {detected.shape} vs {truth.shape}")
    tp = (detected & truth).sum(axis=1)
    fp = (detected & ~truth).sum(axis=1)
    fn = (~detected & truth).sum(axis=1)
    return [EvalCounts(int(a), int(b), int(c)) for a, b, c in zip(tp, fp, fn)]


def median_window_frames(window_seconds: float, time_resolution: float) -> int:
    w = max(1, int(math.floor(window_seconds / time_resolution + 0.5)))
    return w if w % 2 else w + 1


def adaptive_threshold(x: np.ndarray, width: int, offset: float) -> np.ndarray:
    """Centered running median (window clipped at the edges) plus ``offset``."""
    half = width // 2
    padded = np.pad(np.asarray(x, dtype=np.float64), half, constant_values=np.nan)
    windows = np.lib.stride_tricks.sliding_window_view(padded, width)
    return np.nanmedian(windows, axis=1) + offset


def detect_median(activation_row, config: MedianThresholdConfig, label: str,
                  time_resolution: float) -> OnsetList:
    """Onsets where the peak-normalized row is a local maximum above the adaptive threshold.

    Peaks within ``match_tolerance_seconds`` of the previously emitted onset are
    dropped.
    """
    if label not in config.offset_coefficients:
        raise KeyError(f"no offset coefficient for component {label!r}")
    x = np.asarray(activation_row, dtype=np.float64)
    if x.ndim != 1 or x.size == 0:
        raise ValueError("activation row must be a non-empty vector")
    if not np.all(np.isfinite(x)):
        raise ValueError(f"non-finite activation for {label!r}")
    peak = x.max()
    if peak <= 0:
        return OnsetList(label)
    x = x / peak

    thr = adaptive_threshold(x, median_window_frames(config.window_seconds, time_resolution),
                             config.offset_coefficients[label])
    left = np.concatenate(([-np.inf], x[:-1]))
    right = np.concatenate((x[1:], [-np.inf]))
    candidates = np.flatnonzero((x > thr) & (x >= left) & (x >= right))

    times = []
    for j in candidates:
        t = j * time_resolution
        if times and t - times[-1] < config.match_tolerance_seconds:
            continue
        times.append(t)
    return OnsetList(label, tuple(times))


def match_onsets(detected, reference, tolerance_seconds: float = 0.05) -> EvalCounts:
    """Greedy one-to-one matching in time order.

    Each detection takes the earliest unmatched reference onset within
    ``tolerance_seconds`` (inclusive).
    """
    det = detected.times if isinstance(detected, OnsetList) else tuple(detected)
    ref = reference.times if isinstance(reference, OnsetList) else tuple(reference)
    for name, seq in (("detected", det), ("reference", ref)):
        if any(b < a for a, b in zip(seq, seq[1:])):
            raise ValueError(f"{name} onsets are not sorted")

    used = [False] * len(ref)
    start = tp = 0
    for d in det:
        # references too early for d are too early for every later detection
        while start < len(ref) and ref[start] < d - tolerance_seconds:
            start += 1
        k = start
        while k < len(ref) and ref[k] <= d + tolerance_seconds:
            if not used[k] and abs(ref[k] - d) <= tolerance_seconds:
                used[k] = True
                tp += 1
                break
            k += 1
    return EvalCounts(TP=tp, FP=len(det) - tp, FN=len(ref) - tp)


def read_annotations(path) -> dict[str, OnsetList]:
    """Parse ``<time>\\t<label>`` lines; ``#`` starts a comment.

    A ``# labels: a,b,c`` comment declares components that may have no onsets.
    Times are sorted per component; duplicates are rejected.
    """
    by_label: dict[str, list] = {}
    with open(os.fspath(path), encoding="utf-8") as f:
        for lineno, raw in enumerate(f, start=1):
            line = raw.strip()
            if line.startswith("#"):
                body = line[1:].strip()
                if body.startswith("labels:"):
                    for lab in body[len("labels:"):].split(","):
                        if lab.strip():
                            by_label.setdefault(lab.strip(), [])
                continue
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            parts = line.split("\t") if "\t" in line else line.split()
            if len(parts) != 2:
                raise AnnotationFormatError(path, lineno, f"expected '<time>\\t<label>', got {raw.rstrip()!r}")
            try:
                t = float(parts[0])
            except ValueError:
                raise AnnotationFormatError(path, lineno, f"bad time {parts[0]!r}") from None
            if not math.isfinite(t) or t < 0:
                raise AnnotationFormatError(path, lineno, f"time must be finite and >= 0, got {parts[0]}")
            by_label.setdefault(parts[1].strip(), []).append(t)
    out = {}
    for label, times in by_label.items():
        times = sorted(times)
        if any(b == a for a, b in zip(times, times[1:])):
            raise ValueError(f"{path}: duplicate onset times for {label!r}")
        out[label] = OnsetList(label, tuple(times))
    return out


def write_annotations(path, onsets: Sequence[OnsetList]) -> None:
    rows = sorted((t, ol.component) for ol in onsets for t in ol.times)
    with open(os.fspath(path), "w", encoding="utf-8", newline="\n") as f:
        f.write("# labels: " + ",".join(ol.component for ol in onsets) + "\n")
        for t, label in rows:
            f.write(f"{t!r}\t{label}\n")
