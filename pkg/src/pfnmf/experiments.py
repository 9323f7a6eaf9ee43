"""Batch evaluation over a directory of tracks, producing MUR-vs-NeNMF score tables.

Expected layout for one drum kit (several kits may be passed)::

    <kit>/hits/<label>.wav          one isolated hit per component
    <kit>/tracks/<name>.wav
    <kit>/annotations/<name>.txt    "<seconds>\\t<label>" lines
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .audio import Spectrogram, load_wav, stft_magnitude
from .dictionary import Dictionary, assemble_dictionary, build_component
from .factor import random_init
from .mur import MurConfig, run_mur
from .nenmf import NenmfConfig, run_nenmf
from .onsets import (MedianThresholdConfig, OnsetList, annotations_to_frame_counts, counts_topk,
                     detect_median, detect_topk, f_score, match_onsets, read_annotations)

SOLVERS = ("mur", "nenmf")


@dataclass
class TrackResult:
    name: str
    solver: str
    labels: tuple
    topk: list          # EvalCounts per label
    median: list        # EvalCounts per label
    losses: list = field(default_factory=list)


def dictionary_from_hits(hits: dict, window_length: int = 2048, hop_size: int = 512) -> Dictionary:
    labels = list(hits)
    cols = [build_component(stft_magnitude(hits[k], window_length, hop_size)) for k in labels]
    return assemble_dictionary(cols, labels)


def evaluate_track(name: str, S: Spectrogram, d: Dictionary, reference: dict, *, rank_h: int = 5,
                   seed: int = 0, mur: MurConfig = MurConfig(), nenmf: NenmfConfig = NenmfConfig(),
                   median: MedianThresholdConfig = MedianThresholdConfig()) -> list[TrackResult]:
    """Run both solvers from one initialization and score both detection protocols."""
    refs = [reference.get(lab, OnsetList(lab)) for lab in d.labels]
    res = S.time_resolution
    p, mask = annotations_to_frame_counts(refs, S.frame_count, res)
    init = random_init(S.bin_count, S.frame_count, d.rank, rank_h, seed)
    out = []
    for solver in SOLVERS:
        if solver == "mur":
            state, trace = run_mur(S, d, init, mur)
        else:
            state, trace = run_nenmf(S, d, init, nenmf)
        topk = counts_topk(detect_topk(state.H_D, p), mask)
        med = [match_onsets(detect_median(state.H_D[i], median, lab, res), refs[i],
                            median.match_tolerance_seconds)
               for i, lab in enumerate(d.labels)]
        out.append(TrackResult(name, solver, d.labels, topk, med, trace.losses))
    return out


def run_kit(kit_dir, window_length: int = 2048, hop_size: int = 512, **kwargs) -> list[TrackResult]:
    kit = Path(kit_dir)
    hits = {p.stem: load_wav(p) for p in sorted((kit / "hits").glob("*.wav"))}
    if not hits:
        raise FileNotFoundError(f"no hit recordings under {kit / 'hits'}")
    d = dictionary_from_hits(hits, window_length, hop_size)
    results = []
    for song in sorted((kit / "tracks").glob("*.wav")):
        ann = kit / "annotations" / f"{song.stem}.txt"
        reference = {k: v for k, v in read_annotations(ann).items() if k in d.labels}
        S = stft_magnitude(load_wav(song), window_length, hop_size)
        results += evaluate_track(f"{kit.name}/{song.stem}", S, d, reference, **kwargs)
    return results


def mean_f(results, protocol: str, solver: str, label: str | None = None) -> float:
    fs = [f_score(c) for r in results if r.solver == solver
          for lab, c in zip(r.labels, getattr(r, protocol)) if label is None or lab == label]
    return float(np.mean(fs)) if fs else float("nan")


def score_tables(results) -> dict:
    """Mean F over components and tracks (top-k), and per-component mean F (median threshold)."""
    labels = list(dict.fromkeys(lab for r in results for lab in r.labels))
    return {
        "topk": {s: mean_f(results, "topk", s) for s in SOLVERS},
        "median": {lab: {s: mean_f(results, "median", s, lab) for s in SOLVERS} for lab in labels},
    }


def format_tables(tables: dict, dataset: str = "dataset") -> str:
    lines = ["F-scores with the ground-truth number of onsets per frame",
             f"{'':<16}{'MUR':>8}{'NeNMF':>8}",
             f"{dataset:<16}{tables['topk']['mur']:>8.3f}{tables['topk']['nenmf']:>8.3f}",
             "",
             "F-scores with the signal-adaptive median threshold",
             f"{'':<16}{'MUR':>8}{'NeNMF':>8}"]
    for lab, row in tables["median"].items():
        lines.append(f"{lab:<16}{row['mur']:>8.3f}{row['nenmf']:>8.3f}")
    return "\n".join(lines)
